// Copyright 2026 The Shuffled KDE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Privacy accounting for I * S composed bitsum instances.
//
// Advanced:  eps   = eps0 S (e^{eps0 S} - 1) I + eps0 S sqrt(2 I ln(1/delta'))
//            delta = I S delta0 + delta'
// Pure:      eps   = I S eps0,  delta = 0

#ifndef SHUFFLED_KDE_PRIVACY_H_
#define SHUFFLED_KDE_PRIVACY_H_

#include <string>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace shuffled_kde {

enum class CompositionMode { kAdvanced, kPure };

const char* CompositionModeName(CompositionMode mode);
absl::StatusOr<CompositionMode> ParseCompositionMode(const std::string& name);

struct PrivacyGuarantee {
  double eps = 0.0;
  double delta = 0.0;
};

// InvalidArgument for delta' outside (0, 1) in advanced mode, or for
// non-positive eps0, S or I.
absl::StatusOr<PrivacyGuarantee> Compose(double eps0, double delta0, int s,
                                         int repetitions, double delta_prime,
                                         CompositionMode mode);

struct BudgetSpec {
  double target_eps = 1.0;
  double target_delta = 1e-6;  // ignored in pure mode
  CompositionMode mode = CompositionMode::kAdvanced;
  double eps_label = 0.0;  // may be +infinity (labels sent in the clear)
  // Fraction of target_delta given to delta'; the rest is split evenly over
  // the I * S bitsum instances.
  double split = 0.5;
};

absl::Status ValidateBudget(const BudgetSpec& budget);

struct PerInstanceBudget {
  double eps0 = 0.0;
  double delta0 = 0.0;
  double delta_prime = 0.0;
};

// Status code used for an unreachable privacy target.
inline constexpr absl::StatusCode kInfeasibleCode =
    absl::StatusCode::kOutOfRange;
inline bool IsInfeasible(const absl::Status& s) {
  return s.code() == kInfeasibleCode;
}

// Inverts Compose for eps0 by bisection on (0, 100], at most 200 steps.
// OutOfRange ("Infeasible") if no eps0 in that bracket reproduces the target
// to within 1e-9 relative.
absl::StatusOr<PerInstanceBudget> SolvePerInstance(const BudgetSpec& budget,
                                                   int s, int repetitions);

// Probability that m-ary randomized response keeps the true label:
// e^eps / (e^eps - 1 + m). Equals 1 for eps = +infinity.
double LabelKeepProbability(double eps_label, int m);

struct BudgetReport {
  PerInstanceBudget per_instance;
  PrivacyGuarantee composed;              // model-threat
  PrivacyGuarantee communication_threat;  // composed eps + eps_label
  CompositionMode mode = CompositionMode::kAdvanced;
  int s = 1;
  int repetitions = 1;
  double eps_label = 0.0;

  std::string ToString() const;
};

absl::StatusOr<BudgetReport> TotalBudgetReport(const BudgetSpec& budget, int s,
                                               int repetitions);

}  // namespace shuffled_kde

#endif  // SHUFFLED_KDE_PRIVACY_H_

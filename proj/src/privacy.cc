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

#include "shuffled_kde/privacy.h"

#include <cmath>
#include <limits>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"

namespace shuffled_kde {

namespace {

constexpr double kEps0Upper = 100.0;
constexpr int kMaxBisection = 200;
constexpr double kSolveRelTolerance = 1e-9;

}  // namespace

const char* CompositionModeName(CompositionMode mode) {
  return mode == CompositionMode::kPure ? "pure" : "advanced";
}

absl::StatusOr<CompositionMode> ParseCompositionMode(const std::string& name) {
  if (name == "advanced") return CompositionMode::kAdvanced;
  if (name == "pure") return CompositionMode::kPure;
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown composition mode '", name, "' (expected advanced or pure)"));
}

absl::StatusOr<PrivacyGuarantee> Compose(double eps0, double delta0, int s,
                                         int repetitions, double delta_prime,
                                         CompositionMode mode) {
  if (!(eps0 > 0.0) || s < 1 || repetitions < 1) {
    return absl::InvalidArgumentError(absl::StrCat(
        "InvalidParam: need eps0 > 0, S >= 1, I >= 1; got eps0 = ", eps0,
        ", S = ", s, ", I = ", repetitions));
  }
  const double is = static_cast<double>(repetitions) * s;
  if (mode == CompositionMode::kPure) {
    return PrivacyGuarantee{is * eps0, 0.0};
  }
  if (!(delta_prime > 0.0 && delta_prime < 1.0)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "InvalidParam: delta' must lie in (0, 1), got ", delta_prime));
  }
  if (!(delta0 >= 0.0)) {
    return absl::InvalidArgumentError("InvalidParam: delta0 must be >= 0");
  }
  const double e = eps0 * s;
  const double reps = static_cast<double>(repetitions);
  PrivacyGuarantee out;
  out.eps = e * std::expm1(e) * reps +
            e * std::sqrt(2.0 * reps * std::log(1.0 / delta_prime));
  out.delta = is * delta0 + delta_prime;
  return out;
}

absl::Status ValidateBudget(const BudgetSpec& budget) {
  if (!(budget.target_eps > 0.0) || !std::isfinite(budget.target_eps)) {
    return absl::InvalidArgumentError(
        absl::StrCat("target eps must be positive, got ", budget.target_eps));
  }
  if (!(budget.eps_label >= 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("eps_label must be >= 0, got ", budget.eps_label));
  }
  if (budget.mode == CompositionMode::kAdvanced) {
    if (!(budget.target_delta > 0.0 && budget.target_delta < 1.0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("advanced composition needs delta in (0, 1), got ",
                       budget.target_delta));
    }
    if (!(budget.split > 0.0 && budget.split < 1.0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("delta split must lie in (0, 1), got ", budget.split));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<PerInstanceBudget> SolvePerInstance(const BudgetSpec& budget,
                                                   int s, int repetitions) {
  if (absl::Status st = ValidateBudget(budget); !st.ok()) return st;
  if (s < 1 || repetitions < 1) {
    return absl::InvalidArgumentError("S and I must be positive");
  }
  const double is = static_cast<double>(repetitions) * s;
  if (budget.mode == CompositionMode::kPure) {
    return PerInstanceBudget{budget.target_eps / is, 0.0, 0.0};
  }

  PerInstanceBudget out;
  out.delta_prime = budget.split * budget.target_delta;
  out.delta0 = (1.0 - budget.split) * budget.target_delta / is;

  auto eps_at = [&](double eps0) {
    return Compose(eps0, out.delta0, s, repetitions, out.delta_prime,
                   budget.mode)
        ->eps;
  };
  if (!(eps_at(kEps0Upper) >= budget.target_eps)) {
    return absl::Status(
        kInfeasibleCode,
        absl::StrFormat("Infeasible: no eps0 in (0, %g] reaches eps = %g",
                        kEps0Upper, budget.target_eps));
  }
  double lo = 0.0;
  double hi = kEps0Upper;
  for (int iter = 0; iter < kMaxBisection; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (eps_at(mid) < budget.target_eps) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // Pick whichever endpoint lands closer to the target.
  out.eps0 = hi;
  if (lo > 0.0 && std::abs(eps_at(lo) - budget.target_eps) <
                      std::abs(eps_at(hi) - budget.target_eps)) {
    out.eps0 = lo;
  }
  const double achieved = eps_at(out.eps0);
  if (!(std::abs(achieved - budget.target_eps) <=
        kSolveRelTolerance * budget.target_eps)) {
    return absl::Status(
        kInfeasibleCode,
        absl::StrFormat("Infeasible: eps0 bisection reaches eps = %.17g, not "
                        "the target %.17g",
                        achieved, budget.target_eps));
  }
  return out;
}

double LabelKeepProbability(double eps_label, int m) {
  if (std::isinf(eps_label)) return 1.0;
  const double e = std::exp(eps_label);
  if (std::isinf(e)) return 1.0;
  return e / (e - 1.0 + m);
}

absl::StatusOr<BudgetReport> TotalBudgetReport(const BudgetSpec& budget, int s,
                                               int repetitions) {
  absl::StatusOr<PerInstanceBudget> per =
      SolvePerInstance(budget, s, repetitions);
  if (!per.ok()) return per.status();
  absl::StatusOr<PrivacyGuarantee> composed = Compose(
      per->eps0, per->delta0, s, repetitions, per->delta_prime, budget.mode);
  if (!composed.ok()) return composed.status();
  BudgetReport report;
  report.per_instance = *per;
  report.composed = *composed;
  report.communication_threat = {composed->eps + budget.eps_label,
                                 composed->delta};
  report.mode = budget.mode;
  report.s = s;
  report.repetitions = repetitions;
  report.eps_label = budget.eps_label;
  return report;
}

std::string BudgetReport::ToString() const {
  std::string out;
  absl::StrAppendFormat(&out, "composition            %s\n",
                        CompositionModeName(mode));
  absl::StrAppendFormat(&out, "instances (I x S)      %d x %d\n", repetitions,
                        s);
  absl::StrAppendFormat(&out, "per-instance eps0      %.10g\n",
                        per_instance.eps0);
  absl::StrAppendFormat(&out, "per-instance delta0    %.10g\n",
                        per_instance.delta0);
  absl::StrAppendFormat(&out, "delta'                 %.10g\n",
                        per_instance.delta_prime);
  absl::StrAppendFormat(&out, "composed (eps, delta)  (%.10g, %.10g)\n",
                        composed.eps, composed.delta);
  absl::StrAppendFormat(&out, "eps_label              %.10g\n", eps_label);
  absl::StrAppendFormat(&out, "model-threat           (%.10g, %.10g)-DP\n",
                        composed.eps, composed.delta);
  absl::StrAppendFormat(&out, "communication-threat   (%.10g, %.10g)-DP\n",
                        communication_threat.eps, communication_threat.delta);
  return out;
}

}  // namespace shuffled_kde

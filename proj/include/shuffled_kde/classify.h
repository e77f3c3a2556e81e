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

// Private learning on top of the KDE protocol.
//
// Training: every user reports its label through m-ary randomized response,
// the learner publishes the per-class counts of the reported labels, and the
// users of each reported class run their own KDE protocol execution. The
// result is one released KDE function per class.
//
// Classification is highest-density-class (HDC): argmax_c K_c(y). Class
// decoding ranks a public vocabulary by K_c(v).

#ifndef SHUFFLED_KDE_CLASSIFY_H_
#define SHUFFLED_KDE_CLASSIFY_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "shuffled_kde/bitsum.h"
#include "shuffled_kde/kde_protocol.h"
#include "shuffled_kde/lsq.h"
#include "shuffled_kde/points.h"
#include "shuffled_kde/privacy.h"
#include "shuffled_kde/random.h"

namespace shuffled_kde {

// Labels are 0-based in memory (1-based in files).
struct LabeledDataset {
  Points vectors;
  std::vector<int> labels;
  int m = 2;

  // Checks unit norms, label range, n >= m and m >= 2.
  static absl::StatusOr<LabeledDataset> Create(Points vectors,
                                               std::vector<int> labels, int m);
  size_t size() const { return labels.size(); }
};

struct Vocabulary {
  std::vector<std::string> terms;
  Points vectors;

  // Checks unique terms, matching sizes and unit norms.
  static absl::StatusOr<Vocabulary> Create(std::vector<std::string> terms,
                                           Points vectors);
};

// m-ary randomized response: keeps `c` with probability
// LabelKeepProbability(eps_label, m), otherwise reports a uniform label from
// [m] \ {c}.
int RandomizeLabel(int c, int m, double eps_label, Rng& private_rng);

struct TrainOptions {
  LsqSpec spec;
  int repetitions = 1;
  BitsumVariant variant = BitsumVariant::kExact;
  BitsumOptions bitsum_options = {};
  BudgetSpec budget = {};
  uint64_t master_seed = 0;
  ExecutionMode mode = ExecutionMode::kCellCounts;
};

class ClassifierModel {
 public:
  ClassifierModel(std::vector<ReleasedModel> class_models,
                  std::vector<int64_t> counts, BitsumVariant variant,
                  BudgetSpec budget, PerInstanceBudget per_instance,
                  uint64_t master_seed = 0)
      : class_models_(std::move(class_models)),
        counts_(std::move(counts)),
        variant_(variant),
        budget_(budget),
        per_instance_(per_instance),
        master_seed_(master_seed) {}

  int m() const { return static_cast<int>(class_models_.size()); }
  const LsqSpec& spec() const { return class_models_.front().spec(); }
  const ReleasedModel& class_model(int c) const { return class_models_[c]; }
  // Published counts of reported labels.
  const std::vector<int64_t>& counts() const { return counts_; }
  BitsumVariant variant() const { return variant_; }
  const BudgetSpec& budget() const { return budget_; }
  const PerInstanceBudget& per_instance() const { return per_instance_; }
  uint64_t master_seed() const { return master_seed_; }

  // Per-class released densities K_c(y), without input checks.
  std::vector<double> ClassScores(std::span<const double> y) const;

  std::string ToJson() const;
  static absl::StatusOr<ClassifierModel> FromJsonString(
      const std::string& text);

 private:
  std::vector<ReleasedModel> class_models_;
  std::vector<int64_t> counts_;
  BitsumVariant variant_;
  BudgetSpec budget_;
  PerInstanceBudget per_instance_;
  uint64_t master_seed_;
};

// Deterministic given options.master_seed. FailedPrecondition ("EmptyClass")
// if some reported class has no users; OutOfRange ("Infeasible") if the
// budget cannot be met.
absl::StatusOr<ClassifierModel> Train(const LabeledDataset& dataset,
                                      const TrainOptions& options);

// Index of the largest score; ties go to the smallest index.
int ArgMax(std::span<const double> scores);

absl::StatusOr<int> Classify(const ClassifierModel& model,
                             std::span<const double> y);

// Non-private oracle: HDC over exact per-class KDE.
int ClassifyExact(const LabeledDataset& dataset, KernelKind kind,
                  std::span<const double> y);

struct DecodedTerm {
  std::string term;
  double score = 0.0;
};

// Top-k vocabulary terms by K_c(v), descending; ties in lexicographic term
// order.
absl::StatusOr<std::vector<DecodedTerm>> DecodeClass(
    const ClassifierModel& model, int c, const Vocabulary& vocab, int k);

struct Evaluation {
  double accuracy = 0.0;
  // confusion[true][predicted]
  std::vector<std::vector<int64_t>> confusion;
  std::vector<int> predictions;
};

Evaluation EvaluatePredictions(std::span<const int> predictions,
                               std::span<const int> truth, int m);

absl::StatusOr<Evaluation> Evaluate(const ClassifierModel& model,
                                    const LabeledDataset& test);

// Diagnostic only: unbiased estimate of true class sizes from reported
// counts, inverting the randomized-response channel. Never used in training.
std::vector<double> DebiasedCounts(std::span<const int64_t> reported,
                                   double eps_label);

}  // namespace shuffled_kde

#endif  // SHUFFLED_KDE_CLASSIFY_H_

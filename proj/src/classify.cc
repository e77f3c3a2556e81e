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

#include "shuffled_kde/classify.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "nlohmann/json.hpp"
#include "shuffled_kde/json_text.h"

namespace shuffled_kde {

absl::StatusOr<LabeledDataset> LabeledDataset::Create(Points vectors,
                                                      std::vector<int> labels,
                                                      int m) {
  if (m < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("need at least 2 classes, got ", m));
  }
  if (vectors.size() != labels.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        vectors.size(), " vectors but ", labels.size(), " labels"));
  }
  if (labels.size() < static_cast<size_t>(m)) {
    return absl::InvalidArgumentError(
        absl::StrCat("need n >= m, got n = ", labels.size(), ", m = ", m));
  }
  for (size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] < 0 || labels[k] >= m) {
      return absl::InvalidArgumentError(absl::StrCat(
          "row ", k + 1, ": label ", labels[k] + 1, " outside [1, ", m, "]"));
    }
  }
  if (absl::Status s = vectors.CheckAllUnitNorm(); !s.ok()) return s;
  return LabeledDataset{std::move(vectors), std::move(labels), m};
}

absl::StatusOr<Vocabulary> Vocabulary::Create(std::vector<std::string> terms,
                                              Points vectors) {
  if (terms.size() != vectors.size()) {
    return absl::InvalidArgumentError("term and vector counts differ");
  }
  std::set<std::string> seen;
  for (const std::string& t : terms) {
    if (!seen.insert(t).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate vocabulary term '", t, "'"));
    }
  }
  if (absl::Status s = vectors.CheckAllUnitNorm(); !s.ok()) return s;
  return Vocabulary{std::move(terms), std::move(vectors)};
}

int RandomizeLabel(int c, int m, double eps_label, Rng& private_rng) {
  if (BernoulliDraw(LabelKeepProbability(eps_label, m), private_rng)) return c;
  std::uniform_int_distribution<int> other(0, m - 2);
  const int k = other(private_rng);
  return k < c ? k : k + 1;
}

// ---------------------------------------------------------------------------

absl::StatusOr<ClassifierModel> Train(const LabeledDataset& dataset,
                                      const TrainOptions& options) {
  if (dataset.vectors.dim() != options.spec.dim()) {
    return absl::InvalidArgumentError(
        absl::StrCat("dataset dimension ", dataset.vectors.dim(),
                     " does not match kernel dimension ", options.spec.dim()));
  }
  const int m = dataset.m;

  std::vector<int> reported(dataset.size());
  std::vector<int64_t> counts(m, 0);
  for (size_t u = 0; u < dataset.size(); ++u) {
    Rng rng(DeriveSeed(options.master_seed, "label", u));
    reported[u] =
        RandomizeLabel(dataset.labels[u], m, options.budget.eps_label, rng);
    ++counts[reported[u]];
  }
  for (int c = 0; c < m; ++c) {
    if (counts[c] == 0) {
      return absl::FailedPreconditionError(
          absl::StrCat("EmptyClass: no user reported class ", c + 1));
    }
  }

  absl::StatusOr<PerInstanceBudget> per =
      SolvePerInstance(options.budget, options.spec.s(), options.repetitions);
  if (!per.ok()) return per.status();

  std::vector<ReleasedModel> class_models;
  class_models.reserve(m);
  for (int c = 0; c < m; ++c) {
    Points members(dataset.vectors.dim());
    members.Reserve(counts[c]);
    for (size_t u = 0; u < dataset.size(); ++u) {
      if (reported[u] == c) members.Append(dataset.vectors[u]);
    }
    absl::StatusOr<BitsumConfig> bitsum =
        BitsumConfig::Create(options.variant, counts[c], per->eps0, per->delta0,
                             options.bitsum_options);
    if (!bitsum.ok()) return bitsum.status();
    absl::StatusOr<ProtocolInit> init = ProtocolInit::Create(
        options.spec, options.repetitions, *bitsum,
        DeriveSeed(options.master_seed, "class-public", c));
    if (!init.ok()) return init.status();
    absl::StatusOr<ReleasedModel> model = RunProtocol(
        *init, members, DeriveSeed(options.master_seed, "class-execution", c),
        options.mode);
    if (!model.ok()) return model.status();
    class_models.push_back(*std::move(model));
  }
  return ClassifierModel(std::move(class_models), std::move(counts),
                         options.variant, options.budget, *per,
                         options.master_seed);
}

std::vector<double> ClassifierModel::ClassScores(
    std::span<const double> y) const {
  std::vector<double> scores(class_models_.size());
  for (size_t c = 0; c < class_models_.size(); ++c) {
    scores[c] = class_models_[c].QueryUnchecked(y);
  }
  return scores;
}

int ArgMax(std::span<const double> scores) {
  int best = 0;
  for (size_t c = 1; c < scores.size(); ++c) {
    if (scores[c] > scores[best]) best = static_cast<int>(c);
  }
  return best;
}

absl::StatusOr<int> Classify(const ClassifierModel& model,
                             std::span<const double> y) {
  if (y.size() != static_cast<size_t>(model.spec().dim())) {
    return absl::InvalidArgumentError("query dimension mismatch");
  }
  if (absl::Status s = CheckUnitNorm(y); !s.ok()) return s;
  return ArgMax(model.ClassScores(y));
}

int ClassifyExact(const LabeledDataset& dataset, KernelKind kind,
                  std::span<const double> y) {
  std::vector<double> sums(dataset.m, 0.0);
  std::vector<int64_t> sizes(dataset.m, 0);
  for (size_t u = 0; u < dataset.size(); ++u) {
    sums[dataset.labels[u]] += KernelExact(kind, dataset.vectors[u], y);
    ++sizes[dataset.labels[u]];
  }
  for (int c = 0; c < dataset.m; ++c) {
    sums[c] = sizes[c] > 0 ? sums[c] / static_cast<double>(sizes[c])
                           : -std::numeric_limits<double>::infinity();
  }
  return ArgMax(sums);
}

absl::StatusOr<std::vector<DecodedTerm>> DecodeClass(
    const ClassifierModel& model, int c, const Vocabulary& vocab, int k) {
  if (c < 0 || c >= model.m()) {
    return absl::InvalidArgumentError(
        absl::StrCat("class ", c + 1, " outside [1, ", model.m(), "]"));
  }
  if (k < 0 || static_cast<size_t>(k) > vocab.terms.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "k = ", k, " exceeds vocabulary size ", vocab.terms.size()));
  }
  if (vocab.vectors.dim() != model.spec().dim()) {
    return absl::InvalidArgumentError("vocabulary dimension mismatch");
  }
  std::vector<DecodedTerm> ranked;
  ranked.reserve(vocab.terms.size());
  const ReleasedModel& kde = model.class_model(c);
  for (size_t v = 0; v < vocab.terms.size(); ++v) {
    ranked.push_back({vocab.terms[v], kde.QueryUnchecked(vocab.vectors[v])});
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const DecodedTerm& a, const DecodedTerm& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.term < b.term;
            });
  ranked.resize(k);
  return ranked;
}

Evaluation EvaluatePredictions(std::span<const int> predictions,
                               std::span<const int> truth, int m) {
  Evaluation eval;
  eval.confusion.assign(m, std::vector<int64_t>(m, 0));
  eval.predictions.assign(predictions.begin(), predictions.end());
  int64_t correct = 0;
  for (size_t k = 0; k < truth.size(); ++k) {
    ++eval.confusion[truth[k]][predictions[k]];
    if (truth[k] == predictions[k]) ++correct;
  }
  eval.accuracy = truth.empty() ? 0.0
                                : static_cast<double>(correct) /
                                      static_cast<double>(truth.size());
  return eval;
}

absl::StatusOr<Evaluation> Evaluate(const ClassifierModel& model,
                                    const LabeledDataset& test) {
  if (test.m != model.m()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "test set has ", test.m, " classes, model has ", model.m()));
  }
  if (test.vectors.dim() != model.spec().dim()) {
    return absl::InvalidArgumentError("test set dimension mismatch");
  }
  std::vector<int> predictions(test.size());
  for (size_t k = 0; k < test.size(); ++k) {
    predictions[k] = ArgMax(model.ClassScores(test.vectors[k]));
  }
  return EvaluatePredictions(predictions, test.labels, test.m);
}

std::vector<double> DebiasedCounts(std::span<const int64_t> reported,
                                   double eps_label) {
  const int m = static_cast<int>(reported.size());
  double n = 0.0;
  for (int64_t c : reported) n += static_cast<double>(c);
  const double keep = LabelKeepProbability(eps_label, m);
  const double move = (1.0 - keep) / (m - 1);
  std::vector<double> out(m);
  for (int c = 0; c < m; ++c) {
    out[c] = (static_cast<double>(reported[c]) - move * n) / (keep - move);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string EpsJson(double v) {
  return std::isinf(v) ? std::string("\"inf\"") : FormatDouble(v);
}

double EpsFromJson(const nlohmann::json& v) {
  if (v.is_string() && v.get<std::string>() == "inf") {
    return std::numeric_limits<double>::infinity();
  }
  return v.get<double>();
}

}  // namespace

std::string ClassifierModel::ToJson() const {
  std::string out = absl::StrCat(
      "{\n  \"m\": ", m(), ",\n  \"master_seed\": ", master_seed_,
      ",\n  \"bitsum\": ", JsonQuote(BitsumVariantName(variant_)),
      ",\n  \"budget\": {\"eps\": ", FormatDouble(budget_.target_eps),
      ", \"delta\": ", FormatDouble(budget_.target_delta),
      ", \"mode\": ", JsonQuote(CompositionModeName(budget_.mode)),
      ", \"eps_label\": ", EpsJson(budget_.eps_label),
      ", \"split\": ", FormatDouble(budget_.split),
      ", \"eps0\": ", FormatDouble(per_instance_.eps0),
      ", \"delta0\": ", FormatDouble(per_instance_.delta0),
      ", \"delta_prime\": ", FormatDouble(per_instance_.delta_prime),
      "},\n  \"counts\": [");
  for (size_t c = 0; c < counts_.size(); ++c) {
    if (c > 0) out += ", ";
    absl::StrAppend(&out, counts_[c]);
  }
  out += "],\n  \"classes\": [";
  for (size_t c = 0; c < class_models_.size(); ++c) {
    out += c == 0 ? "\n    " : ",\n    ";
    out += class_models_[c].ToJson();
  }
  out += "\n  ]\n}\n";
  return out;
}

absl::StatusOr<ClassifierModel> ClassifierModel::FromJsonString(
    const std::string& text) {
  nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded()) {
    return absl::InvalidArgumentError("model file is not valid JSON");
  }
  try {
    const int m = doc.at("m").get<int>();
    absl::StatusOr<BitsumVariant> variant =
        ParseBitsumVariant(doc.at("bitsum").get<std::string>());
    if (!variant.ok()) return variant.status();
    const nlohmann::json& b = doc.at("budget");
    absl::StatusOr<CompositionMode> mode =
        ParseCompositionMode(b.at("mode").get<std::string>());
    if (!mode.ok()) return mode.status();
    BudgetSpec budget{b.at("eps").get<double>(), b.at("delta").get<double>(),
                      *mode, EpsFromJson(b.at("eps_label")),
                      b.at("split").get<double>()};
    PerInstanceBudget per{b.at("eps0").get<double>(),
                          b.at("delta0").get<double>(),
                          b.at("delta_prime").get<double>()};
    std::vector<int64_t> counts = doc.at("counts").get<std::vector<int64_t>>();
    std::vector<ReleasedModel> classes;
    for (const nlohmann::json& c : doc.at("classes")) {
      absl::StatusOr<ReleasedModel> model = ReleasedModel::FromJson(c);
      if (!model.ok()) return model.status();
      classes.push_back(*std::move(model));
    }
    if (m < 2 || static_cast<int>(classes.size()) != m ||
        static_cast<int>(counts.size()) != m) {
      return absl::InvalidArgumentError(
          "class count does not match per-class entries");
    }
    for (int c = 0; c < m; ++c) {
      if (counts[c] < 1 || classes[c].n() != counts[c]) {
        return absl::InvalidArgumentError(absl::StrCat(
            "class ", c + 1, ": count does not match its model's n"));
      }
      if (!(classes[c].spec() == classes[0].spec())) {
        return absl::InvalidArgumentError("classes use different kernels");
      }
    }
    const uint64_t seed = doc.value("master_seed", uint64_t{0});
    return ClassifierModel(std::move(classes), std::move(counts), *variant,
                           budget, per, seed);
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed classifier model: ", e.what()));
  }
}

}  // namespace shuffled_kde

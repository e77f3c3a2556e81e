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

#include "shuffled_kde/kde_protocol.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "nlohmann/json.hpp"
#include "shuffled_kde/json_text.h"

namespace shuffled_kde {

absl::StatusOr<ProtocolInit> ProtocolInit::Create(const LsqSpec& spec,
                                                  int repetitions,
                                                  const BitsumConfig& bitsum,
                                                  uint64_t public_seed) {
  if (repetitions < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("repetitions I must be positive, got ", repetitions));
  }
  return ProtocolInit(spec, bitsum, SamplePairs(spec, repetitions, public_seed),
                      public_seed);
}

double RoundingProbability(double v, double r) {
  return std::clamp(0.5 * (1.0 + v / r), 0.0, 1.0);
}

namespace {

absl::Status CheckInput(const LsqSpec& spec, std::span<const double> x) {
  if (x.size() != static_cast<size_t>(spec.dim())) {
    return absl::InvalidArgumentError(absl::StrCat(
        "input has dimension ", x.size(), ", expected ", spec.dim()));
  }
  return CheckUnitNorm(x);
}

// Calls `emit(cell_index, counts)` for every instance, in (i, j) order.
template <typename Emit>
void RandomizeAllInstances(const ProtocolInit& init, std::span<const double> x,
                           Rng& private_rng, Emit&& emit) {
  const int q = init.q();
  const double r = init.spec().r();
  std::vector<double> features(q);
  for (int i = 0; i < init.repetitions(); ++i) {
    EvalFeaturesUnchecked(init.pairs()[i], x, features);
    for (int j = 0; j < q; ++j) {
      const int b =
          BernoulliDraw(RoundingProbability(features[j], r), private_rng) ? 1
                                                                          : 0;
      emit(i, j, RandomizeBitCounts(init.bitsum(), b, private_rng));
    }
  }
}

}  // namespace

absl::StatusOr<std::vector<Envelope>> UserRandomize(const ProtocolInit& init,
                                                    std::span<const double> x,
                                                    Rng& private_rng) {
  if (absl::Status s = CheckInput(init.spec(), x); !s.ok()) return s;
  std::vector<Envelope> out;
  out.reserve(init.cells());
  RandomizeAllInstances(init, x, private_rng,
                        [&](int i, int j, const PayloadCounts& c) {
                          for (int64_t k = 0; k < c.plus; ++k)
                            out.push_back({i, j, 1});
                          for (int64_t k = 0; k < c.minus; ++k)
                            out.push_back({i, j, -1});
                        });
  return out;
}

absl::StatusOr<int64_t> UserRandomizeInto(const ProtocolInit& init,
                                          std::span<const double> x,
                                          Rng& private_rng,
                                          std::span<PayloadCounts> cells) {
  if (absl::Status s = CheckInput(init.spec(), x); !s.ok()) return s;
  if (cells.size() != static_cast<size_t>(init.cells())) {
    return absl::InvalidArgumentError("cell buffer has the wrong size");
  }
  int64_t sent = 0;
  const int q = init.q();
  RandomizeAllInstances(init, x, private_rng,
                        [&](int i, int j, const PayloadCounts& c) {
                          cells[static_cast<size_t>(i) * q + j] += c;
                          sent += c.total();
                        });
  return sent;
}

// ---------------------------------------------------------------------------
// ReleasedModel

namespace {

absl::Status CheckFTilde(const LsqSpec& spec, int64_t n, int repetitions,
                         const std::vector<double>& f_tilde) {
  if (n < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("n must be positive, got ", n));
  }
  if (repetitions < 1) {
    return absl::InvalidArgumentError("model needs at least one repetition");
  }
  if (f_tilde.size() != static_cast<size_t>(repetitions) * spec.q()) {
    return absl::InvalidArgumentError(
        absl::StrCat("F_tilde has ", f_tilde.size(), " entries, expected ",
                     static_cast<int64_t>(repetitions) * spec.q()));
  }
  for (double v : f_tilde) {
    if (!std::isfinite(v)) {
      return absl::InvalidArgumentError("F_tilde entries must be finite");
    }
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<ReleasedModel> ReleasedModel::FromSeed(
    const LsqSpec& spec, int64_t n, int repetitions,
    std::vector<double> f_tilde, uint64_t public_seed) {
  if (absl::Status s = CheckFTilde(spec, n, repetitions, f_tilde); !s.ok()) {
    return s;
  }
  return ReleasedModel(spec, n, SamplePairs(spec, repetitions, public_seed),
                       std::move(f_tilde), public_seed);
}

absl::StatusOr<ReleasedModel> ReleasedModel::FromPairs(
    const LsqSpec& spec, int64_t n, std::vector<LsqPair> pairs,
    std::vector<double> f_tilde) {
  const int repetitions = static_cast<int>(pairs.size());
  if (absl::Status s = CheckFTilde(spec, n, repetitions, f_tilde); !s.ok()) {
    return s;
  }
  for (const LsqPair& pair : pairs) {
    if (!(pair.spec == spec)) {
      return absl::InvalidArgumentError("pair spec differs from model spec");
    }
  }
  return ReleasedModel(spec, n, std::move(pairs), std::move(f_tilde),
                       std::nullopt);
}

double ReleasedModel::QueryUnchecked(std::span<const double> y) const {
  const int q = spec_.q();
  std::vector<double> features(q);
  double acc = 0.0;
  for (size_t i = 0; i < pairs_.size(); ++i) {
    EvalFeaturesUnchecked(pairs_[i], y, features);
    const double* row = f_tilde_.data() + i * q;
    for (int j = 0; j < q; ++j) acc += row[j] * features[j];
  }
  return acc / (static_cast<double>(n_) * static_cast<double>(pairs_.size()));
}

absl::StatusOr<double> ReleasedModel::Query(std::span<const double> y) const {
  if (absl::Status s = CheckInput(spec_, y); !s.ok()) return s;
  return QueryUnchecked(y);
}

namespace {

std::string SpecJson(const LsqSpec& spec) {
  return absl::StrCat("{\"kernel\": ", JsonQuote(KernelKindName(spec.kind())),
                      ", \"dim\": ", spec.dim(), ", \"Q\": ", spec.q(),
                      ", \"R\": ", FormatDouble(spec.r()),
                      ", \"S\": ", spec.s(),
                      ", \"beta\": ", FormatDouble(spec.beta()), "}");
}

std::string PairJson(const LsqPair& pair) {
  if (const auto* g = std::get_if<GaussianParams>(&pair.params)) {
    return absl::StrCat("{\"omega\": ", JsonDoubleArray(g->omega),
                        ", \"phase\": ", FormatDouble(g->phase), "}");
  }
  if (const auto* s = std::get_if<SignedParams>(&pair.params)) {
    std::string out = "{\"signs\": [";
    for (size_t k = 0; k < s->signs.size(); ++k) {
      if (k > 0) out += ", ";
      absl::StrAppend(&out, static_cast<int>(s->signs[k]));
    }
    return out + "]}";
  }
  return "{}";
}

absl::StatusOr<LsqParams> ParamsFromJson(KernelKind kind,
                                         const nlohmann::json& doc) {
  switch (kind) {
    case KernelKind::kGaussian:
      return GaussianParams{doc.at("omega").get<std::vector<double>>(),
                            doc.at("phase").get<double>()};
    case KernelKind::kInnerProductSigned: {
      SignedParams params;
      for (int v : doc.at("signs").get<std::vector<int>>()) {
        params.signs.push_back(static_cast<int8_t>(v));
      }
      return params;
    }
    case KernelKind::kInnerProductIdentity:
      break;
  }
  return IdentityParams{};
}

}  // namespace

std::string ReleasedModel::ToJson(bool explicit_pairs) const {
  std::string out =
      absl::StrCat("{\"spec\": ", SpecJson(spec_), ", \"n\": ", n_,
                   ", \"I\": ", repetitions(), ", \"Q\": ", q());
  if (public_seed_.has_value() && !explicit_pairs) {
    absl::StrAppend(&out, ", \"public_seed\": ", *public_seed_);
  } else {
    out += ", \"pairs\": [";
    for (size_t i = 0; i < pairs_.size(); ++i) {
      if (i > 0) out += ", ";
      out += PairJson(pairs_[i]);
    }
    out += "]";
  }
  absl::StrAppend(&out, ", \"F_tilde\": ", JsonDoubleArray(f_tilde_), "}");
  return out;
}

absl::StatusOr<ReleasedModel> ReleasedModel::FromJson(
    const nlohmann::json& doc) {
  try {
    const nlohmann::json& spec_doc = doc.at("spec");
    absl::StatusOr<KernelKind> kind =
        ParseKernelKind(spec_doc.at("kernel").get<std::string>());
    if (!kind.ok()) return kind.status();
    absl::StatusOr<LsqSpec> spec =
        LsqSpec::Create(*kind, spec_doc.at("dim").get<int>());
    if (!spec.ok()) return spec.status();
    if (spec_doc.at("Q").get<int>() != spec->q() ||
        spec_doc.at("S").get<int>() != spec->s()) {
      return absl::InvalidArgumentError(
          "spec Q/S do not match the kernel family");
    }
    if (doc.at("Q").get<int>() != spec->q()) {
      return absl::InvalidArgumentError("model Q does not match the spec");
    }
    const int64_t n = doc.at("n").get<int64_t>();
    const int repetitions = doc.at("I").get<int>();
    std::vector<double> f_tilde = doc.at("F_tilde").get<std::vector<double>>();
    if (doc.contains("pairs")) {
      std::vector<LsqPair> pairs;
      for (const nlohmann::json& p : doc.at("pairs")) {
        absl::StatusOr<LsqParams> params = ParamsFromJson(*kind, p);
        if (!params.ok()) return params.status();
        absl::StatusOr<LsqPair> pair = MakePair(*spec, *std::move(params));
        if (!pair.ok()) return pair.status();
        pairs.push_back(*std::move(pair));
      }
      if (static_cast<int>(pairs.size()) != repetitions) {
        return absl::InvalidArgumentError("pair count does not match I");
      }
      return FromPairs(*spec, n, std::move(pairs), std::move(f_tilde));
    }
    return FromSeed(*spec, n, repetitions, std::move(f_tilde),
                    doc.at("public_seed").get<uint64_t>());
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed model document: ", e.what()));
  }
}

absl::StatusOr<ReleasedModel> ReleasedModel::FromJsonString(
    const std::string& text) {
  nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded()) {
    return absl::InvalidArgumentError("model document is not valid JSON");
  }
  return FromJson(doc);
}

// ---------------------------------------------------------------------------
// Analyzer and execution

absl::StatusOr<ReleasedModel> AnalyzeCells(const ProtocolInit& init,
                                           std::span<const PayloadCounts> cells,
                                           Rng& analyzer_rng) {
  if (cells.size() != static_cast<size_t>(init.cells())) {
    return absl::InvalidArgumentError(
        absl::StrCat("expected ", init.cells(), " cells, got ", cells.size()));
  }
  const double n = static_cast<double>(init.n());
  const double r = init.spec().r();
  std::vector<double> f_tilde(cells.size());
  for (size_t c = 0; c < cells.size(); ++c) {
    absl::StatusOr<BitsumEstimate> b =
        Analyze(init.bitsum(), cells[c], analyzer_rng);
    if (!b.ok()) return b.status();
    f_tilde[c] = (2.0 * b->value - n) * r;
  }
  return ReleasedModel(init.spec(), init.n(), init.pairs(), std::move(f_tilde),
                       init.public_seed());
}

absl::StatusOr<ReleasedModel> RunProtocol(const ProtocolInit& init,
                                          const Points& users,
                                          uint64_t execution_seed,
                                          ExecutionMode mode,
                                          ExecutionTrace* trace) {
  if (static_cast<int64_t>(users.size()) != init.n()) {
    return absl::FailedPreconditionError(absl::StrCat("declared n = ", init.n(),
                                                      " but ", users.size(),
                                                      " users sent messages"));
  }
  if (users.dim() != init.spec().dim()) {
    return absl::InvalidArgumentError(absl::StrCat("users have dimension ",
                                                   users.dim(), ", expected ",
                                                   init.spec().dim()));
  }
  if (absl::Status s = users.CheckAllUnitNorm(); !s.ok()) return s;

  std::vector<int64_t> per_user(users.size());
  std::vector<PayloadCounts> cells;
  if (mode == ExecutionMode::kCellCounts) {
    cells.resize(init.cells());
    for (size_t u = 0; u < users.size(); ++u) {
      Rng rng(DeriveSeed(execution_seed, "user", u));
      absl::StatusOr<int64_t> sent =
          UserRandomizeInto(init, users[u], rng, cells);
      if (!sent.ok()) return sent.status();
      per_user[u] = *sent;
    }
  } else {
    std::vector<Envelope> all;
    for (size_t u = 0; u < users.size(); ++u) {
      Rng rng(DeriveSeed(execution_seed, "user", u));
      absl::StatusOr<std::vector<Envelope>> sent =
          UserRandomize(init, users[u], rng);
      if (!sent.ok()) return sent.status();
      per_user[u] = static_cast<int64_t>(sent->size());
      all.insert(all.end(), sent->begin(), sent->end());
    }
    Rng shuffler_rng(DeriveSeed(execution_seed, "shuffler"));
    std::vector<Envelope> shuffled = Shuffle(std::move(all), shuffler_rng);
    absl::StatusOr<std::vector<PayloadCounts>> routed =
        Route(shuffled, init.repetitions(), init.q());
    if (!routed.ok()) return routed.status();
    cells = *std::move(routed);
    if (trace != nullptr) trace->shuffled = std::move(shuffled);
  }
  if (trace != nullptr) {
    trace->meter =
        MeterFromCounts(std::move(per_user), init.repetitions(), init.q());
  }
  Rng analyzer_rng(DeriveSeed(execution_seed, "analyzer"));
  return AnalyzeCells(init, cells, analyzer_rng);
}

double BoundSupRmse(double beta, double r, int s, int repetitions,
                    double err_pi, int64_t n) {
  const double r2 = r * r;
  const double rel = err_pi / static_cast<double>(n);
  return std::sqrt(4.0 * beta * beta + 16.0 * r2 * r2 * s * (s + rel * rel) /
                                           static_cast<double>(repetitions));
}

double BoundSupRmse(const LsqSpec& spec, int repetitions, double err_pi,
                    int64_t n) {
  return BoundSupRmse(spec.beta(), spec.r(), spec.s(), repetitions, err_pi, n);
}

double ExactKde(KernelKind kind, const Points& dataset,
                std::span<const double> y) {
  double acc = 0.0;
  for (size_t u = 0; u < dataset.size(); ++u) {
    acc += KernelExact(kind, dataset[u], y);
  }
  return acc / static_cast<double>(dataset.size());
}

absl::StatusOr<RmseReport> EmpiricalSupRmse(const KdeSetup& setup,
                                            const Points& dataset,
                                            const Points& queries, int trials,
                                            uint64_t seed) {
  if (trials < 30) {
    return absl::InvalidArgumentError(
        absl::StrCat("need at least 30 trials, got ", trials));
  }
  if (queries.empty()) {
    return absl::InvalidArgumentError("query set is empty");
  }
  if (absl::Status s = queries.CheckAllUnitNorm(); !s.ok()) return s;
  if (queries.dim() != setup.spec.dim()) {
    return absl::InvalidArgumentError("query dimension mismatch");
  }
  std::vector<double> truth(queries.size());
  for (size_t k = 0; k < queries.size(); ++k) {
    truth[k] = ExactKde(setup.spec.kind(), dataset, queries[k]);
  }
  std::vector<double> sq_err(queries.size(), 0.0);
  for (int t = 0; t < trials; ++t) {
    absl::StatusOr<ProtocolInit> init =
        ProtocolInit::Create(setup.spec, setup.repetitions, setup.bitsum,
                             DeriveSeed(seed, "public", t));
    if (!init.ok()) return init.status();
    absl::StatusOr<ReleasedModel> model = RunProtocol(
        *init, dataset, DeriveSeed(seed, "execution", t), setup.mode);
    if (!model.ok()) return model.status();
    for (size_t k = 0; k < queries.size(); ++k) {
      const double err = model->QueryUnchecked(queries[k]) - truth[k];
      sq_err[k] += err * err;
    }
  }
  RmseReport report;
  report.per_query.resize(queries.size());
  double sum = 0.0;
  for (size_t k = 0; k < queries.size(); ++k) {
    report.per_query[k] = std::sqrt(sq_err[k] / trials);
    report.max = std::max(report.max, report.per_query[k]);
    sum += report.per_query[k];
  }
  report.mean = sum / static_cast<double>(queries.size());
  return report;
}

}  // namespace shuffled_kde

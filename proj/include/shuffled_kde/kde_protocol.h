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

// Shuffled-DP kernel density estimation from bitsum protocols.
//
// Public initialization samples I LSQ pairs (f_i, g_i). Every user evaluates
// f_i(x) for all i, rounds each of the I * Q coordinates to a bit
// b_ij ~ Bernoulli((1 + f_i(x)_j / R) / 2) and runs one bitsum instance per
// coordinate, tagging payloads with (i, j). The analyzer estimates every
// bitsum B_ij and publishes F_ij = (2 B_ij - n) R. Anyone can then evaluate
//
//   K(y) = 1 / (n I) * sum_{i, j} F_ij * g_i(y)_j
//
// which estimates KDE_X(y) = 1/n sum_x k(x, y) with
//
//   supRMSE <= sqrt(4 beta^2 + 16 R^4 S (S + (E_bitsum / n)^2) / I).

#ifndef SHUFFLED_KDE_KDE_PROTOCOL_H_
#define SHUFFLED_KDE_KDE_PROTOCOL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "nlohmann/json_fwd.hpp"
#include "shuffled_kde/bitsum.h"
#include "shuffled_kde/lsq.h"
#include "shuffled_kde/points.h"
#include "shuffled_kde/random.h"
#include "shuffled_kde/shuffle_net.h"

namespace shuffled_kde {

class ProtocolInit {
 public:
  // Samples `repetitions` pairs from `public_seed`. The user count n is taken
  // from `bitsum`.
  static absl::StatusOr<ProtocolInit> Create(const LsqSpec& spec,
                                             int repetitions,
                                             const BitsumConfig& bitsum,
                                             uint64_t public_seed);

  const LsqSpec& spec() const { return spec_; }
  int repetitions() const { return static_cast<int>(pairs_.size()); }
  int q() const { return spec_.q(); }
  int64_t n() const { return bitsum_.n(); }
  int64_t cells() const { return static_cast<int64_t>(repetitions()) * q(); }
  const BitsumConfig& bitsum() const { return bitsum_; }
  const std::vector<LsqPair>& pairs() const { return pairs_; }
  uint64_t public_seed() const { return public_seed_; }

 private:
  ProtocolInit(LsqSpec spec, BitsumConfig bitsum, std::vector<LsqPair> pairs,
               uint64_t public_seed)
      : spec_(spec),
        bitsum_(std::move(bitsum)),
        pairs_(std::move(pairs)),
        public_seed_(public_seed) {}

  LsqSpec spec_;
  BitsumConfig bitsum_;
  std::vector<LsqPair> pairs_;
  uint64_t public_seed_;
};

// Rounding probability (1 + v / R) / 2, clamped to [0, 1].
double RoundingProbability(double v, double r);

// Randomizer for one user. Visits all I * Q instances, including zero
// coordinates. InvalidArgument for non-unit or wrong-dimension input.
absl::StatusOr<std::vector<Envelope>> UserRandomize(const ProtocolInit& init,
                                                    std::span<const double> x,
                                                    Rng& private_rng);

// Same randomizer, accumulating the user's payloads straight into per-cell
// counts instead of materializing envelopes. Consumes `private_rng`
// identically to UserRandomize. Returns the number of payloads sent.
absl::StatusOr<int64_t> UserRandomizeInto(const ProtocolInit& init,
                                          std::span<const double> x,
                                          Rng& private_rng,
                                          std::span<PayloadCounts> cells);

// The analyzer's published output. Carries only F, n, the LSQ spec and the
// public randomness; query evaluation is post-processing.
class ReleasedModel {
 public:
  // Model whose pairs are reproduced from `public_seed`.
  static absl::StatusOr<ReleasedModel> FromSeed(const LsqSpec& spec, int64_t n,
                                                int repetitions,
                                                std::vector<double> f_tilde,
                                                uint64_t public_seed);
  // Model carrying explicit pair parameters.
  static absl::StatusOr<ReleasedModel> FromPairs(const LsqSpec& spec, int64_t n,
                                                 std::vector<LsqPair> pairs,
                                                 std::vector<double> f_tilde);

  const LsqSpec& spec() const { return spec_; }
  int64_t n() const { return n_; }
  int repetitions() const { return static_cast<int>(pairs_.size()); }
  int q() const { return spec_.q(); }
  // Row-major I x Q.
  const std::vector<double>& f_tilde() const { return f_tilde_; }
  const std::optional<uint64_t>& public_seed() const { return public_seed_; }
  const std::vector<LsqPair>& pairs() const { return pairs_; }

  absl::StatusOr<double> Query(std::span<const double> y) const;
  // No norm or dimension check.
  double QueryUnchecked(std::span<const double> y) const;

  // JSON document with 17 significant digits per number. Pairs are written
  // explicitly when `explicit_pairs` is set or when the model has no seed.
  std::string ToJson(bool explicit_pairs = false) const;
  static absl::StatusOr<ReleasedModel> FromJson(const nlohmann::json& doc);
  static absl::StatusOr<ReleasedModel> FromJsonString(const std::string& text);

 private:
  friend absl::StatusOr<ReleasedModel> AnalyzeCells(
      const ProtocolInit& init, std::span<const PayloadCounts> cells,
      Rng& analyzer_rng);

  ReleasedModel(LsqSpec spec, int64_t n, std::vector<LsqPair> pairs,
                std::vector<double> f_tilde, std::optional<uint64_t> seed)
      : spec_(spec),
        n_(n),
        pairs_(std::move(pairs)),
        f_tilde_(std::move(f_tilde)),
        public_seed_(seed) {}

  LsqSpec spec_;
  int64_t n_;
  std::vector<LsqPair> pairs_;
  std::vector<double> f_tilde_;
  std::optional<uint64_t> public_seed_;
};

// Analyzer: one bitsum estimate per cell, F_ij = (2 B_ij - n) R.
absl::StatusOr<ReleasedModel> AnalyzeCells(const ProtocolInit& init,
                                           std::span<const PayloadCounts> cells,
                                           Rng& analyzer_rng);

enum class ExecutionMode {
  // Envelopes are materialized, shuffled and routed.
  kTranscript,
  // Payloads are counted per cell as they are produced. Equivalent in law
  // to kTranscript, since routing ignores message order.
  kCellCounts,
};

struct ExecutionTrace {
  TranscriptMeter meter;
  // Post-shuffle transcript; filled only in kTranscript mode.
  std::vector<Envelope> shuffled;
};

// One full execution over `users` (one point per user). Private, shuffler and
// analyzer streams are derived from `execution_seed`. FailedPrecondition if
// the number of users differs from the declared n.
absl::StatusOr<ReleasedModel> RunProtocol(const ProtocolInit& init,
                                          const Points& users,
                                          uint64_t execution_seed,
                                          ExecutionMode mode,
                                          ExecutionTrace* trace = nullptr);

// Upper bound on supRMSE,
// sqrt(4 beta^2 + 16 R^4 S (S + (err_pi / n)^2) / I).
double BoundSupRmse(double beta, double r, int s, int repetitions,
                    double err_pi, int64_t n);
double BoundSupRmse(const LsqSpec& spec, int repetitions, double err_pi,
                    int64_t n);

// Non-private KDE_X(y), by brute force.
double ExactKde(KernelKind kind, const Points& dataset,
                std::span<const double> y);

struct KdeSetup {
  LsqSpec spec;
  int repetitions = 1;
  BitsumConfig bitsum;  // n must equal the dataset size.
  ExecutionMode mode = ExecutionMode::kCellCounts;
};

struct RmseReport {
  std::vector<double> per_query;
  double max = 0.0;
  double mean = 0.0;
};

// RMSE of the released estimate against ExactKde for every query, over
// `trials` independent executions (fresh public and private randomness per
// trial). Requires trials >= 30.
absl::StatusOr<RmseReport> EmpiricalSupRmse(const KdeSetup& setup,
                                            const Points& dataset,
                                            const Points& queries, int trials,
                                            uint64_t seed);

}  // namespace shuffled_kde

#endif  // SHUFFLED_KDE_KDE_PROTOCOL_H_

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

// Shuffled-DP bitsum protocols. Each protocol is split into a randomizer
// (run by every user on a private bit) and an analyzer (run on the shuffled
// multiset of payloads from all n users). Payloads are single bits carrying
// -1 or +1.
//
//   kExact            one payload per user, analyzer counts +1s. No privacy.
//   kRandomizedResponse  the bit is flipped with probability p_RR; analyzer
//                     debiases the +1 count.
//   kThreeNB          correlated negative-binomial noise: b + psi1 + psi3
//                     copies of +1 and psi2 + psi3 copies of -1, analyzer
//                     returns the signed sum.
//   kCentralGaussian  baseline, not a shuffled protocol: exact count plus
//                     Gaussian noise at the analyzer.

#ifndef SHUFFLED_KDE_BITSUM_H_
#define SHUFFLED_KDE_BITSUM_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "shuffled_kde/random.h"

namespace shuffled_kde {

enum class BitsumVariant {
  kExact,
  kRandomizedResponse,
  kThreeNB,
  kCentralGaussian
};

const char* BitsumVariantName(BitsumVariant variant);
absl::StatusOr<BitsumVariant> ParseBitsumVariant(const std::string& name);

using Payload = int8_t;  // -1 or +1

// Wire encoding of a payload: +1 -> 1, -1 -> 0.
inline int EncodePayloadBit(Payload p) { return p > 0 ? 1 : 0; }
inline Payload DecodePayloadBit(int bit) { return bit != 0 ? 1 : -1; }

// A multiset over {-1, +1} is fully described by its two counts.
struct PayloadCounts {
  int64_t plus = 0;
  int64_t minus = 0;

  int64_t total() const { return plus + minus; }
  PayloadCounts& operator+=(const PayloadCounts& o) {
    plus += o.plus;
    minus += o.minus;
    return *this;
  }
  friend bool operator==(const PayloadCounts&, const PayloadCounts&) = default;
};

PayloadCounts CountPayloads(std::span<const Payload> payloads);

struct BitsumOptions {
  // Theta(1) constant in the 3NB p' parameter.
  double three_nb_c = 0.2;
  // Overrides the default RR flip probability; must lie in [0, 1/2).
  std::optional<double> p_rr;
  // RR analyzer returns the raw +1 count instead of the debiased estimate.
  bool rr_raw_sum = false;
};

class BitsumConfig {
 public:
  // Validates parameters and derives the variant's noise parameters.
  // Errors: InvalidArgument for out-of-range inputs, FailedPrecondition
  // ("DegenerateConfig") when the default RR flip probability reaches 1/2.
  static absl::StatusOr<BitsumConfig> Create(BitsumVariant variant, int64_t n,
                                             double eps0, double delta0,
                                             const BitsumOptions& options = {});

  BitsumVariant variant() const { return variant_; }
  int64_t n() const { return n_; }
  double eps0() const { return eps0_; }
  double delta0() const { return delta0_; }
  const BitsumOptions& options() const { return options_; }

  // RR.
  double flip_prob() const { return flip_prob_; }
  // 3NB. psi1, psi2 ~ NB(r, p) and psi3 ~ NB(r' / n, p') per user, so that
  // the aggregates over n users are NB(1, p) and NB(r', p').
  double nb_r() const { return nb_r_; }
  double nb_p() const { return nb_p_; }
  double nb_r_prime() const { return nb_r_prime_; }
  double nb_p_prime() const { return nb_p_prime_; }
  // Central Gaussian.
  double sigma() const { return sigma_; }

  // Same parameters with a different user count (used per class).
  absl::StatusOr<BitsumConfig> WithUserCount(int64_t n) const;

 private:
  BitsumConfig() = default;

  BitsumVariant variant_ = BitsumVariant::kExact;
  int64_t n_ = 1;
  double eps0_ = 1.0;
  double delta0_ = 0.0;
  BitsumOptions options_;
  double flip_prob_ = 0.0;
  double nb_r_ = 0.0;
  double nb_p_ = 0.0;
  double nb_r_prime_ = 0.0;
  double nb_p_prime_ = 0.0;
  double sigma_ = 0.0;
};

// Default RR flip probability: min(0.49, lambda / (2n)) with
// lambda = (64 / eps0^2) ln(4 / delta0). FailedPrecondition if
// lambda / (2n) >= 1/2.
absl::StatusOr<double> DefaultFlipProbability(int64_t n, double eps0,
                                              double delta0);

// Samples NB(r, p) with mean r p / (1 - p) through the Gamma-Poisson mixture,
// valid for any real r > 0.
absl::StatusOr<int64_t> SampleNegativeBinomial(double r, double p, Rng& rng);

// Randomizer, returning the payload multiset a user emits for bit `b`. Both
// forms consume the private stream identically.
PayloadCounts RandomizeBitCounts(const BitsumConfig& cfg, int b,
                                 Rng& private_rng);
std::vector<Payload> RandomizeBit(const BitsumConfig& cfg, int b,
                                  Rng& private_rng);

struct BitsumEstimate {
  double value = 0.0;
};

// Analyzer. `analyzer_rng` is only consumed by kCentralGaussian.
absl::StatusOr<BitsumEstimate> Analyze(const BitsumConfig& cfg,
                                       const PayloadCounts& payloads,
                                       Rng& analyzer_rng);
absl::StatusOr<BitsumEstimate> Analyze(const BitsumConfig& cfg,
                                       std::span<const Payload> payloads,
                                       Rng& analyzer_rng);

// Root-mean-square error of the estimate, from the variance of the noise the
// protocol injects. For 3NB only psi1 - psi2 survives the signed sum.
double RmseTheoretical(const BitsumConfig& cfg);

// Expected number of payloads one user emits for a bit that is 1 with
// probability `bit_prob`.
double ExpectedMessagesPerUser(const BitsumConfig& cfg, double bit_prob);

}  // namespace shuffled_kde

#endif  // SHUFFLED_KDE_BITSUM_H_

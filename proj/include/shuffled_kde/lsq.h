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

// Locality-sensitive quantization (LSQ) families.
//
// An LSQ family for a kernel k is a distribution over function pairs
// (f, g) : R^d -> [-R, R]^Q, each output having at most S nonzero entries,
// such that E[f(x)^T g(y)] is within beta of k(x, y). The protocol only ever
// touches a kernel through such pairs.
//
// Supported families (all with beta = 0, bandwidth fixed at 1):
//   kGaussian             random Fourier features, (Q, R, S) = (1, sqrt 2, 1)
//   kInnerProductSigned   random sign projection,  (Q, R, S) = (1, sqrt d, 1)
//   kInnerProductIdentity f = g = identity,        (Q, R, S) = (d, 1, d)

#ifndef SHUFFLED_KDE_LSQ_H_
#define SHUFFLED_KDE_LSQ_H_

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "shuffled_kde/random.h"

namespace shuffled_kde {

inline constexpr double kUnitNormTolerance = 1e-6;

enum class KernelKind { kGaussian, kInnerProductSigned, kInnerProductIdentity };

const char* KernelKindName(KernelKind kind);
absl::StatusOr<KernelKind> ParseKernelKind(const std::string& name);

// Parameters (Q, R, S, beta) of an LSQ family. Only constructible through
// Create, which derives the parameters from the kernel kind.
class LsqSpec {
 public:
  static absl::StatusOr<LsqSpec> Create(KernelKind kind, int dim);

  KernelKind kind() const { return kind_; }
  int dim() const { return dim_; }
  int q() const { return q_; }
  double r() const { return r_; }
  int s() const { return s_; }
  double beta() const { return beta_; }

  friend bool operator==(const LsqSpec&, const LsqSpec&) = default;

 private:
  LsqSpec(KernelKind kind, int dim, int q, double r, int s)
      : kind_(kind), dim_(dim), q_(q), r_(r), s_(s) {}

  KernelKind kind_;
  int dim_;
  int q_;
  double r_;
  int s_;
  double beta_ = 0.0;
};

struct GaussianParams {
  std::vector<double> omega;
  double phase = 0.0;
};

struct SignedParams {
  std::vector<int8_t> signs;  // entries in {-1, +1}
};

struct IdentityParams {};

using LsqParams = std::variant<GaussianParams, SignedParams, IdentityParams>;

// One sampled (f, g) pair. For all supported families f and g coincide, so a
// single parameter set describes both.
struct LsqPair {
  LsqSpec spec;
  LsqParams params;
};

using FeatureVector = std::vector<double>;

// Draws one pair from the family using the shared public stream.
LsqPair SamplePair(const LsqSpec& spec, Rng& public_rng);

// Draws `count` pairs from a fresh stream seeded with `public_seed`. This is
// how released models reproduce their public randomness.
std::vector<LsqPair> SamplePairs(const LsqSpec& spec, int count,
                                 uint64_t public_seed);

// Builds a pair from explicit parameters, validating shapes against `spec`.
absl::StatusOr<LsqPair> MakePair(const LsqSpec& spec, LsqParams params);

absl::Status CheckUnitNorm(std::span<const double> x);

absl::StatusOr<FeatureVector> EvalF(const LsqPair& pair,
                                    std::span<const double> x);
absl::StatusOr<FeatureVector> EvalG(const LsqPair& pair,
                                    std::span<const double> y);

// Evaluation without the norm check, for hot loops whose inputs were already
// validated. Writes Q entries to `out`.
void EvalFeaturesUnchecked(const LsqPair& pair, std::span<const double> x,
                           std::span<double> out);

// Exact kernel value. The identity and signed inner-product families share
// the kernel x^T y.
double KernelExact(KernelKind kind, std::span<const double> x,
                   std::span<const double> y);

}  // namespace shuffled_kde

#endif  // SHUFFLED_KDE_LSQ_H_

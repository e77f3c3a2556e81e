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

#include "shuffled_kde/lsq.h"

#include <cmath>
#include <numbers>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"

namespace shuffled_kde {

const char* KernelKindName(KernelKind kind) {
  switch (kind) {
    case KernelKind::kGaussian:
      return "gaussian";
    case KernelKind::kInnerProductSigned:
      return "ip-signed";
    case KernelKind::kInnerProductIdentity:
      return "ip-identity";
  }
  return "unknown";
}

absl::StatusOr<KernelKind> ParseKernelKind(const std::string& name) {
  if (name == "gaussian") return KernelKind::kGaussian;
  if (name == "ip-signed" || name == "ip") {
    return KernelKind::kInnerProductSigned;
  }
  if (name == "ip-identity") return KernelKind::kInnerProductIdentity;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown kernel '", name,
                   "' (expected gaussian, ip-signed or ip-identity)"));
}

absl::StatusOr<LsqSpec> LsqSpec::Create(KernelKind kind, int dim) {
  if (dim < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("dimension must be positive, got ", dim));
  }
  switch (kind) {
    case KernelKind::kGaussian:
      return LsqSpec(kind, dim, 1, std::numbers::sqrt2, 1);
    case KernelKind::kInnerProductSigned:
      return LsqSpec(kind, dim, 1, std::sqrt(static_cast<double>(dim)), 1);
    case KernelKind::kInnerProductIdentity:
      return LsqSpec(kind, dim, dim, 1.0, dim);
  }
  return absl::InvalidArgumentError("unknown kernel kind");
}

LsqPair SamplePair(const LsqSpec& spec, Rng& public_rng) {
  switch (spec.kind()) {
    case KernelKind::kGaussian: {
      GaussianParams params;
      params.omega.resize(spec.dim());
      for (double& w : params.omega) w = StandardNormal(public_rng);
      params.phase = 2.0 * std::numbers::pi * UniformUnit(public_rng);
      return LsqPair{spec, std::move(params)};
    }
    case KernelKind::kInnerProductSigned: {
      SignedParams params;
      params.signs.resize(spec.dim());
      for (int8_t& s : params.signs) s = (public_rng() >> 63) ? 1 : -1;
      return LsqPair{spec, std::move(params)};
    }
    case KernelKind::kInnerProductIdentity:
      break;
  }
  return LsqPair{spec, IdentityParams{}};
}

std::vector<LsqPair> SamplePairs(const LsqSpec& spec, int count,
                                 uint64_t public_seed) {
  Rng rng(public_seed);
  std::vector<LsqPair> pairs;
  pairs.reserve(count);
  for (int i = 0; i < count; ++i) pairs.push_back(SamplePair(spec, rng));
  return pairs;
}

absl::StatusOr<LsqPair> MakePair(const LsqSpec& spec, LsqParams params) {
  const size_t dim = static_cast<size_t>(spec.dim());
  switch (spec.kind()) {
    case KernelKind::kGaussian: {
      auto* g = std::get_if<GaussianParams>(&params);
      if (g == nullptr || g->omega.size() != dim) {
        return absl::InvalidArgumentError(
            "gaussian pair needs an omega vector of length dim");
      }
      if (!(g->phase >= 0.0 && g->phase < 2.0 * std::numbers::pi)) {
        return absl::InvalidArgumentError("phase must lie in [0, 2*pi)");
      }
      break;
    }
    case KernelKind::kInnerProductSigned: {
      auto* s = std::get_if<SignedParams>(&params);
      if (s == nullptr || s->signs.size() != dim) {
        return absl::InvalidArgumentError(
            "signed pair needs a sign vector of length dim");
      }
      for (int8_t v : s->signs) {
        if (v != 1 && v != -1) {
          return absl::InvalidArgumentError("signs must be +1 or -1");
        }
      }
      break;
    }
    case KernelKind::kInnerProductIdentity:
      if (!std::holds_alternative<IdentityParams>(params)) {
        return absl::InvalidArgumentError("identity pair takes no parameters");
      }
      break;
  }
  return LsqPair{spec, std::move(params)};
}

absl::Status CheckUnitNorm(std::span<const double> x) {
  double sq = 0.0;
  for (double v : x) sq += v * v;
  const double norm = std::sqrt(sq);
  if (!(std::abs(norm - 1.0) <= kUnitNormTolerance)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("NonUnitInput: |x|_2 = %.17g", norm));
  }
  return absl::OkStatus();
}

void EvalFeaturesUnchecked(const LsqPair& pair, std::span<const double> x,
                           std::span<double> out) {
  if (const auto* g = std::get_if<GaussianParams>(&pair.params)) {
    double dot = 0.0;
    for (size_t k = 0; k < x.size(); ++k) dot += g->omega[k] * x[k];
    out[0] =
        std::numbers::sqrt2 * std::cos(std::numbers::sqrt2 * dot + g->phase);
  } else if (const auto* s = std::get_if<SignedParams>(&pair.params)) {
    double acc = 0.0;
    for (size_t k = 0; k < x.size(); ++k) acc += s->signs[k] * x[k];
    out[0] = acc;
  } else {
    for (size_t k = 0; k < x.size(); ++k) out[k] = x[k];
  }
}

namespace {

absl::StatusOr<FeatureVector> Eval(const LsqPair& pair,
                                   std::span<const double> x) {
  if (x.size() != static_cast<size_t>(pair.spec.dim())) {
    return absl::InvalidArgumentError(absl::StrCat(
        "input has dimension ", x.size(), ", expected ", pair.spec.dim()));
  }
  if (absl::Status s = CheckUnitNorm(x); !s.ok()) return s;
  FeatureVector out(pair.spec.q());
  EvalFeaturesUnchecked(pair, x, out);
  return out;
}

}  // namespace

absl::StatusOr<FeatureVector> EvalF(const LsqPair& pair,
                                    std::span<const double> x) {
  return Eval(pair, x);
}

absl::StatusOr<FeatureVector> EvalG(const LsqPair& pair,
                                    std::span<const double> y) {
  return Eval(pair, y);
}

double KernelExact(KernelKind kind, std::span<const double> x,
                   std::span<const double> y) {
  if (kind == KernelKind::kGaussian) {
    double sq = 0.0;
    for (size_t k = 0; k < x.size(); ++k) {
      const double diff = x[k] - y[k];
      sq += diff * diff;
    }
    return std::exp(-sq);
  }
  double dot = 0.0;
  for (size_t k = 0; k < x.size(); ++k) dot += x[k] * y[k];
  return dot;
}

}  // namespace shuffled_kde

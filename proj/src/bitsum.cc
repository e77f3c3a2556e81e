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

#include "shuffled_kde/bitsum.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"

namespace shuffled_kde {

const char* BitsumVariantName(BitsumVariant variant) {
  switch (variant) {
    case BitsumVariant::kExact:
      return "exact";
    case BitsumVariant::kRandomizedResponse:
      return "rr";
    case BitsumVariant::kThreeNB:
      return "3nb";
    case BitsumVariant::kCentralGaussian:
      return "central-gaussian";
  }
  return "unknown";
}

absl::StatusOr<BitsumVariant> ParseBitsumVariant(const std::string& name) {
  if (name == "exact") return BitsumVariant::kExact;
  if (name == "rr") return BitsumVariant::kRandomizedResponse;
  if (name == "3nb") return BitsumVariant::kThreeNB;
  if (name == "central-gaussian") return BitsumVariant::kCentralGaussian;
  if (name == "pure") {
    return absl::UnimplementedError(
        "the pure-DP bitsum protocol is not implemented");
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown bitsum protocol '", name,
                   "' (expected exact, rr, 3nb or central-gaussian)"));
}

PayloadCounts CountPayloads(std::span<const Payload> payloads) {
  PayloadCounts counts;
  for (Payload p : payloads) {
    if (p > 0) {
      ++counts.plus;
    } else {
      ++counts.minus;
    }
  }
  return counts;
}

absl::StatusOr<double> DefaultFlipProbability(int64_t n, double eps0,
                                              double delta0) {
  const double lambda = 64.0 / (eps0 * eps0) * std::log(4.0 / delta0);
  const double p = lambda / (2.0 * static_cast<double>(n));
  if (p >= 0.5) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "DegenerateConfig: RR flip probability lambda/(2n) = %g >= 1/2 "
        "(n = %d too small for eps0 = %g, delta0 = %g)",
        p, n, eps0, delta0));
  }
  return std::min(0.49, p);
}

namespace {

// Parameters are validated by BitsumConfig::Create.
int64_t DrawNb(double r, double p, Rng& rng) {
  std::gamma_distribution<double> gamma(r, p / (1.0 - p));
  const double lambda = gamma(rng);
  if (!(lambda > 0.0)) return 0;
  std::poisson_distribution<int64_t> poisson(lambda);
  return poisson(rng);
}

}  // namespace

absl::StatusOr<BitsumConfig> BitsumConfig::Create(
    BitsumVariant variant, int64_t n, double eps0, double delta0,
    const BitsumOptions& options) {
  if (n < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("user count must be positive, got ", n));
  }
  if (!(eps0 > 0.0) || !std::isfinite(eps0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("eps0 must be positive and finite, got ", eps0));
  }
  const bool needs_delta = variant != BitsumVariant::kExact &&
                           !(variant == BitsumVariant::kRandomizedResponse &&
                             options.p_rr.has_value());
  if (needs_delta && !(delta0 > 0.0 && delta0 < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("delta0 must lie in (0, 1) for ",
                     BitsumVariantName(variant), ", got ", delta0));
  }

  BitsumConfig cfg;
  cfg.variant_ = variant;
  cfg.n_ = n;
  cfg.eps0_ = eps0;
  cfg.delta0_ = delta0;
  cfg.options_ = options;

  switch (variant) {
    case BitsumVariant::kExact:
      break;
    case BitsumVariant::kRandomizedResponse:
      if (options.p_rr.has_value()) {
        const double p = *options.p_rr;
        if (!(p >= 0.0 && p < 0.5)) {
          return absl::FailedPreconditionError(absl::StrCat(
              "DegenerateConfig: RR flip probability must lie in [0, 1/2), "
              "got ",
              p));
        }
        cfg.flip_prob_ = p;
      } else {
        absl::StatusOr<double> p = DefaultFlipProbability(n, eps0, delta0);
        if (!p.ok()) return p.status();
        cfg.flip_prob_ = *p;
      }
      break;
    case BitsumVariant::kThreeNB: {
      if (!(options.three_nb_c > 0.0)) {
        return absl::InvalidArgumentError("three_nb_c must be positive");
      }
      cfg.nb_r_ = 1.0 / static_cast<double>(n);
      cfg.nb_p_ = std::exp(-0.99 * eps0);
      // ln(2 e^{0.99 eps0} / delta0), expanded so large eps0 cannot overflow.
      cfg.nb_r_prime_ =
          3.0 * (1.0 + std::log(2.0) + 0.99 * eps0 - std::log(delta0));
      cfg.nb_p_prime_ = std::exp(-options.three_nb_c * eps0 /
                                 (eps0 + std::log(1.0 / delta0)));
      if (!(cfg.nb_p_ > 0.0 && cfg.nb_p_ < 1.0 && cfg.nb_p_prime_ > 0.0 &&
            cfg.nb_p_prime_ < 1.0 && cfg.nb_r_prime_ > 0.0)) {
        return absl::InvalidArgumentError(absl::StrFormat(
            "3NB parameters out of range: p = %g, p' = %g, r' = %g", cfg.nb_p_,
            cfg.nb_p_prime_, cfg.nb_r_prime_));
      }
      break;
    }
    case BitsumVariant::kCentralGaussian:
      cfg.sigma_ = std::sqrt(2.0 * std::log(1.25 / delta0)) / eps0;
      break;
  }
  return cfg;
}

absl::StatusOr<BitsumConfig> BitsumConfig::WithUserCount(int64_t n) const {
  return Create(variant_, n, eps0_, delta0_, options_);
}

absl::StatusOr<int64_t> SampleNegativeBinomial(double r, double p, Rng& rng) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    return absl::InvalidArgumentError(
        absl::StrCat("InvalidParam: NB shape r must be positive, got ", r));
  }
  if (!(p > 0.0 && p < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("InvalidParam: NB p must lie in (0, 1), got ", p));
  }
  return DrawNb(r, p, rng);
}

PayloadCounts RandomizeBitCounts(const BitsumConfig& cfg, int b,
                                 Rng& private_rng) {
  const int bit = b != 0 ? 1 : 0;
  switch (cfg.variant()) {
    case BitsumVariant::kExact:
    case BitsumVariant::kCentralGaussian:
      return bit ? PayloadCounts{1, 0} : PayloadCounts{0, 1};
    case BitsumVariant::kRandomizedResponse: {
      const bool flip = BernoulliDraw(cfg.flip_prob(), private_rng);
      const int sent = flip ? 1 - bit : bit;
      return sent ? PayloadCounts{1, 0} : PayloadCounts{0, 1};
    }
    case BitsumVariant::kThreeNB: {
      const int64_t psi1 = DrawNb(cfg.nb_r(), cfg.nb_p(), private_rng);
      const int64_t psi2 = DrawNb(cfg.nb_r(), cfg.nb_p(), private_rng);
      const double r3 = cfg.nb_r_prime() / static_cast<double>(cfg.n());
      const int64_t psi3 = DrawNb(r3, cfg.nb_p_prime(), private_rng);
      return PayloadCounts{bit + psi1 + psi3, psi2 + psi3};
    }
  }
  return {};
}

std::vector<Payload> RandomizeBit(const BitsumConfig& cfg, int b,
                                  Rng& private_rng) {
  const PayloadCounts counts = RandomizeBitCounts(cfg, b, private_rng);
  std::vector<Payload> out;
  out.reserve(counts.total());
  out.insert(out.end(), counts.plus, Payload{1});
  out.insert(out.end(), counts.minus, Payload{-1});
  return out;
}

absl::StatusOr<BitsumEstimate> Analyze(const BitsumConfig& cfg,
                                       const PayloadCounts& payloads,
                                       Rng& analyzer_rng) {
  const double plus = static_cast<double>(payloads.plus);
  switch (cfg.variant()) {
    case BitsumVariant::kExact:
      return BitsumEstimate{plus};
    case BitsumVariant::kRandomizedResponse: {
      const double p = cfg.flip_prob();
      if (!(p < 0.5)) {
        return absl::FailedPreconditionError(
            "DegenerateConfig: RR flip probability >= 1/2");
      }
      if (cfg.options().rr_raw_sum) return BitsumEstimate{plus};
      return BitsumEstimate{(plus - static_cast<double>(cfg.n()) * p) /
                            (1.0 - 2.0 * p)};
    }
    case BitsumVariant::kThreeNB:
      return BitsumEstimate{plus - static_cast<double>(payloads.minus)};
    case BitsumVariant::kCentralGaussian: {
      std::normal_distribution<double> noise(0.0, cfg.sigma());
      return BitsumEstimate{plus + noise(analyzer_rng)};
    }
  }
  return absl::InternalError("unknown bitsum variant");
}

absl::StatusOr<BitsumEstimate> Analyze(const BitsumConfig& cfg,
                                       std::span<const Payload> payloads,
                                       Rng& analyzer_rng) {
  return Analyze(cfg, CountPayloads(payloads), analyzer_rng);
}

double RmseTheoretical(const BitsumConfig& cfg) {
  const double n = static_cast<double>(cfg.n());
  switch (cfg.variant()) {
    case BitsumVariant::kExact:
      return 0.0;
    case BitsumVariant::kRandomizedResponse: {
      const double p = cfg.flip_prob();
      return std::sqrt(n * p * (1.0 - p)) / (1.0 - 2.0 * p);
    }
    case BitsumVariant::kThreeNB: {
      const double p = cfg.nb_p();
      return std::sqrt(n * 2.0 * cfg.nb_r() * p) / (1.0 - p);
    }
    case BitsumVariant::kCentralGaussian:
      return cfg.sigma();
  }
  return 0.0;
}

double ExpectedMessagesPerUser(const BitsumConfig& cfg, double bit_prob) {
  if (cfg.variant() != BitsumVariant::kThreeNB) return 1.0;
  const double p = cfg.nb_p();
  const double pp = cfg.nb_p_prime();
  const double r3 = cfg.nb_r_prime() / static_cast<double>(cfg.n());
  return bit_prob + 2.0 * cfg.nb_r() * p / (1.0 - p) +
         2.0 * r3 * pp / (1.0 - pp);
}

}  // namespace shuffled_kde

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

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"

namespace shuffled_kde {
namespace {

using ::shuffled_kde::testing::MeanVar;

BitsumConfig MustConfig(BitsumVariant variant, int64_t n, double eps0,
                        double delta0, const BitsumOptions& options = {}) {
  absl::StatusOr<BitsumConfig> cfg =
      BitsumConfig::Create(variant, n, eps0, delta0, options);
  EXPECT_TRUE(cfg.ok()) << cfg.status();
  return *cfg;
}

// One full bitsum execution over `bits`.
double RunOnce(const BitsumConfig& cfg, const std::vector<int>& bits,
               Rng& rng) {
  PayloadCounts all;
  for (int b : bits) all += RandomizeBitCounts(cfg, b, rng);
  absl::StatusOr<BitsumEstimate> est = Analyze(cfg, all, rng);
  EXPECT_TRUE(est.ok()) << est.status();
  return est->value;
}

TEST(BitsumNamesTest, RoundTrip) {
  for (BitsumVariant v :
       {BitsumVariant::kExact, BitsumVariant::kRandomizedResponse,
        BitsumVariant::kThreeNB, BitsumVariant::kCentralGaussian}) {
    absl::StatusOr<BitsumVariant> parsed =
        ParseBitsumVariant(BitsumVariantName(v));
    ASSERT_TRUE(parsed.ok());
    EXPECT_EQ(*parsed, v);
  }
  EXPECT_EQ(ParseBitsumVariant("pure").status().code(),
            absl::StatusCode::kUnimplemented);
  EXPECT_EQ(ParseBitsumVariant("laplace").status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(BitsumEncodingTest, RoundTrip) {
  EXPECT_EQ(EncodePayloadBit(1), 1);
  EXPECT_EQ(EncodePayloadBit(-1), 0);
  for (Payload p : {Payload{1}, Payload{-1}}) {
    EXPECT_EQ(DecodePayloadBit(EncodePayloadBit(p)), p);
  }
}

TEST(BitsumExactTest, OnePayloadPerUser) {
  const BitsumConfig cfg = MustConfig(BitsumVariant::kExact, 3, 1.0, 0.0);
  Rng rng(1);
  EXPECT_EQ(RandomizeBit(cfg, 1, rng), std::vector<Payload>{1});
  EXPECT_EQ(RandomizeBit(cfg, 0, rng), std::vector<Payload>{-1});
}

TEST(BitsumExactTest, CountsOnes) {
  const BitsumConfig cfg = MustConfig(BitsumVariant::kExact, 3, 1.0, 0.0);
  Rng rng(2);
  EXPECT_EQ(RunOnce(cfg, {1, 0, 1}, rng), 2.0);
  const std::vector<Payload> payloads = {1, -1, 1};
  absl::StatusOr<BitsumEstimate> est =
      Analyze(cfg, std::span<const Payload>(payloads), rng);
  ASSERT_TRUE(est.ok());
  EXPECT_EQ(est->value, 2.0);
}

TEST(BitsumThreeNbTest, ZeroNoiseLimitSendsNothingForZero) {
  BitsumOptions options;
  options.three_nb_c = 500.0;
  const BitsumConfig cfg =
      MustConfig(BitsumVariant::kThreeNB, 10, 200.0, 1e-6, options);
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    EXPECT_TRUE(RandomizeBit(cfg, 0, rng).empty());
    EXPECT_EQ(RandomizeBit(cfg, 1, rng), std::vector<Payload>{1});
  }
}

TEST(BitsumThreeNbTest, DerivedParameters) {
  const double eps0 = 0.7;
  const double delta0 = 1e-7;
  const int64_t n = 40;
  const BitsumConfig cfg = MustConfig(BitsumVariant::kThreeNB, n, eps0, delta0);
  EXPECT_DOUBLE_EQ(cfg.nb_r(), 1.0 / n);
  EXPECT_DOUBLE_EQ(cfg.nb_p(), std::exp(-0.99 * eps0));
  EXPECT_NEAR(cfg.nb_r_prime(),
              3.0 * (1.0 + std::log(2.0 * std::exp(0.99 * eps0) / delta0)),
              1e-12);
  EXPECT_NEAR(cfg.nb_p_prime(),
              std::exp(-0.2 * eps0 / (eps0 + std::log(1.0 / delta0))), 1e-15);
}

TEST(BitsumRrTest, ZeroFlipIsExact) {
  BitsumOptions options;
  options.p_rr = 0.0;
  const BitsumConfig cfg =
      MustConfig(BitsumVariant::kRandomizedResponse, 5, 1.0, 1e-6, options);
  Rng rng(4);
  for (int t = 0; t < 1000; ++t) {
    ASSERT_EQ(RandomizeBit(cfg, 1, rng), std::vector<Payload>{1});
  }
  EXPECT_EQ(RunOnce(cfg, {1, 1, 0, 1, 0}, rng), 3.0);
}

TEST(BitsumRrTest, DefaultFlipProbability) {
  const double eps0 = 1.0;
  const double delta0 = 1e-6;
  const double lambda = 64.0 * std::log(4.0 / delta0);
  const int64_t n = 2000;
  absl::StatusOr<double> p = DefaultFlipProbability(n, eps0, delta0);
  ASSERT_TRUE(p.ok());
  EXPECT_DOUBLE_EQ(*p, lambda / (2.0 * n));

  // lambda / (2n) in [0.49, 0.5) clamps.
  const int64_t n_clamp = static_cast<int64_t>(std::ceil(lambda / 0.995));
  absl::StatusOr<double> clamped =
      DefaultFlipProbability(n_clamp, eps0, delta0);
  ASSERT_TRUE(clamped.ok());
  EXPECT_EQ(*clamped, 0.49);

  absl::StatusOr<BitsumConfig> degenerate = BitsumConfig::Create(
      BitsumVariant::kRandomizedResponse, 100, eps0, delta0);
  ASSERT_FALSE(degenerate.ok());
  EXPECT_EQ(degenerate.status().code(), absl::StatusCode::kFailedPrecondition);
  EXPECT_NE(degenerate.status().message().find("DegenerateConfig"),
            std::string::npos);
}

TEST(BitsumRrTest, OverrideMustStayBelowHalf) {
  BitsumOptions options;
  options.p_rr = 0.5;
  EXPECT_EQ(BitsumConfig::Create(BitsumVariant::kRandomizedResponse, 10, 1.0,
                                 1e-6, options)
                .status()
                .code(),
            absl::StatusCode::kFailedPrecondition);
}

TEST(BitsumConfigTest, RejectsBadParameters) {
  EXPECT_FALSE(BitsumConfig::Create(BitsumVariant::kExact, 0, 1.0, 0.0).ok());
  EXPECT_FALSE(BitsumConfig::Create(BitsumVariant::kExact, 5, 0.0, 0.0).ok());
  EXPECT_FALSE(BitsumConfig::Create(BitsumVariant::kThreeNB, 5, 1.0, 0.0).ok());
  EXPECT_FALSE(
      BitsumConfig::Create(BitsumVariant::kCentralGaussian, 5, 1.0, 1.0).ok());
  BitsumOptions options;
  options.three_nb_c = 0.0;
  EXPECT_FALSE(
      BitsumConfig::Create(BitsumVariant::kThreeNB, 5, 1.0, 1e-6, options)
          .ok());
}

TEST(BitsumConfigTest, WithUserCountKeepsParameters) {
  const BitsumConfig cfg = MustConfig(BitsumVariant::kThreeNB, 100, 1.0, 1e-6);
  absl::StatusOr<BitsumConfig> other = cfg.WithUserCount(50);
  ASSERT_TRUE(other.ok());
  EXPECT_EQ(other->n(), 50);
  EXPECT_DOUBLE_EQ(other->nb_r(), 1.0 / 50);
  EXPECT_EQ(other->nb_p(), cfg.nb_p());
}

TEST(NegativeBinomialTest, InvalidParam) {
  Rng rng(5);
  EXPECT_EQ(SampleNegativeBinomial(0.0, 0.5, rng).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(SampleNegativeBinomial(1.0, 1.0, rng).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(SampleNegativeBinomial(1.0, 0.0, rng).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(NegativeBinomialTest, TinyPIsZero) {
  Rng rng(6);
  for (int t = 0; t < 1000; ++t) {
    ASSERT_EQ(*SampleNegativeBinomial(1.0, 1e-12, rng), 0);
  }
}

TEST(NegativeBinomialTest, MeanMatches) {
  const double r = 2.0;
  const double p = 0.5;
  Rng rng(7);
  MeanVar acc;
  for (int t = 0; t < 100000; ++t) {
    acc.Add(static_cast<double>(*SampleNegativeBinomial(r, p, rng)));
  }
  EXPECT_LE(std::abs(acc.mean() - r * p / (1 - p)), 4.0 * acc.se());
}

// Sums of n draws of NB(1/n, p) follow NB(1, p).
TEST(NegativeBinomialTest, InfinitelyDivisible) {
  const int n = 50;
  const double p = 0.3;
  const double mean = p / (1 - p);
  const double var = p / ((1 - p) * (1 - p));
  Rng rng(8);
  MeanVar acc;
  std::vector<double> sums;
  for (int t = 0; t < 20000; ++t) {
    int64_t s = 0;
    for (int k = 0; k < n; ++k) s += *SampleNegativeBinomial(1.0 / n, p, rng);
    acc.Add(static_cast<double>(s));
    sums.push_back(static_cast<double>(s));
  }
  EXPECT_LE(std::abs(acc.mean() - mean), 4.0 * acc.se());
  // SE of the sample variance from the fourth central moment.
  double m4 = 0.0;
  for (double s : sums) m4 += std::pow(s - acc.mean(), 4);
  m4 /= static_cast<double>(sums.size());
  const double var_se = std::sqrt((m4 - acc.variance() * acc.variance()) /
                                  static_cast<double>(sums.size()));
  EXPECT_LE(std::abs(acc.variance() - var), 4.0 * var_se);
}

TEST(BitsumRmseTest, ClosedForms) {
  EXPECT_EQ(RmseTheoretical(MustConfig(BitsumVariant::kExact, 10, 1.0, 0.0)),
            0.0);
  EXPECT_NEAR(RmseTheoretical(
                  MustConfig(BitsumVariant::kCentralGaussian, 10, 1.0, 1e-5)),
              4.84, 0.005);
  BitsumOptions options;
  options.p_rr = 0.25;
  EXPECT_NEAR(RmseTheoretical(MustConfig(BitsumVariant::kRandomizedResponse,
                                         100, 1.0, 1e-6, options)),
              8.66, 0.005);
  const double p = std::exp(-0.99);
  EXPECT_NEAR(
      RmseTheoretical(MustConfig(BitsumVariant::kThreeNB, 100, 1.0, 1e-6)),
      std::sqrt(2.0 * p) / (1.0 - p), 1e-12);
}

// Unbiasedness within 4 standard errors and RMSE against the closed form.
struct EmpiricalCase {
  BitsumVariant variant;
  double eps0;
  std::optional<double> p_rr;
  double rmse_ratio_limit;
};

class BitsumEmpiricalTest : public ::testing::TestWithParam<EmpiricalCase> {};

TEST_P(BitsumEmpiricalTest, UnbiasedWithExpectedRmse) {
  const EmpiricalCase& c = GetParam();
  const int n = 100;
  BitsumOptions options;
  options.p_rr = c.p_rr;
  const BitsumConfig cfg = MustConfig(c.variant, n, c.eps0, 1e-6, options);
  std::vector<int> bits(n);
  for (int k = 0; k < n; ++k) bits[k] = k % 3 == 0;
  double truth = 0.0;
  for (int b : bits) truth += b;

  Rng rng(9);
  MeanVar err;
  double sq = 0.0;
  const int runs = 10000;
  for (int t = 0; t < runs; ++t) {
    const double e = RunOnce(cfg, bits, rng) - truth;
    err.Add(e);
    sq += e * e;
  }
  EXPECT_LE(std::abs(err.mean()), 4.0 * err.se());
  const double rmse = std::sqrt(sq / runs);
  const double theory = RmseTheoretical(cfg);
  EXPECT_LE(rmse, c.rmse_ratio_limit * theory);
  EXPECT_GE(rmse, theory / c.rmse_ratio_limit);
}

INSTANTIATE_TEST_SUITE_P(
    Variants, BitsumEmpiricalTest,
    ::testing::Values(
        EmpiricalCase{BitsumVariant::kRandomizedResponse, 1.0, 0.25, 1.2},
        EmpiricalCase{BitsumVariant::kThreeNB, 1.0, std::nullopt, 1.5},
        EmpiricalCase{BitsumVariant::kCentralGaussian, 1.0, std::nullopt, 1.2}),
    [](const ::testing::TestParamInfo<EmpiricalCase>& info) {
      switch (info.param.variant) {
        case BitsumVariant::kRandomizedResponse:
          return std::string("RandomizedResponse");
        case BitsumVariant::kThreeNB:
          return std::string("ThreeNB");
        case BitsumVariant::kCentralGaussian:
          return std::string("CentralGaussian");
        default:
          return std::string("Exact");
      }
    });

TEST(BitsumRandomizerTest, CountsAndListsConsumeIdentically) {
  const BitsumConfig cfg = MustConfig(BitsumVariant::kThreeNB, 20, 0.5, 1e-6);
  Rng a(10);
  Rng b(10);
  for (int t = 0; t < 200; ++t) {
    const PayloadCounts counts = RandomizeBitCounts(cfg, t % 2, a);
    const std::vector<Payload> list = RandomizeBit(cfg, t % 2, b);
    ASSERT_EQ(CountPayloads(list), counts);
  }
}

TEST(BitsumMessagesTest, ExpectedPerUser) {
  EXPECT_EQ(
      ExpectedMessagesPerUser(MustConfig(BitsumVariant::kExact, 10, 1, 0), 0.3),
      1.0);
  const BitsumConfig cfg = MustConfig(BitsumVariant::kThreeNB, 50, 1.0, 1e-6);
  Rng rng(11);
  MeanVar acc;
  for (int t = 0; t < 100000; ++t) {
    acc.Add(static_cast<double>(RandomizeBitCounts(cfg, t % 2, rng).total()));
  }
  EXPECT_LE(std::abs(acc.mean() - ExpectedMessagesPerUser(cfg, 0.5)),
            4.0 * acc.se());
}

}  // namespace
}  // namespace shuffled_kde

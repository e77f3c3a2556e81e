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

#include "shuffled_kde/shuffle_net.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "gtest/gtest.h"

namespace shuffled_kde {
namespace {

std::vector<Envelope> RandomEnvelopes(int count, int instances, int q,
                                      std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick_i(0, instances - 1);
  std::uniform_int_distribution<int> pick_j(0, q - 1);
  std::vector<Envelope> out;
  for (int k = 0; k < count; ++k) {
    out.push_back(Envelope{pick_i(rng), pick_j(rng),
                           static_cast<Payload>(rng() % 2 ? 1 : -1)});
  }
  return out;
}

TEST(ShuffleTest, EmptyAndSingle) {
  Rng rng(1);
  EXPECT_TRUE(Shuffle({}, rng).empty());
  const std::vector<Envelope> one = {{2, 3, -1}};
  EXPECT_EQ(Shuffle(one, rng), one);
}

TEST(ShuffleTest, PreservesMultiset) {
  std::mt19937_64 gen(2);
  std::vector<Envelope> in = RandomEnvelopes(500, 7, 3, gen);
  Rng rng(3);
  std::vector<Envelope> out = Shuffle(in, rng);
  std::sort(in.begin(), in.end());
  std::sort(out.begin(), out.end());
  EXPECT_EQ(in, out);
}

TEST(ShuffleTest, OrderingsUniform) {
  const std::vector<Envelope> in = {{0, 0, 1}, {1, 0, 1}, {2, 0, 1}};
  const int trials = 60000;
  Rng rng(4);
  std::map<std::vector<Envelope>, int> seen;
  for (int t = 0; t < trials; ++t) ++seen[Shuffle(in, rng)];
  ASSERT_EQ(seen.size(), 6u);
  const double p = 1.0 / 6.0;
  const double se = std::sqrt(p * (1 - p) / trials);
  for (const auto& [order, count] : seen) {
    EXPECT_LE(std::abs(count / static_cast<double>(trials) - p), 4 * se);
  }
}

TEST(RouteTest, SingleTagFillsOneCell) {
  const std::vector<Envelope> in(10, Envelope{0, 0, 1});
  absl::StatusOr<std::vector<PayloadCounts>> cells = Route(in, 3, 2);
  ASSERT_TRUE(cells.ok());
  ASSERT_EQ(cells->size(), 6u);
  EXPECT_EQ((*cells)[0], (PayloadCounts{10, 0}));
  for (size_t k = 1; k < cells->size(); ++k) {
    EXPECT_EQ((*cells)[k].total(), 0);
  }
}

TEST(RouteTest, RoundRobinTags) {
  const int instances = 4;
  const int q = 3;
  const int per_cell = 5;
  std::vector<Envelope> in;
  for (int k = 0; k < per_cell; ++k) {
    for (int i = 0; i < instances; ++i) {
      for (int j = 0; j < q; ++j) in.push_back({i, j, -1});
    }
  }
  absl::StatusOr<std::vector<PayloadCounts>> cells = Route(in, instances, q);
  ASSERT_TRUE(cells.ok());
  for (const PayloadCounts& c : *cells) {
    EXPECT_EQ(c, (PayloadCounts{0, per_cell}));
  }
}

TEST(RouteTest, MatchesBruteForceFilter) {
  std::mt19937_64 gen(5);
  const int instances = 6;
  const int q = 4;
  const std::vector<Envelope> in = RandomEnvelopes(2000, instances, q, gen);
  Rng rng(6);
  const std::vector<Envelope> shuffled = Shuffle(in, rng);
  absl::StatusOr<std::vector<PayloadCounts>> cells =
      Route(shuffled, instances, q);
  ASSERT_TRUE(cells.ok());
  for (int i = 0; i < instances; ++i) {
    for (int j = 0; j < q; ++j) {
      int64_t plus = 0;
      int64_t minus = 0;
      for (const Envelope& e : in) {
        if (e.i == i && e.j == j) (e.payload > 0 ? plus : minus)++;
      }
      EXPECT_EQ((*cells)[i * q + j], (PayloadCounts{plus, minus}));
    }
  }
}

TEST(RouteTest, TagOutOfRange) {
  for (const Envelope& bad : {Envelope{3, 0, 1}, Envelope{0, 2, 1},
                              Envelope{-1, 0, 1}, Envelope{0, -1, -1}}) {
    const std::vector<Envelope> in = {{0, 0, 1}, bad};
    absl::StatusOr<std::vector<PayloadCounts>> cells = Route(in, 3, 2);
    ASSERT_FALSE(cells.ok());
    EXPECT_EQ(cells.status().code(), absl::StatusCode::kInvalidArgument);
    EXPECT_NE(cells.status().message().find("TagOutOfRange"),
              std::string::npos);
  }
}

TEST(MeterTest, BitsPerMessage) {
  EXPECT_EQ(BitsPerMessage(768, 1), 11);
  EXPECT_EQ(BitsPerMessage(32, 1), 6);
  EXPECT_EQ(BitsPerMessage(1, 1), 1);
  EXPECT_EQ(BitsPerMessage(2, 1), 2);
  EXPECT_EQ(BitsPerMessage(4, 1), 3);
  EXPECT_EQ(BitsPerMessage(5, 1), 4);
  EXPECT_EQ(BitsPerMessage(16, 48), 11);
}

TEST(MeterTest, CountsPerSender) {
  const std::vector<std::vector<Envelope>> by_sender = {
      {{0, 0, 1}}, {}, {{0, 0, 1}, {1, 0, -1}, {1, 0, 1}}};
  const TranscriptMeter meter = Meter(by_sender, 2, 1);
  EXPECT_EQ(meter.per_user_message_counts, (std::vector<int64_t>{1, 0, 3}));
  EXPECT_EQ(meter.bits_per_message, 2);
  EXPECT_EQ(meter.total_messages(), 4);
  EXPECT_EQ(meter.total_bits, 8);
  EXPECT_DOUBLE_EQ(meter.mean_messages(), 4.0 / 3.0);
}

TEST(MeterTest, SingleInstanceSingleMessage) {
  const std::vector<std::vector<Envelope>> by_sender = {{{0, 0, 1}},
                                                        {{0, 0, -1}}};
  const TranscriptMeter meter = Meter(by_sender, 1, 1);
  EXPECT_EQ(meter.per_user_message_counts, (std::vector<int64_t>{1, 1}));
  EXPECT_EQ(meter.bits_per_message, 1);
  EXPECT_EQ(meter.total_bits, 2);
}

TEST(TranscriptTest, WritesTagAndBit) {
  const std::vector<Envelope> in = {{0, 1, 1}, {2, 0, -1}};
  std::ostringstream out;
  WriteTranscript(out, in, 3);
  EXPECT_EQ(out.str(), "1,1\n6,0\n");
}

}  // namespace
}  // namespace shuffled_kde

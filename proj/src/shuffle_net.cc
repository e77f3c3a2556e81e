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

#include <bit>
#include <numeric>
#include <random>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"

namespace shuffled_kde {

int BitsPerMessage(int64_t instances, int q) {
  const uint64_t cells = static_cast<uint64_t>(instances) * q;
  // ceil(log2(cells)) == bit width of (cells - 1); 0 for a single cell.
  const int tag_bits = cells <= 1 ? 0 : std::bit_width(cells - 1);
  return tag_bits + 1;
}

int64_t TranscriptMeter::total_messages() const {
  return std::accumulate(per_user_message_counts.begin(),
                         per_user_message_counts.end(), int64_t{0});
}

double TranscriptMeter::mean_messages() const {
  if (per_user_message_counts.empty()) return 0.0;
  return static_cast<double>(total_messages()) /
         static_cast<double>(per_user_message_counts.size());
}

std::vector<Envelope> Shuffle(std::vector<Envelope> envelopes,
                              Rng& shuffler_rng) {
  for (size_t k = envelopes.size(); k > 1; --k) {
    std::uniform_int_distribution<size_t> pick(0, k - 1);
    std::swap(envelopes[k - 1], envelopes[pick(shuffler_rng)]);
  }
  return envelopes;
}

absl::StatusOr<std::vector<PayloadCounts>> Route(
    std::span<const Envelope> permuted, int instances, int q) {
  std::vector<PayloadCounts> cells(static_cast<size_t>(instances) * q);
  for (const Envelope& e : permuted) {
    if (e.i < 0 || e.i >= instances || e.j < 0 || e.j >= q) {
      return absl::InvalidArgumentError(
          absl::StrFormat("TagOutOfRange: tag (%d, %d) outside [%d] x [%d]",
                          e.i, e.j, instances, q));
    }
    PayloadCounts& cell = cells[TagIndex(e, q)];
    if (e.payload > 0) {
      ++cell.plus;
    } else {
      ++cell.minus;
    }
  }
  return cells;
}

TranscriptMeter MeterFromCounts(std::vector<int64_t> per_user_counts,
                                int instances, int q) {
  TranscriptMeter meter;
  meter.per_user_message_counts = std::move(per_user_counts);
  meter.bits_per_message = BitsPerMessage(instances, q);
  meter.total_bits = meter.bits_per_message * meter.total_messages();
  return meter;
}

TranscriptMeter Meter(std::span<const std::vector<Envelope>> by_sender,
                      int instances, int q) {
  std::vector<int64_t> counts;
  counts.reserve(by_sender.size());
  for (const auto& sent : by_sender) {
    counts.push_back(static_cast<int64_t>(sent.size()));
  }
  return MeterFromCounts(std::move(counts), instances, q);
}

void WriteTranscript(std::ostream& out, std::span<const Envelope> envelopes,
                     int q) {
  for (const Envelope& e : envelopes) {
    out << TagIndex(e, q) << ',' << EncodePayloadBit(e.payload) << '\n';
  }
}

}  // namespace shuffled_kde

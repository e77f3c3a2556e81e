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

// Simulated trusted shuffler. Users send tagged envelopes; the shuffler strips
// sender identity by emitting a uniformly random permutation, and the
// analyzer routes payloads back into per-instance cells by tag.

#ifndef SHUFFLED_KDE_SHUFFLE_NET_H_
#define SHUFFLED_KDE_SHUFFLE_NET_H_

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "shuffled_kde/bitsum.h"
#include "shuffled_kde/random.h"

namespace shuffled_kde {

// Payload tagged with its protocol instance (i, j), i in [0, I), j in [0, Q).
struct Envelope {
  int32_t i = 0;
  int32_t j = 0;
  Payload payload = 1;

  friend bool operator==(const Envelope&, const Envelope&) = default;
  friend auto operator<=>(const Envelope&, const Envelope&) = default;
};

// Flattened tag index i * Q + j.
inline int64_t TagIndex(const Envelope& e, int q) {
  return static_cast<int64_t>(e.i) * q + e.j;
}

// ceil(log2(I * Q)) tag bits plus one payload bit.
int BitsPerMessage(int64_t instances, int q);

struct TranscriptMeter {
  std::vector<int64_t> per_user_message_counts;
  int bits_per_message = 1;
  int64_t total_bits = 0;

  int64_t total_messages() const;
  double mean_messages() const;
};

// Fisher-Yates shuffle driven by the shuffler's own stream.
std::vector<Envelope> Shuffle(std::vector<Envelope> envelopes,
                              Rng& shuffler_rng);

// Partitions payloads into I * Q cells, indexed i * Q + j.
// InvalidArgument ("TagOutOfRange") for tags outside [I] x [Q].
absl::StatusOr<std::vector<PayloadCounts>> Route(
    std::span<const Envelope> permuted, int instances, int q);

// Observes the user -> shuffler leg. Never alters the envelopes.
TranscriptMeter Meter(std::span<const std::vector<Envelope>> by_sender,
                      int instances, int q);
TranscriptMeter MeterFromCounts(std::vector<int64_t> per_user_counts,
                                int instances, int q);

// Audit dump: one `tag_index,payload_bit` line per envelope, in order.
void WriteTranscript(std::ostream& out, std::span<const Envelope> envelopes,
                     int q);

}  // namespace shuffled_kde

#endif  // SHUFFLED_KDE_SHUFFLE_NET_H_

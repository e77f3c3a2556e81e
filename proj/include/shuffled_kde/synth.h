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

// Synthetic spherical Gaussian mixtures on the unit sphere.

#ifndef SHUFFLED_KDE_SYNTH_H_
#define SHUFFLED_KDE_SYNTH_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "shuffled_kde/classify.h"
#include "shuffled_kde/points.h"
#include "shuffled_kde/random.h"

namespace shuffled_kde {

inline constexpr int kMaxCenterAttempts = 10000;

struct MixtureOptions {
  int classes = 2;
  int per_class = 100;
  int dim = 2;
  // Minimum pairwise angle between centers, in radians.
  double separation = 0.0;
  // Points are normalize(center + spread / sqrt(d) * N(0, I_d)).
  double spread = 0.5;
  // Held-out points per class, drawn after the training points.
  int test_per_class = 0;
  uint64_t seed = 0;
};

struct Mixture {
  Points centers;
  LabeledDataset train;
  std::optional<LabeledDataset> test;
};

// Centers are drawn uniformly on the sphere and rejected while they violate
// the separation constraint. FailedPrecondition ("InfeasibleSeparation")
// after kMaxCenterAttempts rejected candidates. Rows are grouped by class.
absl::StatusOr<Mixture> GenerateMixture(const MixtureOptions& options);

// Uniform draw from the unit sphere in R^dim.
std::vector<double> UniformOnSphere(int dim, Rng& rng);

// JSON record of the generation parameters and centers.
std::string MixtureMetadataJson(const MixtureOptions& options,
                                const Points& centers);

}  // namespace shuffled_kde

#endif  // SHUFFLED_KDE_SYNTH_H_

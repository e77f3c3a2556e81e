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

#include "shuffled_kde/synth.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "absl/strings/str_cat.h"
#include "shuffled_kde/json_text.h"
#include "shuffled_kde/random.h"

namespace shuffled_kde {

namespace {

void Normalize(std::vector<double>& v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double inv = 1.0 / std::sqrt(sq);
  for (double& x : v) x *= inv;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

absl::StatusOr<LabeledDataset> DrawPoints(const MixtureOptions& o,
                                          const Points& centers, int count,
                                          Rng& rng) {
  const double scale = o.spread / std::sqrt(static_cast<double>(o.dim));
  Points points(o.dim);
  points.Reserve(static_cast<size_t>(count) * o.classes);
  std::vector<int> labels;
  std::vector<double> x(o.dim);
  for (int c = 0; c < o.classes; ++c) {
    for (int t = 0; t < count; ++t) {
      for (int k = 0; k < o.dim; ++k) {
        x[k] = centers[c][k] + scale * StandardNormal(rng);
      }
      Normalize(x);
      points.Append(x);
      labels.push_back(c);
    }
  }
  return LabeledDataset::Create(std::move(points), std::move(labels),
                                o.classes);
}

}  // namespace

std::vector<double> UniformOnSphere(int dim, Rng& rng) {
  std::vector<double> v(dim);
  double sq = 0.0;
  do {
    sq = 0.0;
    for (double& x : v) {
      x = StandardNormal(rng);
      sq += x * x;
    }
  } while (sq == 0.0);
  Normalize(v);
  return v;
}

absl::StatusOr<Mixture> GenerateMixture(const MixtureOptions& o) {
  if (o.classes < 2 || o.dim < 2 || o.per_class < 1 || o.test_per_class < 0 ||
      !(o.separation >= 0.0) || !(o.separation <= std::numbers::pi) ||
      !(o.spread >= 0.0) || !std::isfinite(o.spread)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "InvalidParam: need m >= 2, d >= 2, per-class >= 1, separation in "
        "[0, pi], spread >= 0; got m = ",
        o.classes, ", d = ", o.dim, ", per-class = ", o.per_class,
        ", separation = ", o.separation, ", spread = ", o.spread));
  }
  const double max_cos = std::cos(o.separation);

  Rng center_rng(DeriveSeed(o.seed, "centers"));
  Points centers(o.dim);
  int rejected = 0;
  while (static_cast<int>(centers.size()) < o.classes) {
    std::vector<double> cand = UniformOnSphere(o.dim, center_rng);
    bool ok = true;
    for (size_t c = 0; c < centers.size() && ok; ++c) {
      ok = Dot(cand, centers[c]) <= max_cos;
    }
    if (ok) {
      centers.Append(cand);
    } else if (++rejected >= kMaxCenterAttempts) {
      return absl::FailedPreconditionError(absl::StrCat(
          "InfeasibleSeparation: could not place ", o.classes,
          " centers at pairwise angle >= ", o.separation, " in d = ", o.dim,
          " within ", kMaxCenterAttempts, " attempts"));
    }
  }

  Rng train_rng(DeriveSeed(o.seed, "train"));
  absl::StatusOr<LabeledDataset> train =
      DrawPoints(o, centers, o.per_class, train_rng);
  if (!train.ok()) return train.status();
  Mixture out{centers, *std::move(train), std::nullopt};
  if (o.test_per_class > 0) {
    Rng test_rng(DeriveSeed(o.seed, "test"));
    absl::StatusOr<LabeledDataset> test =
        DrawPoints(o, centers, o.test_per_class, test_rng);
    if (!test.ok()) return test.status();
    out.test = *std::move(test);
  }
  return out;
}

std::string MixtureMetadataJson(const MixtureOptions& o,
                                const Points& centers) {
  std::string out = "{\n";
  absl::StrAppend(&out, "  \"generator\": \"spherical-gaussian-mixture\",\n");
  absl::StrAppend(&out, "  \"m\": ", o.classes, ",\n");
  absl::StrAppend(&out, "  \"per_class\": ", o.per_class, ",\n");
  absl::StrAppend(&out, "  \"test_per_class\": ", o.test_per_class, ",\n");
  absl::StrAppend(&out, "  \"d\": ", o.dim, ",\n");
  absl::StrAppend(&out, "  \"separation\": ", FormatDouble(o.separation),
                  ",\n");
  absl::StrAppend(&out, "  \"spread\": ", FormatDouble(o.spread), ",\n");
  absl::StrAppend(&out, "  \"seed\": ", o.seed, ",\n");
  out += "  \"centers\": [";
  for (size_t c = 0; c < centers.size(); ++c) {
    if (c > 0) out += ",";
    absl::StrAppend(&out, "\n    ", JsonDoubleArray(centers[c]));
  }
  out += "\n  ]\n}\n";
  return out;
}

}  // namespace shuffled_kde

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

#ifndef SHUFFLED_KDE_POINTS_H_
#define SHUFFLED_KDE_POINTS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "absl/status/status.h"

namespace shuffled_kde {

// Row-major collection of points in R^dim.
class Points {
 public:
  Points() = default;
  explicit Points(int dim) : dim_(dim) {}
  Points(int dim, std::vector<double> data)
      : dim_(dim), data_(std::move(data)) {}

  int dim() const { return dim_; }
  size_t size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  bool empty() const { return size() == 0; }

  std::span<const double> operator[](size_t k) const {
    return {data_.data() + k * dim_, static_cast<size_t>(dim_)};
  }
  std::span<double> mutable_row(size_t k) {
    return {data_.data() + k * dim_, static_cast<size_t>(dim_)};
  }

  void Append(std::span<const double> row) {
    data_.insert(data_.end(), row.begin(), row.end());
  }
  void Reserve(size_t rows) { data_.reserve(rows * dim_); }

  const std::vector<double>& data() const { return data_; }

  // InvalidArgument naming the first row whose norm is off by more than the
  // unit-norm tolerance.
  absl::Status CheckAllUnitNorm() const;

 private:
  int dim_ = 0;
  std::vector<double> data_;
};

}  // namespace shuffled_kde

#endif  // SHUFFLED_KDE_POINTS_H_

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

#include "shuffled_kde/points.h"

#include "absl/strings/str_cat.h"
#include "shuffled_kde/lsq.h"

namespace shuffled_kde {

absl::Status Points::CheckAllUnitNorm() const {
  for (size_t k = 0; k < size(); ++k) {
    if (absl::Status s = CheckUnitNorm((*this)[k]); !s.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("row ", k + 1, ": ", s.message()));
    }
  }
  return absl::OkStatus();
}

}  // namespace shuffled_kde

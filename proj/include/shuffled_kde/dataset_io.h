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

// Text formats shared with external data preparation.
//
// Dataset:     line 1 `n d m`, then n lines of d floats and a 1-based label.
// Vocabulary:  one `term x_1 ... x_d` line per term.
//
// Tokens are separated by spaces or tabs. Parsing is strict: wrong token
// counts, trailing garbage, non-finite values, out-of-range labels and
// non-unit rows are all rejected with the offending line number.

#ifndef SHUFFLED_KDE_DATASET_IO_H_
#define SHUFFLED_KDE_DATASET_IO_H_

#include <optional>
#include <string>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "shuffled_kde/classify.h"

namespace shuffled_kde {

absl::StatusOr<LabeledDataset> ParseDataset(const std::string& text);
std::string FormatDataset(const LabeledDataset& dataset);

// `expected_dim`, when set, must match the width of every row.
absl::StatusOr<Vocabulary> ParseVocabulary(
    const std::string& text, std::optional<int> expected_dim = std::nullopt);
std::string FormatVocabulary(const Vocabulary& vocab);

absl::StatusOr<std::string> ReadFile(const std::string& path);

// Writes to a temporary file in the target directory, then renames it over
// `path`.
absl::Status WriteFileAtomic(const std::string& path,
                             const std::string& contents);

absl::StatusOr<LabeledDataset> ReadDatasetFile(const std::string& path);
absl::StatusOr<Vocabulary> ReadVocabularyFile(
    const std::string& path, std::optional<int> expected_dim = std::nullopt);

}  // namespace shuffled_kde

#endif  // SHUFFLED_KDE_DATASET_IO_H_

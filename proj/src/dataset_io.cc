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

#include "shuffled_kde/dataset_io.h"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>
#include <vector>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "shuffled_kde/json_text.h"

namespace shuffled_kde {

namespace {

struct Line {
  int number;  // 1-based
  std::vector<absl::string_view> tokens;
};

// Non-empty lines of `text`, tokenized. A trailing '\r' is tolerated.
std::vector<Line> Tokenize(const std::string& text) {
  std::vector<Line> lines;
  int number = 0;
  for (absl::string_view raw : absl::StrSplit(text, '\n')) {
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    std::vector<absl::string_view> tokens =
        absl::StrSplit(raw, absl::ByAnyChar(" \t"), absl::SkipEmpty());
    if (tokens.empty()) continue;
    lines.push_back({number, std::move(tokens)});
  }
  return lines;
}

absl::Status LineError(int number, absl::string_view what) {
  return absl::InvalidArgumentError(absl::StrCat("line ", number, ": ", what));
}

absl::StatusOr<double> ParseFinite(const Line& line, absl::string_view token) {
  double v = 0.0;
  if (!absl::SimpleAtod(token, &v) || !std::isfinite(v)) {
    return LineError(line.number,
                     absl::StrCat("not a finite number: '", token, "'"));
  }
  return v;
}

absl::StatusOr<int64_t> ParseInt(const Line& line, absl::string_view token) {
  int64_t v = 0;
  if (!absl::SimpleAtoi(token, &v)) {
    return LineError(line.number,
                     absl::StrCat("not an integer: '", token, "'"));
  }
  return v;
}

void AppendRow(std::string& out, std::span<const double> row) {
  for (size_t k = 0; k < row.size(); ++k) {
    if (k > 0) out += ' ';
    out += FormatDouble(row[k]);
  }
}

}  // namespace

absl::StatusOr<LabeledDataset> ParseDataset(const std::string& text) {
  const std::vector<Line> lines = Tokenize(text);
  if (lines.empty()) return absl::InvalidArgumentError("empty dataset file");
  const Line& header = lines.front();
  if (header.tokens.size() != 3) {
    return LineError(header.number, "header must be `n d m`");
  }
  int64_t fields[3];
  for (int k = 0; k < 3; ++k) {
    absl::StatusOr<int64_t> v = ParseInt(header, header.tokens[k]);
    if (!v.ok()) return v.status();
    fields[k] = *v;
  }
  const int64_t n = fields[0];
  const int64_t d = fields[1];
  const int64_t m = fields[2];
  if (n < 1 || d < 1 || m < 2 || d > (1 << 20) || m > (1 << 20)) {
    return LineError(header.number, absl::StrCat("invalid header values n = ",
                                                 n, ", d = ", d, ", m = ", m));
  }
  if (static_cast<int64_t>(lines.size()) - 1 != n) {
    return absl::InvalidArgumentError(absl::StrCat(
        "header declares ", n, " rows, file has ", lines.size() - 1));
  }

  Points vectors(static_cast<int>(d));
  vectors.Reserve(n);
  std::vector<int> labels;
  labels.reserve(n);
  std::vector<double> row(d);
  for (size_t r = 1; r < lines.size(); ++r) {
    const Line& line = lines[r];
    if (static_cast<int64_t>(line.tokens.size()) != d + 1) {
      return LineError(line.number,
                       absl::StrCat("expected ", d + 1, " fields, got ",
                                    line.tokens.size()));
    }
    for (int64_t k = 0; k < d; ++k) {
      absl::StatusOr<double> v = ParseFinite(line, line.tokens[k]);
      if (!v.ok()) return v.status();
      row[k] = *v;
    }
    absl::StatusOr<int64_t> label = ParseInt(line, line.tokens[d]);
    if (!label.ok()) return label.status();
    if (*label < 1 || *label > m) {
      return LineError(line.number,
                       absl::StrCat("label ", *label, " outside [1, ", m, "]"));
    }
    if (absl::Status s = CheckUnitNorm(row); !s.ok()) {
      return LineError(line.number, s.message());
    }
    vectors.Append(row);
    labels.push_back(static_cast<int>(*label - 1));
  }
  return LabeledDataset::Create(std::move(vectors), std::move(labels),
                                static_cast<int>(m));
}

std::string FormatDataset(const LabeledDataset& dataset) {
  std::string out = absl::StrCat(dataset.size(), " ", dataset.vectors.dim(),
                                 " ", dataset.m, "\n");
  for (size_t r = 0; r < dataset.size(); ++r) {
    AppendRow(out, dataset.vectors[r]);
    absl::StrAppend(&out, " ", dataset.labels[r] + 1, "\n");
  }
  return out;
}

absl::StatusOr<Vocabulary> ParseVocabulary(const std::string& text,
                                           std::optional<int> expected_dim) {
  const std::vector<Line> lines = Tokenize(text);
  if (lines.empty()) return absl::InvalidArgumentError("empty vocabulary");
  const int d = expected_dim.has_value()
                    ? *expected_dim
                    : static_cast<int>(lines.front().tokens.size()) - 1;
  if (d < 1) return LineError(lines.front().number, "term has no vector");

  std::vector<std::string> terms;
  Points vectors(d);
  std::vector<double> row(d);
  std::unordered_set<std::string> seen;
  for (const Line& line : lines) {
    if (static_cast<int>(line.tokens.size()) != d + 1) {
      return LineError(line.number,
                       absl::StrCat("expected a term and ", d, " floats, got ",
                                    line.tokens.size(), " fields"));
    }
    std::string term(line.tokens[0]);
    if (!seen.insert(term).second) {
      return LineError(line.number,
                       absl::StrCat("duplicate term '", term, "'"));
    }
    for (int k = 0; k < d; ++k) {
      absl::StatusOr<double> v = ParseFinite(line, line.tokens[k + 1]);
      if (!v.ok()) return v.status();
      row[k] = *v;
    }
    if (absl::Status s = CheckUnitNorm(row); !s.ok()) {
      return LineError(line.number, s.message());
    }
    terms.push_back(std::move(term));
    vectors.Append(row);
  }
  return Vocabulary::Create(std::move(terms), std::move(vectors));
}

std::string FormatVocabulary(const Vocabulary& vocab) {
  std::string out;
  for (size_t r = 0; r < vocab.terms.size(); ++r) {
    absl::StrAppend(&out, vocab.terms[r], " ");
    AppendRow(out, vocab.vectors[r]);
    out += '\n';
  }
  return out;
}

absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) return absl::DataLossError(absl::StrCat("cannot read ", path));
  return buf.str();
}

absl::Status WriteFileAtomic(const std::string& path,
                             const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp =
      target.parent_path() /
      absl::StrCat(".", target.filename().string(), ".tmp.", ::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      return absl::PermissionDeniedError(
          absl::StrCat("cannot write ", tmp.string()));
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      return absl::DataLossError(absl::StrCat("short write to ", tmp.string()));
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    return absl::InternalError(
        absl::StrCat("rename to ", path, " failed: ", ec.message()));
  }
  return absl::OkStatus();
}

absl::StatusOr<LabeledDataset> ReadDatasetFile(const std::string& path) {
  absl::StatusOr<std::string> text = ReadFile(path);
  if (!text.ok()) return text.status();
  absl::StatusOr<LabeledDataset> ds = ParseDataset(*text);
  if (!ds.ok()) {
    return absl::Status(ds.status().code(),
                        absl::StrCat(path, ": ", ds.status().message()));
  }
  return ds;
}

absl::StatusOr<Vocabulary> ReadVocabularyFile(const std::string& path,
                                              std::optional<int> expected_dim) {
  absl::StatusOr<std::string> text = ReadFile(path);
  if (!text.ok()) return text.status();
  absl::StatusOr<Vocabulary> vocab = ParseVocabulary(*text, expected_dim);
  if (!vocab.ok()) {
    return absl::Status(vocab.status().code(),
                        absl::StrCat(path, ": ", vocab.status().message()));
  }
  return vocab;
}

}  // namespace shuffled_kde

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

// Helpers for emitting JSON text with fixed number formatting. Parsing goes
// through nlohmann::json.

#ifndef SHUFFLED_KDE_JSON_TEXT_H_
#define SHUFFLED_KDE_JSON_TEXT_H_

#include <span>
#include <string>
#include <string_view>

namespace shuffled_kde {

// 17 significant digits, enough for an exact round trip of any double.
std::string FormatDouble(double v);

// Quoted, escaped JSON string literal.
std::string JsonQuote(std::string_view s);

std::string JsonDoubleArray(std::span<const double> values);

}  // namespace shuffled_kde

#endif  // SHUFFLED_KDE_JSON_TEXT_H_

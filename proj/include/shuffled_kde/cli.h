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

// Command-line frontend. Every subcommand is deterministic given --seed and
// writes its outputs atomically into --out.
//
// Exit codes: 0 success, 1 I/O failure, 2 validation error, 3 privacy target
// infeasible.

#ifndef SHUFFLED_KDE_CLI_H_
#define SHUFFLED_KDE_CLI_H_

#include <ostream>

#include "absl/status/status.h"

namespace shuffled_kde {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitInfeasible = 3;

int ExitCodeFor(const absl::Status& status);

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace shuffled_kde

#endif  // SHUFFLED_KDE_CLI_H_

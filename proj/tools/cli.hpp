// Copyright 2026 The gridtb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <iosfwd>
#include <string>
#include <vector>

namespace gridtb::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kRuntime = 1;
inline constexpr int kUsage = 2;

/// Runs the command line. Output goes to `out`, diagnostics to `err`.
/// `stop` ends long-running subcommands early (signals set it).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, std::atomic<bool>& stop);

} // namespace gridtb::cli

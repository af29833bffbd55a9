// Copyright 2026 The mrtf Authors. All Rights Reserved.
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

// Command-line front end: synth, split, fit, predict, eval, gridsearch, bench.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
// Every successful command prints one line of JSON to `out` (an FNV-1a hash
// of its inputs, the seed where one applies, and the key results) and writes
// its artifacts under --out.

#ifndef MRTF_CLI_H_
#define MRTF_CLI_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace mrtf {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

inline constexpr std::uint64_t kDefaultSeed = 42;

// `args` excludes the program name.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);
int RunCli(int argc, char** argv);

// 64-bit FNV-1a, continuing from `hash`.
std::uint64_t Fnv1a(std::string_view bytes,
                    std::uint64_t hash = 0xcbf29ce484222325ULL);

}  // namespace mrtf

#endif  // MRTF_CLI_H_

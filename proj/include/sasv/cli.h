// Copyright (c) 2026 sasv-fusion authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SASV_CLI_H_
#define SASV_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace sasv {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;  // bad flags or flag combinations
inline constexpr int kExitData = 3;   // unreadable or inconsistent inputs

// Entry point of the `sasv` tool; args[0] is the program name.
// Subcommands: synth, calibrate, fuse, train, eval, hist.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace sasv

#endif  // SASV_CLI_H_

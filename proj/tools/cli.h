// Copyright 2026 The persianlm Authors.
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

#ifndef PERSIANLM_TOOLS_CLI_H_
#define PERSIANLM_TOOLS_CLI_H_

#include <string>
#include <vector>

namespace persianlm {
namespace cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2 };

// Runs one invocation; args excludes the program name.
int RunCli(const std::vector<std::string> &args);

}  // namespace cli
}  // namespace persianlm

#endif  // PERSIANLM_TOOLS_CLI_H_

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

#ifndef PERSIANLM_TOOLS_MANIFEST_H_
#define PERSIANLM_TOOLS_MANIFEST_H_

#include <map>
#include <string>
#include <vector>

namespace persianlm {
namespace cli {

// Pipeline manifest, a line-oriented text file:
//
//   # comment
//   set <name> = <value>       variable, referenced later as ${name}
//   dir <path>                 directory created before the next steps
//   step <subcommand> <flags>  one CLI invocation
//
// Every ${name} must be set earlier in the file or by an override, and every
// step whose subcommand takes --seed must pass it.
struct Manifest {
  struct Step {
    size_t line;
    std::vector<std::string> args;
  };
  struct Directive {
    size_t line;
    bool is_dir;  // otherwise a step
    std::string dir;
    Step step;
  };
  std::vector<Directive> directives;
  std::map<std::string, std::string> variables;
};

// Throws ConfigError naming the offending line.
Manifest ParseManifest(const std::string &text,
                       const std::map<std::string, std::string> &overrides);

// Executes the directives in order; stops at the first failing step and
// returns its exit status.
int RunManifest(const std::string &path,
                const std::map<std::string, std::string> &overrides);

}  // namespace cli
}  // namespace persianlm

#endif  // PERSIANLM_TOOLS_MANIFEST_H_

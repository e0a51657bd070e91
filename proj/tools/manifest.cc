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

#include "manifest.h"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "cli.h"
#include "persianlm/errors.h"

namespace persianlm {
namespace cli {
namespace {

// Subcommands with a --seed flag.
const std::set<std::string> kSeeded = {"build-pretrain", "pretrain",
                                       "finetune-cls", "finetune-ner",
                                       "gen-synthetic"};

std::string Trim(const std::string &s) {
  const size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string Expand(const std::string &s,
                   const std::map<std::string, std::string> &vars,
                   size_t line) {
  std::string out;
  for (size_t i = 0; i < s.size();) {
    if (s.compare(i, 2, "${") == 0) {
      const size_t close = s.find('}', i + 2);
      if (close == std::string::npos) {
        throw ConfigError("manifest line " + std::to_string(line) +
                          ": unterminated ${");
      }
      const std::string name = s.substr(i + 2, close - i - 2);
      auto it = vars.find(name);
      if (it == vars.end()) {
        throw ConfigError("manifest line " + std::to_string(line) +
                          ": undeclared variable ${" + name + "}");
      }
      out += it->second;
      i = close + 1;
    } else {
      out += s[i++];
    }
  }
  return out;
}

}  // namespace

Manifest ParseManifest(const std::string &text,
                       const std::map<std::string, std::string> &overrides) {
  Manifest m;
  m.variables = overrides;
  std::istringstream in(text);
  std::string raw;
  size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = Trim(raw);
    if (s.empty() || s[0] == '#') continue;
    const size_t sp = s.find_first_of(" \t");
    const std::string keyword = s.substr(0, sp);
    const std::string rest = sp == std::string::npos ? "" : Trim(s.substr(sp));
    const std::string where = "manifest line " + std::to_string(line);
    if (keyword == "set") {
      const size_t eq = rest.find('=');
      if (eq == std::string::npos) throw ConfigError(where + ": expected set name = value");
      const std::string name = Trim(rest.substr(0, eq));
      if (name.empty()) throw ConfigError(where + ": empty variable name");
      // Overrides win over the file.
      if (!overrides.count(name)) {
        m.variables[name] = Expand(Trim(rest.substr(eq + 1)), m.variables, line);
      }
    } else if (keyword == "dir") {
      if (rest.empty()) throw ConfigError(where + ": dir needs a path");
      m.directives.push_back({line, true, Expand(rest, m.variables, line), {}});
    } else if (keyword == "step") {
      std::istringstream words(Expand(rest, m.variables, line));
      Manifest::Step step{line, {}};
      for (std::string w; words >> w;) step.args.push_back(w);
      if (step.args.empty()) throw ConfigError(where + ": step needs a subcommand");
      if (kSeeded.count(step.args[0])) {
        bool seeded = false;
        for (const auto &a : step.args) seeded |= a == "--seed" || a.rfind("--seed=", 0) == 0;
        if (!seeded) {
          throw ConfigError(where + ": " + step.args[0] +
                            " needs an explicit --seed");
        }
      }
      m.directives.push_back({line, false, "", std::move(step)});
    } else {
      throw ConfigError(where + ": unknown directive '" + keyword + "'");
    }
  }
  return m;
}

int RunManifest(const std::string &path,
                const std::map<std::string, std::string> &overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const Manifest m = ParseManifest(ss.str(), overrides);
  for (const auto &d : m.directives) {
    if (d.is_dir) {
      std::filesystem::create_directories(d.dir);
      continue;
    }
    const int status = RunCli(d.step.args);
    if (status != kOk) {
      std::cerr << "manifest line " << d.line << ": step " << d.step.args[0]
                << " exited with status " << status << "\n";
      return status;
    }
  }
  return kOk;
}

}  // namespace cli
}  // namespace persianlm

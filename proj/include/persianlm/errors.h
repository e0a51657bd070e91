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

#ifndef PERSIANLM_ERRORS_H_
#define PERSIANLM_ERRORS_H_

#include <stdexcept>
#include <string>

namespace persianlm {

// Base of every error raised by the library. The CLI maps IoError and
// DataError to exit status 2 and ConfigError to 1 when it stems from flags.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (bad records, invalid UTF-8, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace persianlm

#endif  // PERSIANLM_ERRORS_H_

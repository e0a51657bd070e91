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

#ifndef PERSIANLM_JSONL_H_
#define PERSIANLM_JSONL_H_

#include <cstdint>
#include <fstream>
#include <string>

#include "json.hpp"

namespace persianlm {

using Json = nlohmann::ordered_json;

// Streams a line-record file: one JSON object per line, blank lines skipped.
// Errors name the 1-based line number; invalid UTF-8 also names the byte
// offset within the file.
class LineRecordReader {
 public:
  explicit LineRecordReader(const std::string &path);

  // Returns false at end of file.
  bool Next(Json *record);

  size_t line_number() const { return line_number_; }
  const std::string &path() const { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
  size_t line_number_ = 0;
  uint64_t byte_offset_ = 0;
};

class LineRecordWriter {
 public:
  explicit LineRecordWriter(const std::string &path);
  void Write(const Json &record);
  void Close();

 private:
  std::string path_;
  std::ofstream out_;
};

// Serializes without escaping non-ASCII characters.
std::string ToLine(const Json &record);

// Returns the string field `key` or throws DataError naming `where`.
std::string RequireString(const Json &record, const std::string &key,
                          const std::string &where);

}  // namespace persianlm

#endif  // PERSIANLM_JSONL_H_

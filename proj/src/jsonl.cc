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

#include "persianlm/jsonl.h"

#include "persianlm/errors.h"
#include "persianlm/utf8.h"

namespace persianlm {

LineRecordReader::LineRecordReader(const std::string &path)
    : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw IoError("cannot open " + path);
}

bool LineRecordReader::Next(Json *record) {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_number_;
    const uint64_t start = byte_offset_;
    byte_offset_ += line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const size_t bad = utf8::FindInvalid(line);
    if (bad != std::string::npos) {
      throw DataError(path_ + ": invalid UTF-8 at byte offset " +
                      std::to_string(start + bad) + " (line " +
                      std::to_string(line_number_) + ")");
    }
    try {
      *record = Json::parse(line);
    } catch (const Json::parse_error &e) {
      throw DataError(path_ + ": malformed record at line " +
                      std::to_string(line_number_) + ": " + e.what());
    }
    if (!record->is_object()) {
      throw DataError(path_ + ": malformed record at line " +
                      std::to_string(line_number_) + ": not an object");
    }
    return true;
  }
  if (in_.bad()) throw IoError("read failure on " + path_);
  return false;
}

LineRecordWriter::LineRecordWriter(const std::string &path)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw IoError("cannot open " + path + " for writing");
}

void LineRecordWriter::Write(const Json &record) {
  out_ << ToLine(record) << '\n';
  if (!out_) throw IoError("write failure on " + path_);
}

void LineRecordWriter::Close() {
  out_.close();
  if (out_.fail()) throw IoError("close failure on " + path_);
}

std::string ToLine(const Json &record) {
  return record.dump(-1, ' ', false, Json::error_handler_t::strict);
}

std::string RequireString(const Json &record, const std::string &key,
                          const std::string &where) {
  auto it = record.find(key);
  if (it == record.end() || !it->is_string()) {
    throw DataError(where + ": missing string field \"" + key + "\"");
  }
  return it->get<std::string>();
}

}  // namespace persianlm

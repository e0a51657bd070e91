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

#ifndef PERSIANLM_SRC_BINARY_IO_H_
#define PERSIANLM_SRC_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>
#include <vector>

#include "persianlm/errors.h"

namespace persianlm {
namespace binary {

static_assert(std::endian::native == std::endian::little,
              "file formats assume a little-endian host");

// Appends the raw little-endian bytes of a trivially copyable value.
template <typename T>
void Put(std::string *buf, const T &value) {
  static_assert(std::is_trivially_copyable_v<T>);
  const auto *p = reinterpret_cast<const char *>(&value);
  buf->append(p, sizeof(T));
}

template <typename T>
void PutArray(std::string *buf, const T *data, size_t n) {
  buf->append(reinterpret_cast<const char *>(data), n * sizeof(T));
}

inline void PutString(std::string *buf, const std::string &s) {
  Put<uint32_t>(buf, static_cast<uint32_t>(s.size()));
  buf->append(s);
}

// Bounds-checked cursor over a byte buffer.
class Cursor {
 public:
  Cursor(const char *data, size_t size, std::string what)
      : data_(data), size_(size), what_(std::move(what)) {}

  template <typename T>
  T Get() {
    T value;
    Need(sizeof(T));
    std::memcpy(&value, data_ + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  template <typename T>
  void GetArray(T *out, size_t n) {
    Need(n * sizeof(T));
    std::memcpy(out, data_ + pos_, n * sizeof(T));
    pos_ += n * sizeof(T);
  }

  std::string GetString() {
    const auto n = Get<uint32_t>();
    Need(n);
    std::string s(data_ + pos_, n);
    pos_ += n;
    return s;
  }

  size_t remaining() const { return size_ - pos_; }

 private:
  void Need(size_t n) const {
    if (size_ - pos_ < n) throw DataError(what_ + ": unexpected end of data");
  }

  const char *data_;
  size_t size_;
  size_t pos_ = 0;
  std::string what_;
};

}  // namespace binary
}  // namespace persianlm

#endif  // PERSIANLM_SRC_BINARY_IO_H_

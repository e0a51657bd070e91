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

#ifndef PERSIANLM_RANDOM_H_
#define PERSIANLM_RANDOM_H_

#include <cstdint>
#include <random>
#include <vector>

namespace persianlm {

// Seeded random source whose draws are identical on every platform. The
// standard distributions are implementation-defined, so bounded integers,
// uniforms and normals are derived here from the raw 64-bit engine output.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform integer in [0, n). n must be > 0.
  uint64_t Below(uint64_t n);

  // Uniform double in [0, 1) with 53 random bits.
  double Uniform();

  double Normal();

  // Normal(0, stddev) resampled until it lies within two deviations.
  double TruncatedNormal(double stddev);

  template <typename T>
  void Shuffle(std::vector<T> *items) {
    for (size_t i = items->size(); i > 1; --i) {
      const size_t j = Below(i);
      std::swap((*items)[i - 1], (*items)[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Mixes a base seed with a stream index so independent work items (pairs,
// steps, epochs) draw from unrelated sequences.
uint64_t DeriveSeed(uint64_t seed, uint64_t stream);

}  // namespace persianlm

#endif  // PERSIANLM_RANDOM_H_

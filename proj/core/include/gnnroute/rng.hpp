// Copyright 2026 The gnnroute Authors
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

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gnnroute {

/// Deterministic random stream. All randomness in the library goes through
/// this wrapper so that results are reproducible for a given seed regardless
/// of platform or standard-library version (std distributions are
/// implementation-defined, so we roll the few draws we need by hand).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Uniform index in [0, n). n must be > 0. Unbiased via rejection.
  std::size_t uniform_index(std::size_t n);

  /// Uniform integer in [lo, hi], inclusive.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(uniform_index(static_cast<std::size_t>(hi - lo) + 1));
  }

  double uniform_real(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 gen_;
};

/// Stable 64-bit seed derivation: hash of (master, tag, index). Episode i's
/// stream is independent of whether episodes < i ran, which keeps parallel
/// experiment sweeps reproducible.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t index);

}  // namespace gnnroute

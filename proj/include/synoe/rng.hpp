// Copyright 2026 The SynOE Authors
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

#ifndef SYNOE_RNG_HPP_
#define SYNOE_RNG_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace synoe {

/// SplitMix64 finalizer.
std::uint64_t Mix64(std::uint64_t x);
/// FNV-1a over the bytes of `s`; stable across platforms and runs.
std::uint64_t Fnv1a64(std::string_view s);

/// Seeded generator with platform-independent draws.
///
/// std::mt19937_64 output is fully specified by the standard, but the
/// standard distributions are not, so all bounded draws are implemented here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for `key` under `seed` (e.g. one per image id), so
  /// results do not depend on processing order.
  static Rng Derive(std::uint64_t seed, std::uint64_t key) {
    return Rng(Mix64(seed ^ Mix64(key + 0x632be59bd9b4e019ULL)));
  }

  std::uint64_t next() { return engine_(); }
  /// Uniform integer in [0, n); n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);
  /// Uniform real in [0, 1) with 53 random bits.
  double uniform01();
  /// Draws an index with probability proportional to `weights`.
  std::size_t weighted_index(std::span<const double> weights);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace synoe

#endif  // SYNOE_RNG_HPP_

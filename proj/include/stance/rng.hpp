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
#include <initializer_list>
#include <string_view>
#include <vector>

namespace stance {

// Everything seeded in this project goes through SplitMix64 rather than
// <random>: the standard shuffles and distributions are not bit-stable
// across standard library implementations, and the determinism contracts
// here are cross-platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform integer in [0, bound), bound >= 1. Rejection sampling keeps the
  // draw unbiased.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  // Uniform double in [0, 1) with 53 bits of mantissa.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::uint64_t state_;
};

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Derives an independent stream seed from a base seed and a list of string
// tags (user ids, mode names, ...). Order-sensitive: parts are absorbed with
// separators so ("ab","c") and ("a","bc") differ.
inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::string_view> parts) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto absorb = [&h](unsigned char byte) {
    h ^= byte;
    h *= 0x100000001b3ULL;
  };
  for (std::string_view part : parts) {
    for (char c : part) absorb(static_cast<unsigned char>(c));
    absorb(0x1f);
  }
  SplitMix64 mix(h ^ (base * 0x9e3779b97f4a7c15ULL) ^ 0x5851f42d4c957f2dULL);
  return mix.next();
}

// Fisher-Yates with our own generator; std::shuffle is unspecified in how it
// consumes generator output.
template <typename T>
void deterministic_shuffle(std::vector<T>& items, SplitMix64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

// First k elements of a seeded permutation of {0..n-1}. Taking prefixes of
// the same permutation is what gives nested samples their subset property.
inline std::vector<std::size_t> sample_prefix(std::size_t n, std::size_t k,
                                              SplitMix64& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  deterministic_shuffle(idx, rng);
  if (k < n) idx.resize(k);
  return idx;
}

}  // namespace stance

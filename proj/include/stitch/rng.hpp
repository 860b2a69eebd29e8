// Copyright 2026 The Stitch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace stitch {

/// xoshiro256** (Blackman & Vigna) seeded through splitmix64.
///
/// Every derived quantity (uniform integers, doubles, normals, shuffles) is
/// computed with explicit integer arithmetic so that sequences are identical
/// across compilers, standard libraries and other-language ports:
///   - next_double():  (next() >> 11) * 2^-53
///   - uniform(n):     Lemire's nearly-divisionless method with rejection
///   - normal():       Box-Muller, cosine branch only, u1 mapped to (0, 1]
///   - shuffle():      Fisher-Yates from the back, j = uniform(i + 1)
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent substream named by a path such as "noise/branch/3".
  /// The state is seeded from splitmix64(seed ^ fnv1a64(name)).
  static Rng substream(std::uint64_t seed, std::string_view name);

  std::uint64_t next();
  double next_double();
  std::uint64_t uniform(std::uint64_t n);
  double normal();
  bool coin() { return (next() >> 63) != 0; }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::array<std::uint64_t, 4> s_{};
};

std::uint64_t fnv1a64(std::string_view text);
std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace stitch

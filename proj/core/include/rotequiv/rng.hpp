// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rotequiv Authors

#pragma once

#include <cstdint>
#include <random>
#include <utility>

namespace rotequiv {

/// Seeded 64-bit generator.
///
/// The bit stream comes from std::mt19937_64, whose output sequence is fixed
/// by the C++ standard, so equal seeds give equal integer sequences on every
/// conforming platform. Floating-point draws are derived here rather than
/// through std::*_distribution, whose algorithms are implementation-defined.
/// Child streams (one per sample, per epoch, ...) are derived with
/// SplitMix64 so they can be generated in any order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via the Box-Muller transform (spare value cached).
  double normal();

  /// Unbiased integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  /// Independent child stream keyed by `stream`.
  Rng split(std::uint64_t stream) const;

  template <class RandomIt>
  void shuffle(RandomIt first, RandomIt last) {
    auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      auto j = below(i);
      using std::swap;
      swap(first[i - 1], first[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace rotequiv

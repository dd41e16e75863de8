// Copyright 2026 The tritrace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Counter-based random numbers. Every (key, counter) pair maps to four
// independent 32-bit words through Philox4x32-10, so a stream can be opened
// at any (trial, component, site) without touching shared state.

#include <array>
#include <cmath>
#include <cstdint>

namespace tritrace {

class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Seed of trial `trial` under `master`. For fixed master this is injective
/// in trial, so distinct trials never share a stream.
constexpr std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial) {
  return mix64(mix64(master) ^ trial);
}

/// Unbounded stream of 64-bit words for one (seed, component, site) triple.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint32_t component, std::uint64_t site)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        ctr_{0, component, static_cast<std::uint32_t>(site),
             static_cast<std::uint32_t>(site >> 32)} {}

  std::uint64_t next_u64() {
    if (cursor_ == 2) refill();
    return buffer_[cursor_++];
  }

  /// Uniform on the open interval (0, 1) with 53-bit resolution.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// 128 random bits addressed by (seed, component, block); used to draw
  /// many two-point variables per Philox call.
  static std::array<std::uint64_t, 2> bits(std::uint64_t seed, std::uint32_t component,
                                           std::uint64_t block) {
    const auto out = Philox4x32::block(
        {0, component, static_cast<std::uint32_t>(block),
         static_cast<std::uint32_t>(block >> 32)},
        {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
    return {(std::uint64_t{out[1]} << 32) | out[0], (std::uint64_t{out[3]} << 32) | out[2]};
  }

 private:
  void refill() {
    const auto out = Philox4x32::block(ctr_, key_);
    ++ctr_[0];
    buffer_[0] = (std::uint64_t{out[1]} << 32) | out[0];
    buffer_[1] = (std::uint64_t{out[3]} << 32) | out[2];
    cursor_ = 0;
  }

  Philox4x32::Key key_;
  Philox4x32::Counter ctr_;
  std::array<std::uint64_t, 2> buffer_{};
  int cursor_ = 2;
};

/// Standard normal by Box-Muller; consumes exactly two words.
inline double standard_normal(CounterStream& stream) {
  const double u1 = stream.uniform();
  const double u2 = stream.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

/// Gamma(shape, scale) by Marsaglia-Tsang squeeze-rejection; shapes below one
/// are boosted through Gamma(shape + 1) * U^(1/shape).
inline double gamma_variate(CounterStream& stream, double shape, double scale) {
  double boost = 1.0;
  if (shape < 1.0) {
    boost = std::pow(stream.uniform(), 1.0 / shape);
    shape += 1.0;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = standard_normal(stream);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = stream.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v * scale * boost;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v * scale * boost;
  }
}

/// Chi with `dof` degrees of freedom (any dof > 0).
inline double chi_variate(CounterStream& stream, double dof) {
  return std::sqrt(gamma_variate(stream, 0.5 * dof, 2.0));
}

}  // namespace tritrace

/*
 * Copyright 2026 The solarcast Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef SOLARCAST_MATH_RNG_HPP_
#define SOLARCAST_MATH_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string_view>

#include "solarcast/common.hpp"

// Counter-derived substreams: every (seed, tag...) tuple names an
// independent generator, so a cell computed on worker 3 of 4 draws exactly
// the numbers it would draw single-threaded. std::normal_distribution and
// friends are unspecified across implementations, so sampling is done by
// hand here.

namespace solarcast {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

class rng {
 public:
  explicit rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // uniform on [0, 1)
  double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform on (0, 1]
  double u01_pos() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * u01(); }

  double normal() {
    // Box-Muller; second variate discarded to keep the stream positionless.
    double u1 = u01_pos();
    double u2 = u01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Marsaglia-Tsang for shape >= 1, boost by u^(1/shape) below that.
  double gamma(double shape, double scale) {
    if (shape < 1.0) {
      double u = u01_pos();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      double u = u01_pos();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v))
        return d * v * scale;
    }
  }

  // integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    // Lemire-style rejection; unbiased.
    std::uint64_t x = next();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    std::uint64_t l = static_cast<std::uint64_t>(m);
    if (l < n) {
      std::uint64_t t = (0 - n) % n;
      while (l < t) {
        x = next();
        m = static_cast<__uint128_t>(x) * n;
        l = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

inline std::uint64_t substream(std::uint64_t root, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = fnv1a_u64(root);
  for (auto t : tags) h = fnv1a_u64(t, h);
  std::uint64_t sm = h;
  return splitmix64(sm);
}

inline std::uint64_t substream(std::uint64_t root, std::string_view name,
                               std::initializer_list<std::uint64_t> tags = {}) {
  std::uint64_t h = fnv1a_u64(root);
  h = fnv1a(name, h);
  for (auto t : tags) h = fnv1a_u64(t, h);
  std::uint64_t sm = h;
  return splitmix64(sm);
}

}  // namespace solarcast

#endif  // SOLARCAST_MATH_RNG_HPP_

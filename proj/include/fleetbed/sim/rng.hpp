/*
 * Copyright (C) 2026 The Fleetbed Project
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>

namespace fleetbed::sim {

/// xoshiro256++ seeded through splitmix64. Self-contained so simulation
/// results are bit-identical across platforms and standard library
/// implementations.
class DetRng {
 public:
  explicit DetRng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& s : s_) s = splitmix64(x);
  }

  /// Independent stream keyed by (seed, label, a, b) — e.g. one stream per
  /// (device, purpose, day) so draw order never couples devices together.
  static DetRng derive(std::uint64_t seed, std::string_view label,
                       std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t h = 1469598103934665603ull ^ seed;
    auto mix = [&h](std::uint64_t v) {
      for (int i = 0; i < 8; ++i) {
        h ^= v & 0xff;
        h *= 1099511628211ull;
        v >>= 8;
      }
    };
    for (char c : label) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    mix(a);
    mix(b);
    return DetRng(h);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform in [0, 1).
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t below(std::uint64_t n) { return n ? next_u64() % n : 0; }

  double exponential(double mean) {
    return -mean * std::log1p(-uniform());
  }

  std::uint64_t poisson(double lambda) {
    // Knuth; fine for the small per-tick rates used here.
    double l = std::exp(-lambda);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > l);
    return k - 1;
  }

  void fill(std::span<std::uint8_t> out) {
    std::size_t i = 0;
    while (i + 8 <= out.size()) {
      std::uint64_t v = next_u64();
      for (int b = 0; b < 8; ++b) out[i++] = static_cast<std::uint8_t>(v >> (b * 8));
    }
    if (i < out.size()) {
      std::uint64_t v = next_u64();
      while (i < out.size()) {
        out[i++] = static_cast<std::uint8_t>(v & 0xff);
        v >>= 8;
      }
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t s_[4];
};

}  // namespace fleetbed::sim

#ifndef QMONO_RNG_HPP
#define QMONO_RNG_HPP

#include <cstdint>
#include <random>

#include "qmono/types.hpp"

namespace qmono {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Engine for substream `key` of a master seed. Substreams with distinct
/// keys are independent, so sample shards and optimizer restarts can run
/// in any order (or in parallel) with reproducible results.
inline std::mt19937_64 keyed_engine(std::uint64_t seed, std::uint64_t key) {
  std::uint64_t s = seed ^ (0xD1B54A32D192ED03ULL * (key + 1));
  std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(s)),
                    static_cast<std::uint32_t>(splitmix64(s) >> 32),
                    static_cast<std::uint32_t>(splitmix64(s)),
                    static_cast<std::uint32_t>(splitmix64(s) >> 32)};
  return std::mt19937_64(seq);
}

/// Haar-uniform pure state: normalized standard complex Gaussian vector.
inline Vector haar_state(int d, std::mt19937_64& engine) {
  std::normal_distribution<double> gauss;
  Vector v(d);
  for (int i = 0; i < d; ++i) {
    double re = gauss(engine);
    double im = gauss(engine);
    v(i) = Complex(re, im);
  }
  return v / v.norm();
}

}  // namespace qmono

#endif

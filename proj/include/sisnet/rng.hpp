#pragma once

#include <boost/random/beta_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include <cstdint>
#include <random>

namespace sisnet {

// std::mt19937_64 output is fully specified by the standard; the Boost
// distribution adaptors are header-only and identical across toolchains,
// which std:: distributions are not.
using Rng = std::mt19937_64;

/// Independent stream `stream` derived from a user seed (splitmix64 mixing).
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return Rng(mix(mix(seed) ^ mix(stream + 0x632be59bd9b4e019ULL)));
}

inline double uniform(Rng& rng) { return boost::random::uniform_01<double>()(rng); }

inline bool bernoulli(Rng& rng, double p) { return uniform(rng) < p; }

inline double beta_draw(Rng& rng, double a, double b) {
  return boost::random::beta_distribution<double>(a, b)(rng);
}

/// Uniform integer in [lo, hi].
inline int uniform_int(Rng& rng, int lo, int hi) {
  return boost::random::uniform_int_distribution<int>(lo, hi)(rng);
}

}  // namespace sisnet

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "riszf/types.hpp"

namespace riszf {

using Rng = std::mt19937_64;

/// Independent stream families derived from one experiment seed.
enum class Stream : std::uint64_t {
  kAngles = 1,
  kTrials = 2,
  kPhaseInit = 3,
  kRandomPhase = 4,
  kSelfCheck = 5,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based substream: the engine for (seed, stream, index) does not
/// depend on how many other substreams were consumed before it.
inline Rng substream(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
  h = splitmix64(h ^ index);
  std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return Rng(seq);
}

/// CN(0, 1): real and imaginary parts each N(0, 1/2).
inline cplx complex_gaussian(Rng& rng) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

inline void fill_complex_gaussian(CMatrix& m, Rng& rng) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  // Column-major fill so the draw order matches the storage order.
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double re = n(rng);
      const double im = n(rng);
      m(i, j) = cplx(re, im);
    }
}

inline double uniform_angle(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  return u(rng);
}

}  // namespace riszf

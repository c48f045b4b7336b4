#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "wellposed/types.hpp"

namespace wellposed {

/// The engine is fully specified by the standard; the std:: distributions are
/// not, so the draws below are built directly on its 64-bit output.
using Rng = std::mt19937_64;

inline constexpr const char* kGeneratorName = "std::mt19937_64";

namespace rnd {

/// Uniform on [0, 1) with 53 random bits.
inline double uniform(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform(rng); }

/// Integer uniform on [lo, hi].
inline int integer(Rng& rng, int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(rng() % span);
}

/// Standard normal by Box-Muller, two engine draws per value.
inline double normal(Rng& rng) {
  const double u1 = 1.0 - uniform(rng);  // (0, 1]
  const double u2 = uniform(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline MatrixXd gaussian(Rng& rng, Index rows, Index cols) {
  MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

}  // namespace rnd
}  // namespace wellposed

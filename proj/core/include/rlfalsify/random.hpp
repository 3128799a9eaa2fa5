#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>

namespace rlfalsify {

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) built from the top 53 bits of one draw, so
/// sequences are identical across standard library implementations.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

/// Index in [0, n).
inline int uniform_index(Rng& rng, int n) {
  return static_cast<int>(uniform01(rng) * n);
}

/// Inverse-CDF draw from a probability row.
template <typename Row>
int sample_categorical(Rng& rng, const Row& probs) {
  const double u = uniform01(rng);
  double acc = 0.0;
  const auto n = static_cast<int>(probs.size());
  int last_positive = 0;
  for (int j = 0; j < n; ++j) {
    if (probs(j) <= 0.0) continue;
    acc += probs(j);
    last_positive = j;
    if (u < acc) return j;
  }
  return last_positive;
}

}  // namespace rlfalsify

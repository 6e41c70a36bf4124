#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "austen/core.hpp"

namespace austen::test {

// Random valid frame: g uniform on [g_lo, g_hi], t ~ Bern(g), Gaussian outcomes.
inline PredictionFrame random_frame(std::uint64_t seed, std::size_t n = 200, double g_lo = 0.05,
                                    double g_hi = 0.95) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(g_lo, g_hi);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> y(n), g(n), q0(n), q1(n);
  std::vector<int> t(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = unif(rng);
    t[i] = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < g[i] ? 1 : 0;
    q0[i] = normal(rng);
    q1[i] = q0[i] + 1.0 + 0.5 * normal(rng);
    y[i] = (t[i] ? q1[i] : q0[i]) + normal(rng);
  }
  t[0] = 0;
  t[1] = 1;
  return PredictionFrame::from_columns(y, t, g, q0, q1);
}

inline PredictionFrame constant_g_frame(std::uint64_t seed, std::size_t n, double g) {
  auto f = random_frame(seed, n);
  std::vector<double> gs(n, g);
  return PredictionFrame::from_columns({f.y().begin(), f.y().end()}, {f.t().begin(), f.t().end()},
                                       gs, {f.q0().begin(), f.q0().end()},
                                       {f.q1().begin(), f.q1().end()});
}

}  // namespace austen::test

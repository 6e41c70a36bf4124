#pragma once

// Test-side reference values, computed independently of the library.

#include <cmath>

namespace austen::test::oracle {

// Harmonic number minus log with Euler-Maclaurin correction, N = 100.
inline long double euler_gamma() {
  constexpr int n = 100;
  long double h = 0.0L;
  for (int k = n; k >= 1; --k) h += 1.0L / k;
  const long double inv2 = 1.0L / (static_cast<long double>(n) * n);
  return h - std::log(static_cast<long double>(n)) - 0.5L / n + inv2 / 12.0L -
         inv2 * inv2 / 120.0L + inv2 * inv2 * inv2 / 252.0L -
         inv2 * inv2 * inv2 * inv2 / 240.0L;
}

// psi(x) = -gamma + sum_{k>=0} (x-1)/((k+1)(k+x)), tail by Euler-Maclaurin.
inline long double digamma(long double x) {
  constexpr int n = 20000;
  auto f = [x](long double t) { return (x - 1.0L) / ((t + 1.0L) * (t + x)); };
  long double sum = 0.0L;
  for (int k = n - 1; k >= 0; --k) sum += f(k);
  const long double a = n + 1.0L;
  const long double b = n + x;
  const long double integral = std::log1p((x - 1.0L) / a);
  const long double d1 = -1.0L / (a * a) + 1.0L / (b * b);
  const long double d3 = -6.0L / (a * a * a * a) + 6.0L / (b * b * b * b);
  const long double tail = integral + f(n) / 2.0L - d1 / 12.0L + d3 / 720.0L;
  return -euler_gamma() + sum + tail;
}

// psi1(x) = sum_{k>=0} 1/(k+x)^2, tail by Euler-Maclaurin.
inline long double trigamma(long double x) {
  constexpr int n = 20000;
  long double sum = 0.0L;
  for (int k = n - 1; k >= 0; --k) {
    const long double d = k + x;
    sum += 1.0L / (d * d);
  }
  const long double b = n + x;
  const long double tail = 1.0L / b + 0.5L / (b * b) + 1.0L / (6.0L * b * b * b) -
                           1.0L / (30.0L * b * b * b * b * b);
  return sum + tail;
}

}  // namespace austen::test::oracle

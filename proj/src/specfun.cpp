#include "austen/specfun.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace austen::specfun {
namespace {

// Below this the recurrence is applied; at 16 the eighth asymptotic term is
// already under 1e-19.
constexpr long double kAsymptoticThreshold = 16.0L;

// B_{2k} / (2k), k = 1..8
constexpr std::array<long double, 8> kDigammaCoefs = {
    1.0L / 12.0L,     -1.0L / 120.0L,        1.0L / 252.0L, -1.0L / 240.0L,
    1.0L / 132.0L,    -691.0L / 32760.0L,    1.0L / 12.0L,  -3617.0L / 8160.0L,
};

// B_{2k}, k = 1..8
constexpr std::array<long double, 8> kTrigammaCoefs = {
    1.0L / 6.0L,  -1.0L / 30.0L,       1.0L / 42.0L, -1.0L / 30.0L,
    5.0L / 66.0L, -691.0L / 2730.0L,   7.0L / 6.0L,  -3617.0L / 510.0L,
};

void check_domain(long double x, const char* fn) {
  if (!std::isfinite(x) || !(x > 0.0L)) {
    throw std::domain_error(std::string(fn) + ": argument must be finite and positive, got " +
                            std::to_string(static_cast<double>(x)));
  }
}

long double digamma_asymptotic(long double x) {
  const long double inv2 = 1.0L / (x * x);
  long double series = 0.0L;
  long double power = inv2;
  for (long double c : kDigammaCoefs) {
    series += c * power;
    power *= inv2;
  }
  return std::log(x) - 0.5L / x - series;
}

long double trigamma_asymptotic(long double x) {
  const long double inv = 1.0L / x;
  const long double inv2 = inv * inv;
  long double series = 0.0L;
  long double power = inv2 * inv;  // x^-3
  for (long double c : kTrigammaCoefs) {
    series += c * power;
    power *= inv2;
  }
  return inv + 0.5L * inv2 + series;
}

}  // namespace

long double digamma(long double x) {
  check_domain(x, "digamma");
  if (x >= kAsymptoticThreshold) return digamma_asymptotic(x);
  int shift = static_cast<int>(std::ceil(kAsymptoticThreshold - x));
  // sum 1/(x+k) smallest term first
  long double correction = 0.0L;
  for (int k = shift - 1; k >= 0; --k) correction += 1.0L / (x + k);
  return digamma_asymptotic(x + shift) - correction;
}

long double trigamma(long double x) {
  check_domain(x, "trigamma");
  if (x >= kAsymptoticThreshold) return trigamma_asymptotic(x);
  int shift = static_cast<int>(std::ceil(kAsymptoticThreshold - x));
  long double correction = 0.0L;
  for (int k = shift - 1; k >= 0; --k) {
    const long double d = x + k;
    correction += 1.0L / (d * d);
  }
  return trigamma_asymptotic(x + shift) + correction;
}

double digamma(double x) { return static_cast<double>(digamma(static_cast<long double>(x))); }

double trigamma(double x) { return static_cast<double>(trigamma(static_cast<long double>(x))); }

}  // namespace austen::specfun

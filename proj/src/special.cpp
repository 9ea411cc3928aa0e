// Apache License, Version 2.0, refer to LICENSE.txt

#include "richfit/special.hpp"

#include <cmath>
#include <string>

#include "richfit/errors.hpp"

namespace richfit {

namespace {

constexpr double kAsymptoticFrom = 12.0;
// Short integer offsets are summed term by term; longer ones use the
// closed-form difference, which is accurate once x + n is large.
constexpr long kDirectSumLimit = 64;

void require_positive(double x, const char* fn) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError(std::string(fn) + " requires a finite x > 0, got " + std::to_string(x));
  }
}

}  // namespace

double digamma(double x) {
  require_positive(x, "digamma");
  double acc = 0.0;
  while (x < kAsymptoticFrom) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Bernoulli-number series: B_2k / (2k x^2k)
  const double series =
      inv2 * (1.0 / 12 -
              inv2 * (1.0 / 120 -
                      inv2 * (1.0 / 252 -
                              inv2 * (1.0 / 240 - inv2 * (1.0 / 132 - inv2 * (691.0 / 32760 - inv2 / 12))))));
  return acc + std::log(x) - 0.5 * inv - series;
}

double trigamma(double x) {
  require_positive(x, "trigamma");
  double acc = 0.0;
  while (x < kAsymptoticFrom) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv2 * inv *
      (1.0 / 6 -
       inv2 * (1.0 / 30 - inv2 * (1.0 / 42 - inv2 * (1.0 / 30 - inv2 * (5.0 / 66 - inv2 * (691.0 / 2730 - inv2 * 7.0 / 6))))));
  return acc + inv + 0.5 * inv2 + series;
}

double lgamma_ratio(double x, long n) {
  require_positive(x, "lgamma_ratio");
  if (n < 0) throw DomainError("lgamma_ratio requires n >= 0");
  if (n <= kDirectSumLimit) {
    double acc = 0.0;
    for (long k = 0; k < n; ++k) acc += std::log(x + static_cast<double>(k));
    return acc;
  }
  return std::lgamma(x + static_cast<double>(n)) - std::lgamma(x);
}

double digamma_ratio(double x, long n) {
  require_positive(x, "digamma_ratio");
  if (n < 0) throw DomainError("digamma_ratio requires n >= 0");
  if (n <= kDirectSumLimit) {
    double acc = 0.0;
    for (long k = 0; k < n; ++k) acc += 1.0 / (x + static_cast<double>(k));
    return acc;
  }
  return digamma(x + static_cast<double>(n)) - digamma(x);
}

double trigamma_ratio(double x, long n) {
  require_positive(x, "trigamma_ratio");
  if (n < 0) throw DomainError("trigamma_ratio requires n >= 0");
  if (n <= kDirectSumLimit) {
    double acc = 0.0;
    for (long k = 0; k < n; ++k) {
      const double v = x + static_cast<double>(k);
      acc -= 1.0 / (v * v);
    }
    return acc;
  }
  return trigamma(x + static_cast<double>(n)) - trigamma(x);
}

}  // namespace richfit

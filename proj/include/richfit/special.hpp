// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

namespace richfit {

/// psi(x) for x > 0. Upward recurrence to x >= 12, then the asymptotic series.
double digamma(double x);

/// psi'(x) for x > 0, same scheme as digamma.
double trigamma(double x);

/// log Gamma(x + n) - log Gamma(x) for x > 0 and integer n >= 0.
double lgamma_ratio(double x, long n);

/// psi(x + n) - psi(x) for x > 0 and integer n >= 0.
double digamma_ratio(double x, long n);

/// psi'(x + n) - psi'(x) for x > 0 and integer n >= 0.
double trigamma_ratio(double x, long n);

}  // namespace richfit

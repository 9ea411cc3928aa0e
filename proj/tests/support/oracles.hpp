// Apache License, Version 2.0, refer to LICENSE.txt

// Test-only reference routines. Nothing here calls into the analytic
// derivative code paths of the library; they only evaluate plain function
// values and compare.

#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "richfit/growth.hpp"

namespace richfit::testing {

using ScalarFn = std::function<double(const Eigen::VectorXd&)>;
using VectorFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

inline double fd_step(double x, double rel = 1e-6) { return rel * std::max(std::abs(x), 1e-2); }

/// Central-difference gradient, step proportional to |x_i|.
inline Eigen::VectorXd fd_gradient(const ScalarFn& f, const Eigen::VectorXd& x, double rel = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = fd_step(x[i], rel);
    Eigen::VectorXd a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

/// Five-point central-difference Jacobian of a vector function (columns =
/// perturbed coordinate).
inline Eigen::MatrixXd fd_jacobian(const VectorFn& f, const Eigen::VectorXd& x, double rel = 1e-5) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd J(f0.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = fd_step(x[i], rel);
    auto at = [&](double k) {
      Eigen::VectorXd y = x;
      y[i] += k * h;
      return f(y);
    };
    J.col(i) = (-at(2.0) + 8.0 * at(1.0) - 8.0 * at(-1.0) + at(-2.0)) / (12.0 * h);
  }
  return J;
}

/// Relative agreement with an absolute floor for entries that are zero up to
/// the oracle's own round-off.
inline double rel_err(double a, double b, double floor) {
  const double d = std::abs(a - b);
  if (d <= floor) return 0.0;
  return d / std::max({std::abs(a), std::abs(b), floor});
}

inline double max_rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double floor) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) m = std::max(m, rel_err(a(i, j), b(i, j), floor));
  return m;
}

/// Entrywise round-off floor of fd_jacobian: eps * |f_i| / h_j, with margin.
inline Eigen::MatrixXd fd_noise_floor(const Eigen::VectorXd& f0, const Eigen::VectorXd& x, double rel = 1e-5) {
  Eigen::MatrixXd out(f0.size(), x.size());
  for (Eigen::Index i = 0; i < f0.size(); ++i)
    for (Eigen::Index j = 0; j < x.size(); ++j) out(i, j) = 1e-13 * std::abs(f0[i]) / fd_step(x[j], rel) + 1e-300;
  return out;
}

inline double max_rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& floor) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) m = std::max(m, rel_err(a(i, j), b(i, j), floor(i, j)));
  return m;
}

/// Independent type-7 quantile: sort a copy, interpolate linearly.
inline double sort_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// Random growth parameters spanning four orders of magnitude in r.
inline RichardsParams random_growth(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RichardsParams g;
  g.b = 100.0 * u(rng);
  g.r = std::pow(10.0, 2.0 + 4.0 * u(rng));
  g.h = 0.01 + 0.19 * u(rng);
  g.p = -40.0 + 140.0 * u(rng);
  g.s = std::exp(std::log(0.2) + (std::log(100.0) - std::log(0.2)) * u(rng));
  return g;
}

/// Table-2-like positives parameters.
inline RichardsParams positives_growth() { return RichardsParams{0.0, 221940.0, 0.029, -32.29, 77.74}; }

}  // namespace richfit::testing

// Apache License, Version 2.0, refer to LICENSE.txt

#include "richfit/likelihood.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "richfit/errors.hpp"
#include "richfit/rng.hpp"
#include "richfit/special.hpp"

namespace richfit {

namespace {

void check_count(long y, std::size_t i) {
  if (y < 0) throw DataError("negative count at t=" + std::to_string(i + 1));
}

void check_mean(double mu, std::size_t i) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw DomainError("daily mean must be finite and > 0, got " + std::to_string(mu) + " at t=" +
                      std::to_string(i + 1));
  }
}

double log_factorial(long y) { return std::lgamma(static_cast<double>(y) + 1.0); }

// First and second derivatives of one observation's log-probability in mu.
struct MeanScore {
  double d1;
  double d2;
};

MeanScore mean_score(long y, double mu, Family family, double nu) {
  const double yd = static_cast<double>(y);
  if (family == Family::Poisson) return {yd / mu - 1.0, -yd / (mu * mu)};
  const double mn = mu + nu;
  return {yd / mu - (yd + nu) / mn, -yd / (mu * mu) + (yd + nu) / (mn * mn)};
}

}  // namespace

double dispersion(const ModelSpec& spec, const Eigen::VectorXd& theta) {
  const auto l = spec.layout();
  if (l.nu < 0) return std::numeric_limits<double>::infinity();
  const double nu = theta[l.nu];
  if (!(nu > 0.0) || !std::isfinite(nu)) throw InvalidParameter("nu must be finite and > 0");
  return nu;
}

double log_pmf(long y, double mu, Family family, double nu) {
  const double yd = static_cast<double>(y);
  if (family == Family::Poisson) return (y == 0 ? 0.0 : yd * std::log(mu)) - mu - log_factorial(y);
  return lgamma_ratio(nu, y) - log_factorial(y) - nu * std::log1p(mu / nu) +
         (y == 0 ? 0.0 : yd * std::log(mu / (mu + nu)));
}

LikelihoodEvaluation evaluate_likelihood(std::span<const long> y, const ModelSpec& spec, const Eigen::VectorXd& theta,
                                         bool with_hessian) {
  spec.validate();
  const auto layout = spec.layout();
  const int n = layout.size();
  const int nm = layout.mean_size();
  const double nu = dispersion(spec, theta);
  const auto T = static_cast<long>(y.size());
  if (T < 1) throw DataError("empty count series");

  const auto means = mean_derivatives(T, spec, theta, with_hessian);

  LikelihoodEvaluation ev;
  ev.gradient.setZero(n);
  if (with_hessian) ev.hessian.setZero(n, n);

  double d_nu = 0.0;
  double d2_nu = 0.0;
  Eigen::VectorXd d_nu_mean = Eigen::VectorXd::Zero(nm);

  for (std::size_t i = 0; i < y.size(); ++i) {
    check_count(y[i], i);
    const auto& md = means[i];
    check_mean(md.mu, i);
    ev.loglik += log_pmf(y[i], md.mu, spec.family, nu);
    const auto sc = mean_score(y[i], md.mu, spec.family, nu);
    ev.gradient.head(nm).noalias() += sc.d1 * md.grad;
    if (with_hessian) {
      ev.hessian.topLeftCorner(nm, nm).noalias() += sc.d1 * md.hess + sc.d2 * md.grad * md.grad.transpose();
    }
    if (layout.nu >= 0) {
      const double yd = static_cast<double>(y[i]);
      const double mn = md.mu + nu;
      d_nu += digamma_ratio(nu, y[i]) - std::log1p(md.mu / nu) + (md.mu - yd) / mn;
      if (with_hessian) {
        d2_nu += trigamma_ratio(nu, y[i]) + md.mu / (nu * mn) - (md.mu - yd) / (mn * mn);
        d_nu_mean.noalias() += (yd - md.mu) / (mn * mn) * md.grad;
      }
    }
  }
  if (layout.nu >= 0) {
    ev.gradient[layout.nu] = d_nu;
    if (with_hessian) {
      ev.hessian(layout.nu, layout.nu) = d2_nu;
      ev.hessian.row(layout.nu).head(nm) = d_nu_mean.transpose();
      ev.hessian.col(layout.nu).head(nm) = d_nu_mean;
    }
  }
  if (with_hessian) {
    // Symmetric by construction up to summation order; make it exact.
    ev.hessian = 0.5 * (ev.hessian + ev.hessian.transpose()).eval();
  }
  return ev;
}

LikelihoodEvaluation evaluate_likelihood_unconstrained(std::span<const long> y, const ModelSpec& spec,
                                                       const Eigen::VectorXd& v, bool with_hessian) {
  const Eigen::VectorXd theta = from_unconstrained(v, spec);
  auto ev = evaluate_likelihood(y, spec, theta, with_hessian);
  const auto layout = spec.layout();
  if (with_hessian) ev.hessian = pull_back_hessian(ev.hessian, ev.gradient, theta, layout);
  ev.gradient = pull_back_gradient(ev.gradient, theta, layout);
  return ev;
}

double loglik(std::span<const long> y, const ModelSpec& spec, const Eigen::VectorXd& theta) {
  spec.validate();
  const double nu = dispersion(spec, theta);
  if (y.empty()) throw DataError("empty count series");
  const Eigen::VectorXd mu = mean_trajectory(static_cast<long>(y.size()), spec, theta);
  double ll = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    check_count(y[i], i);
    check_mean(mu[static_cast<Eigen::Index>(i)], i);
    ll += log_pmf(y[i], mu[static_cast<Eigen::Index>(i)], spec.family, nu);
  }
  return ll;
}

Eigen::VectorXd loglik_gradient(std::span<const long> y, const ModelSpec& spec, const Eigen::VectorXd& theta) {
  return evaluate_likelihood(y, spec, theta, false).gradient;
}

Eigen::MatrixXd loglik_hessian(std::span<const long> y, const ModelSpec& spec, const Eigen::VectorXd& theta) {
  return evaluate_likelihood(y, spec, theta, true).hessian;
}

std::vector<long> sample_from_means(std::span<const double> mu, Family family, double nu, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<long> out(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    check_mean(mu[i], i);
    double rate = mu[i];
    if (family == Family::NegBin) {
      if (!(nu > 0.0) || !std::isfinite(nu)) throw InvalidParameter("nu must be finite and > 0");
      std::gamma_distribution<double> mix(nu, mu[i] / nu);
      rate = mix(rng);
    }
    if (rate <= 0.0) {
      out[i] = 0;
      continue;
    }
    std::poisson_distribution<long> draw(rate);
    out[i] = draw(rng);
  }
  return out;
}

CountSeries sample_counts(const ModelSpec& spec, const Eigen::VectorXd& theta, long n, std::uint64_t seed) {
  if (n < 1) throw DimensionError("sample length must be >= 1");
  const Eigen::VectorXd mu = mean_trajectory(n, spec, theta);
  const double nu = spec.family == Family::NegBin ? dispersion(spec, theta) : 0.0;
  CountSeries out;
  out.origin = Date(2020, 1, 1);
  out.indicator = "simulated";
  out.values = sample_from_means(std::span<const double>(mu.data(), static_cast<std::size_t>(mu.size())),
                                 spec.family, nu, seed);
  return out;
}

Eigen::VectorXd pearson_residuals(std::span<const long> y, std::span<const double> fitted, Family family,
                                  double nu) {
  if (y.size() != fitted.size()) throw DimensionError("observations and fitted values differ in length");
  if (family == Family::NegBin && (!(nu > 0.0) || !std::isfinite(nu))) {
    throw InvalidParameter("NegBin residuals need a finite nu > 0");
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double f = fitted[i];
    if (!(f > 0.0)) throw DomainError("fitted value must be > 0 at t=" + std::to_string(i + 1));
    const double var = family == Family::Poisson ? f : f + f * f / nu;
    out[static_cast<Eigen::Index>(i)] = (static_cast<double>(y[i]) - f) / std::sqrt(var);
  }
  return out;
}

}  // namespace richfit

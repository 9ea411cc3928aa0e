// Apache License, Version 2.0, refer to LICENSE.txt

#include "richfit/uncertainty.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>

#include "richfit/errors.hpp"
#include "richfit/likelihood.hpp"
#include "richfit/parallel.hpp"
#include "richfit/rng.hpp"

namespace richfit {

namespace {

constexpr int kMaxRedraws = 100;

// Draw factor A with A A^T = V, via the spectrum so PSD (and zero) matrices work.
Eigen::MatrixXd draw_factor(const Eigen::MatrixXd& V) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (V + V.transpose()));
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal();
}

void check_level(double level) {
  if (!(level >= 0.0 && level < 1.0)) throw InvalidParameter("level must be in [0, 1)");
}

long band_length(const BootstrapEnsemble& ens, const FitResult& fit, long horizon) {
  if (horizon < 0) throw InvalidParameter("horizon must be >= 0");
  const long n = fit.T + horizon;
  if (n > ens.horizon_days) {
    throw DimensionError("ensemble covers " + std::to_string(ens.horizon_days) + " days, band needs " +
                         std::to_string(n));
  }
  return n;
}

PredictionBand band_from(const Eigen::MatrixXd& paths, const Eigen::VectorXd& point, const BootstrapEnsemble& ens,
                         double level) {
  PredictionBand band;
  band.origin = ens.origin;
  band.level = level;
  band.reliable = ens.B >= 100;
  const double lo_q = 0.5 - 0.5 * level;
  const double hi_q = 0.5 + 0.5 * level;
  std::vector<double> col(static_cast<std::size_t>(paths.rows()));
  for (Eigen::Index t = 0; t < point.size(); ++t) {
    for (Eigen::Index b = 0; b < paths.rows(); ++b) col[static_cast<std::size_t>(b)] = paths(b, t);
    double lo = quantile(col, lo_q);
    double hi = quantile(col, hi_q);
    if (lo > hi) {
      std::swap(lo, hi);
      ++band.repairs;
    }
    band.t.push_back(t + 1);
    band.point.push_back(point[t]);
    band.lower.push_back(lo);
    band.upper.push_back(hi);
  }
  return band;
}

}  // namespace

double quantile(std::vector<double> sample, double q) {
  if (sample.empty()) throw DimensionError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidParameter("quantile level must be in [0, 1]");
  const double pos = q * static_cast<double>(sample.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sample.size() - 1);
  std::nth_element(sample.begin(), sample.begin() + static_cast<std::ptrdiff_t>(lo), sample.end());
  const double a = sample[lo];
  const double b = hi == lo ? a : *std::min_element(sample.begin() + static_cast<std::ptrdiff_t>(lo) + 1, sample.end());
  return a + (pos - static_cast<double>(lo)) * (b - a);
}

BootstrapEnsemble draw_ensemble(const FitResult& fit, int B, long horizon_days, std::uint64_t seed, int threads) {
  if (B < 1) throw InvalidParameter("B must be >= 1");
  if (horizon_days < 1) throw InvalidParameter("horizon_days must be >= 1");
  const auto k = fit.layout.size();
  if (fit.covariance.matrix.rows() != k || fit.covariance.matrix.cols() != k || !fit.covariance.matrix.allFinite()) {
    throw DomainError("fit has no usable covariance; see the convergence report");
  }
  if (fit.covariance.degenerate) {
    throw DomainError("covariance is degenerate (" + fit.covariance.warning + "); see the convergence report");
  }
  if (fit.spec.has_covariates() && fit.spec.design_rows() < horizon_days) {
    throw DimensionError("design matrix must cover all " + std::to_string(horizon_days) + " ensemble days");
  }

  BootstrapEnsemble ens;
  ens.spec = fit.spec;
  ens.theta_hat = fit.theta;
  ens.B = B;
  ens.horizon_days = horizon_days;
  ens.seed = seed;
  ens.origin = fit.origin;
  ens.thetas.resize(B, k);
  ens.means.resize(B, horizon_days);
  ens.counts.resize(B, horizon_days);

  const Eigen::MatrixXd A = draw_factor(fit.covariance.matrix);
  const auto family = fit.spec.family;
  std::vector<long> redraws(static_cast<std::size_t>(B), 0);

  parallel_for(static_cast<std::size_t>(B), threads, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    std::normal_distribution<double> n01;
    Eigen::VectorXd theta;
    Eigen::VectorXd mu;
    for (int attempt = 0;; ++attempt) {
      if (attempt > kMaxRedraws) {
        throw DomainError("replicate " + std::to_string(i) + " left the parameter domain " +
                          std::to_string(kMaxRedraws) + " times; the covariance spans a direction the data do not "
                          "identify, see the convergence report");
      }
      Eigen::VectorXd z(k);
      for (Eigen::Index j = 0; j < k; ++j) z[j] = n01(rng);
      const Eigen::VectorXd v = fit.v + A * z;
      try {
        theta = from_unconstrained(v, fit.spec);
        if (!theta.allFinite()) throw DomainError("non-finite draw");
        mu = mean_trajectory(horizon_days, fit.spec, theta);
        if (!mu.allFinite() || (mu.array() <= 0.0).any()) throw DomainError("invalid mean path");
        break;
      } catch (const InvalidParameter&) {
      } catch (const DomainError&) {
      }
      ++redraws[i];
    }
    const double nu = family == Family::NegBin ? theta[fit.layout.nu] : 0.0;
    const auto y = sample_from_means(std::span<const double>(mu.data(), static_cast<std::size_t>(mu.size())), family,
                                     nu, rng());
    const auto row = static_cast<Eigen::Index>(i);
    ens.thetas.row(row) = theta.transpose();
    ens.means.row(row) = mu.transpose();
    for (long t = 0; t < horizon_days; ++t) ens.counts(row, t) = static_cast<double>(y[static_cast<std::size_t>(t)]);
  });

  for (long r : redraws) ens.redraws += r;
  if (ens.redraws > B / 10) {
    ens.warnings.push_back(std::to_string(ens.redraws) + " draws were rejected for domain violations");
  }
  if (B < 100) ens.warnings.push_back("fewer than 100 replicates; bands are unreliable");
  return ens;
}

PredictionBand prediction_band(const BootstrapEnsemble& ens, const FitResult& fit, double level, long horizon,
                               BandSource source) {
  check_level(level);
  const long n = band_length(ens, fit, horizon);
  const Eigen::VectorXd point = mean_trajectory(n, ens.spec, ens.theta_hat);
  const Eigen::MatrixXd& paths = source == BandSource::Counts ? ens.counts : ens.means;
  return band_from(paths.leftCols(n), point, ens, level);
}

PredictionBand cumulative_band(const BootstrapEnsemble& ens, const FitResult& fit, double level, long horizon,
                               BandSource source) {
  check_level(level);
  const long n = band_length(ens, fit, horizon);
  const Eigen::VectorXd daily = mean_trajectory(n, ens.spec, ens.theta_hat);
  Eigen::VectorXd point(n);
  double run = 0.0;
  for (long t = 0; t < n; ++t) point[t] = run += daily[t];
  Eigen::MatrixXd paths = (source == BandSource::Counts ? ens.counts : ens.means).leftCols(n);
  for (long t = 1; t < n; ++t) paths.col(t) += paths.col(t - 1);
  return band_from(paths, point, ens, level);
}

Date day_to_date(const Date& origin, double t) {
  if (!std::isfinite(t)) throw DomainError("non-finite day index");
  return origin + std::lround(t);
}

PeakEstimate peak_interval(const BootstrapEnsemble& ens, double level) {
  check_level(level);
  if (ens.B < 1) throw DimensionError("empty ensemble");
  PeakEstimate pk;
  pk.point = peak_time(growth_params(ens.spec, ens.theta_hat));
  pk.draws.resize(static_cast<std::size_t>(ens.B));
  for (int b = 0; b < ens.B; ++b) {
    const Eigen::VectorXd th = ens.thetas.row(b).transpose();
    pk.draws[static_cast<std::size_t>(b)] = peak_time(growth_params(ens.spec, th));
  }
  pk.lower = quantile(pk.draws, 0.5 - 0.5 * level);
  pk.upper = quantile(pk.draws, 0.5 + 0.5 * level);
  pk.reliable = ens.redraws <= ens.B / 10 && pk.lower <= pk.point && pk.point <= pk.upper;
  pk.point_date = day_to_date(ens.origin, pk.point);
  pk.lower_date = day_to_date(ens.origin, pk.lower);
  pk.upper_date = day_to_date(ens.origin, pk.upper);
  return pk;
}

}  // namespace richfit

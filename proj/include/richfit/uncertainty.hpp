// Apache License, Version 2.0, refer to LICENSE.txt

// Parametric double bootstrap: parameter draws from the asymptotic normal on
// the unconstrained scale, mean trajectories, simulated count paths, bands.

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "richfit/dates.hpp"
#include "richfit/estimator.hpp"

namespace richfit {

struct BootstrapEnsemble {
  ModelSpec spec;
  Eigen::VectorXd theta_hat;
  int B = 0;
  long horizon_days = 0;  ///< trajectories cover t = 1..horizon_days
  std::uint64_t seed = 0;
  Date origin;
  /// B x k parameter draws (constrained scale).
  Eigen::MatrixXd thetas;
  /// B x horizon_days mean paths.
  Eigen::MatrixXd means;
  /// B x horizon_days simulated counts.
  Eigen::MatrixXd counts;
  /// Draws rejected and redrawn for leaving the parameter domain.
  long redraws = 0;
  std::vector<std::string> warnings;
};

/// Draws B parameter vectors from N(v_hat, V) and, for each, a mean path and
/// one simulated count path over t = 1..horizon_days. Replicate i uses the
/// stream derive_seed(seed, i), so results do not depend on `threads`.
BootstrapEnsemble draw_ensemble(const FitResult& fit, int B, long horizon_days, std::uint64_t seed,
                                int threads = 0);

struct PredictionBand {
  Date origin;
  std::vector<long> t;
  std::vector<double> point;
  std::vector<double> lower;
  std::vector<double> upper;
  double level = 0.95;
  /// Pointwise swaps applied where lower > upper.
  long repairs = 0;
  bool reliable = true;
};

enum class BandSource { Counts, Means };

/// Type-7 quantile of an unsorted sample.
double quantile(std::vector<double> sample, double q);

/// Pointwise band over t = 1..T+horizon (T = fitted series length).
PredictionBand prediction_band(const BootstrapEnsemble& ens, const FitResult& fit, double level = 0.95,
                               long horizon = 0, BandSource source = BandSource::Counts);

/// Band over running sums of the paths; point is the running sum of the point path.
PredictionBand cumulative_band(const BootstrapEnsemble& ens, const FitResult& fit, double level = 0.95,
                               long horizon = 0, BandSource source = BandSource::Counts);

struct PeakEstimate {
  double point = 0.0;  ///< day index (t = 0 is the origin)
  double lower = 0.0;
  double upper = 0.0;
  Date point_date;
  Date lower_date;
  Date upper_date;
  std::vector<double> draws;
  bool reliable = true;
};

/// Point = peak_time at theta_hat, CI = quantiles of peak_time over the draws.
PeakEstimate peak_interval(const BootstrapEnsemble& ens, double level = 0.95);

/// Calendar date nearest to a real day index.
Date day_to_date(const Date& origin, double t);

}  // namespace richfit

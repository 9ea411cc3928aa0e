// Apache License, Version 2.0, refer to LICENSE.txt

// Maximum-likelihood fitting: Latin-hypercube multistart (optionally refined
// by a small genetic search), Newton polish on the unconstrained scale,
// observed-information covariance, Wald intervals, information criteria.

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "richfit/growth.hpp"
#include "richfit/series.hpp"

namespace richfit {

struct GaSettings {
  int population = 40;
  int generations = 25;
  /// Gaussian mutation sd as a fraction of each box width (unconstrained scale).
  double mutation_scale = 0.1;
  int tournament = 3;
};

struct NewtonSettings {
  int max_iterations = 200;
  /// Infinity norm of the unconstrained gradient.
  double gradient_tolerance = 1e-8;
  /// First rung of the ridge ladder, relative to max |H_ij|; doubles per rung.
  double ridge_start = 1e-8;
  int max_ridge_rungs = 200;
  double armijo = 1e-4;
  int max_backtracks = 60;
  /// Cap on the infinity norm of one step.
  double max_step = 10.0;
  /// Iterations given to every start before ranking.
  int screening_iterations = 20;
};

/// Sampling box for one parameter, on the constrained scale.
struct Box {
  double lower = 0.0;
  double upper = 1.0;
};

struct FitConfig {
  int n_starts = 50;
  std::optional<GaSettings> ga;
  NewtonSettings newton;
  /// Fraction of screened starts that get a full polish (at least one).
  double polish_fraction = 0.1;
  /// Per-parameter overrides of the default boxes, keyed by parameter name.
  std::map<std::string, Box> bounds;
  /// Extra starting points (constrained scale), always polished.
  std::vector<Eigen::VectorXd> warm_starts;
  std::uint64_t seed = 20200224;
  /// 0: RICHFIT_THREADS or hardware concurrency.
  int threads = 0;
  /// Two polished optima agree when their log-likelihoods differ by less.
  double agreement_tolerance = 1e-4;

  /// Throws InvalidParameter on non-positive tolerances or bad boxes.
  void validate() const;
};

/// Default sampling boxes for a series and model (constrained scale).
std::map<std::string, Box> default_bounds(std::span<const long> y, const ModelSpec& spec);

struct InformationCriteria {
  double aic = 0.0;
  std::optional<double> aicc;  ///< absent when T <= k + 1
  double bic = 0.0;
};

InformationCriteria information_criteria(double loglik, int k, long T);

struct Covariance {
  Eigen::MatrixXd matrix;
  /// Set when -H was not positive definite and a pseudo-inverse was used.
  bool degenerate = false;
  std::string warning;
};

/// V = -H^{-1}. Falls back to the pseudo-inverse over the positive part of
/// the spectrum of -H when it is not positive definite.
Covariance observed_information(const Eigen::MatrixXd& hessian);

enum class IntervalScale {
  Log,         ///< Wald on the unconstrained scale, exp-mapped for positive parameters
  Constrained  ///< delta-method Wald on the natural scale, truncated at domain bounds
};

struct ParameterInterval {
  std::string name;
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double std_error = 0.0;  ///< natural scale (delta method)
  bool reliable = true;
};

struct ConvergenceReport {
  bool converged = false;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool negative_definite = false;
  /// The final line search could not improve, accepted on the relative
  /// gradient criterion.
  bool stalled = false;
  int starts_run = 0;
  int starts_polished = 0;
  int starts_agreeing = 0;
  std::vector<std::string> warnings;
};

struct FitResult {
  ModelSpec spec;
  ParamLayout layout;
  Eigen::VectorXd theta;
  Eigen::VectorXd v;
  double loglik = 0.0;
  /// Hessian of the log-likelihood over v.
  Eigen::MatrixXd hessian;
  Covariance covariance;              ///< over v
  Eigen::MatrixXd covariance_theta;  ///< delta method, over theta
  std::vector<ParameterInterval> intervals;
  InformationCriteria criteria;
  int k = 0;
  long T = 0;
  /// Date of t = 0 of the fitted series (default when fitted from raw counts).
  Date origin;
  ConvergenceReport convergence;
  std::uint64_t seed = 0;
  /// FNV-1a of the fitted counts; compare_models refuses mixed data.
  std::uint64_t data_hash = 0;
  /// Log-likelihoods of all polished starts, best first.
  std::vector<double> polished_logliks;
};

FitResult fit(std::span<const long> y, const ModelSpec& spec, const FitConfig& cfg = {});
FitResult fit(const CountSeries& y, const ModelSpec& spec, const FitConfig& cfg = {});

/// Newton ascent from one unconstrained starting point.
struct NewtonOutcome {
  Eigen::VectorXd v;
  double loglik = -1e300;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  bool stalled = false;
  bool failed = false;
};
NewtonOutcome newton_maximize(std::span<const long> y, const ModelSpec& spec, const Eigen::VectorXd& v0,
                              const NewtonSettings& settings, int max_iterations);

std::vector<ParameterInterval> parameter_intervals(const FitResult& fit, double level = 0.95,
                                                   IntervalScale scale = IntervalScale::Log);

struct ComparisonRow {
  std::string label;
  double loglik = 0.0;
  int k = 0;
  InformationCriteria criteria;
  double delta_aic = 0.0;
};

/// Ranks fits of the same data by AIC (then BIC, then k).
std::vector<ComparisonRow> compare_models(const std::vector<std::pair<std::string, const FitResult*>>& fits);

/// FNV-1a 64 over the little-endian bytes of the counts.
std::uint64_t hash_counts(std::span<const long> y);

}  // namespace richfit

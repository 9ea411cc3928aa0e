// Apache License, Version 2.0, refer to LICENSE.txt

// Richards growth curve, its daily first differences and the full daily mean
// function (baseline and covariate variants) with analytic derivatives.
//
// Time convention: t = 0 is the first recorded day; daily counts live on
// t = 1..T and row t-1 of a design matrix belongs to day t.

#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <vector>

namespace richfit {

/// Generalized logistic curve parameters lambda(t) = b + r / (1 + 10^{h(p-t)})^s.
struct RichardsParams {
  double b = 0.0;  ///< lower asymptote, >= 0
  double r = 1.0;  ///< distance between asymptotes, > 0
  double h = 0.1;  ///< hill (growth rate), > 0
  double p = 0.0;  ///< peak-position parameter, any real
  double s = 1.0;  ///< asymmetry, > 0

  /// Throws InvalidParameter on non-finite components or violated signs.
  void validate() const;
};

/// Cumulative expected count at (real) day t.
double richards(double t, const RichardsParams& g);

/// Expected daily count lambda(t) - lambda(t-1). Independent of b.
double richards_diff(double t, const RichardsParams& g);

/// d lambda / d(r, h, p, s) at t.
std::array<double, 4> richards_gradient(double t, const RichardsParams& g);

/// Second partials of lambda over (r, h, p, s); symmetric.
Eigen::Matrix4d richards_hessian(double t, const RichardsParams& g);

/// Continuous-time argmax of d lambda / dt: p + log10(s) / h.
double peak_time(const RichardsParams& g);

enum class Family { Poisson, NegBin };
enum class Baseline { None, Constant };
enum class Covariates { None, Additive, Multiplicative };

/// Positions of each free parameter inside a parameter vector. Entries that
/// are absent for a given spec are -1.
struct ParamLayout {
  int alpha = -1;
  int r = -1;
  int h = -1;
  int p = -1;
  int s = -1;
  int beta0 = -1;
  int n_beta = 0;
  int nu = -1;
  std::vector<std::string> names;
  std::vector<bool> log_scaled;

  [[nodiscard]] int size() const { return static_cast<int>(names.size()); }
  /// Number of parameters the daily mean depends on (everything except nu).
  [[nodiscard]] int mean_size() const { return nu >= 0 ? size() - 1 : size(); }
  /// Index of a parameter by name, -1 when absent.
  [[nodiscard]] int index_of(const std::string& name) const;
};

/// Full model description: count family, baseline, covariate handling and the
/// design matrix (rows = days t = 1.., first column is the intercept).
struct ModelSpec {
  Family family = Family::NegBin;
  Baseline baseline = Baseline::Constant;
  Covariates covariates = Covariates::None;
  Eigen::MatrixXd design;
  std::vector<std::string> design_labels;

  /// Throws InvalidParameter on contradictory settings (additive covariates
  /// together with a constant baseline, empty design for covariate modes).
  void validate() const;
  [[nodiscard]] ParamLayout layout() const;
  [[nodiscard]] bool has_covariates() const { return covariates != Covariates::None; }
  /// Number of days the design covers (unbounded when there are no covariates).
  [[nodiscard]] long design_rows() const;
};

/// Extracts the growth-curve part of a parameter vector (b = 0, r = 1 when r
/// is carried by the multiplicative intercept).
RichardsParams growth_params(const ModelSpec& spec, const Eigen::VectorXd& theta);

/// Expected daily count at integer day t >= 1.
double mean_daily(long t, const ModelSpec& spec, const Eigen::VectorXd& theta);

/// Daily means for t = 1..n.
Eigen::VectorXd mean_trajectory(long n, const ModelSpec& spec, const Eigen::VectorXd& theta);

/// Gradient of the daily mean over the mean parameters (layout().mean_size()).
Eigen::VectorXd mean_gradient(long t, const ModelSpec& spec, const Eigen::VectorXd& theta);

/// Value, gradient and Hessian of the daily mean at one day.
struct MeanDerivatives {
  double mu = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

/// Evaluates means and derivatives for t = 1..n in one pass (reuses the
/// curve evaluation at t-1).
std::vector<MeanDerivatives> mean_derivatives(long n, const ModelSpec& spec, const Eigen::VectorXd& theta,
                                              bool with_hessian);

/// Parameter vector on the optimization scale: log for positive parameters,
/// identity for p and the covariate coefficients.
struct UnconstrainedVector {
  Eigen::VectorXd v;
  ParamLayout layout;
};

UnconstrainedVector to_unconstrained(const Eigen::VectorXd& theta, const ModelSpec& spec);
Eigen::VectorXd from_unconstrained(const Eigen::VectorXd& v, const ModelSpec& spec);

/// d theta / d v for each entry (theta_i for log-scaled entries, 1 otherwise).
Eigen::VectorXd unconstrained_jacobian(const Eigen::VectorXd& theta, const ParamLayout& layout);

/// Pulls a constrained-scale gradient back to the log scale.
Eigen::VectorXd pull_back_gradient(const Eigen::VectorXd& grad, const Eigen::VectorXd& theta,
                                   const ParamLayout& layout);

/// Pulls a constrained-scale Hessian back: mixed terms scale by q*f, the
/// diagonal of a log entry gains q * first derivative.
Eigen::MatrixXd pull_back_hessian(const Eigen::MatrixXd& hess, const Eigen::VectorXd& grad,
                                  const Eigen::VectorXd& theta, const ParamLayout& layout);

}  // namespace richfit

// Apache License, Version 2.0, refer to LICENSE.txt

// Poisson and Negative Binomial log-likelihoods of daily counts under the
// growth-curve mean, with analytic gradients and Hessians. Normalizing
// constants (log y!, log-Gamma terms) are included so that values are
// comparable across families.

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>

#include "richfit/growth.hpp"
#include "richfit/series.hpp"

namespace richfit {

struct LikelihoodEvaluation {
  double loglik = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

double loglik(std::span<const long> y, const ModelSpec& spec, const Eigen::VectorXd& theta);
Eigen::VectorXd loglik_gradient(std::span<const long> y, const ModelSpec& spec, const Eigen::VectorXd& theta);
Eigen::MatrixXd loglik_hessian(std::span<const long> y, const ModelSpec& spec, const Eigen::VectorXd& theta);

/// Log-likelihood with gradient (and optionally Hessian) over the
/// constrained parameter vector theta.
LikelihoodEvaluation evaluate_likelihood(std::span<const long> y, const ModelSpec& spec,
                                         const Eigen::VectorXd& theta, bool with_hessian = true);

/// Same quantities with respect to the unconstrained vector v (log scale
/// for the positive parameters).
LikelihoodEvaluation evaluate_likelihood_unconstrained(std::span<const long> y, const ModelSpec& spec,
                                                       const Eigen::VectorXd& v, bool with_hessian = true);

/// Per-observation log-probability of y under the family at mean mu.
double log_pmf(long y, double mu, Family family, double nu);

/// Draws independent counts for t = 1..n from the fitted family. NB draws
/// use the Gamma-Poisson mixture. Deterministic for a given seed.
CountSeries sample_counts(const ModelSpec& spec, const Eigen::VectorXd& theta, long n, std::uint64_t seed);

/// Same as sample_counts, but from an explicit mean path.
std::vector<long> sample_from_means(std::span<const double> mu, Family family, double nu, std::uint64_t seed);

/// (y - yhat) / sqrt(Var[Y]) with Var = yhat (Poisson) or yhat + yhat^2/nu.
Eigen::VectorXd pearson_residuals(std::span<const long> y, std::span<const double> fitted, Family family,
                                  double nu = 0.0);

/// Dispersion parameter of theta (NegBin), or +inf for Poisson.
double dispersion(const ModelSpec& spec, const Eigen::VectorXd& theta);

}  // namespace richfit

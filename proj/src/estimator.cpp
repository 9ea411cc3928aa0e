// Apache License, Version 2.0, refer to LICENSE.txt

#include "richfit/estimator.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "richfit/errors.hpp"
#include "richfit/likelihood.hpp"
#include "richfit/parallel.hpp"
#include "richfit/rng.hpp"

namespace richfit {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Standard deviation on the unconstrained scale beyond which a parameter is
// treated as not identified by the data (e.g. the s -> inf Gompertz limit).
constexpr double kWeakSd = 100.0;

/// Parameters whose standard deviation on the unconstrained scale exceeds kWeakSd.
std::vector<bool> weakly_identified(const Eigen::MatrixXd& V) {
  std::vector<bool> out(static_cast<std::size_t>(V.rows()), false);
  for (Eigen::Index i = 0; i < V.rows(); ++i) out[static_cast<std::size_t>(i)] = !(V(i, i) <= kWeakSd * kWeakSd);
  return out;
}

double value_at(std::span<const long> y, const ModelSpec& spec, const Eigen::VectorXd& v) {
  try {
    const double ll = loglik(y, spec, from_unconstrained(v, spec));
    return std::isfinite(ll) ? ll : kNegInf;
  } catch (const Error&) {
    return kNegInf;
  }
}

std::optional<LikelihoodEvaluation> evaluate_at(std::span<const long> y, const ModelSpec& spec,
                                                const Eigen::VectorXd& v) {
  try {
    auto ev = evaluate_likelihood_unconstrained(y, spec, v, true);
    if (!std::isfinite(ev.loglik) || !ev.gradient.allFinite() || !ev.hessian.allFinite()) return std::nullopt;
    return ev;
  } catch (const Error&) {
    return std::nullopt;
  }
}

bool relative_gradient_ok(double gnorm, double ll) { return gnorm < 1e-6 * std::max(1.0, std::abs(ll)); }

// Box on the unconstrained scale.
struct UBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

UBox unconstrained_boxes(std::span<const long> y, const ModelSpec& spec, const FitConfig& cfg) {
  const auto l = spec.layout();
  auto boxes = default_bounds(y, spec);
  for (const auto& [name, box] : cfg.bounds) {
    if (l.index_of(name) < 0) throw InvalidParameter("bounds given for unknown parameter '" + name + "'");
    boxes[name] = box;
  }
  UBox out{Eigen::VectorXd(l.size()), Eigen::VectorXd(l.size())};
  for (int i = 0; i < l.size(); ++i) {
    const Box& b = boxes.at(l.names[static_cast<std::size_t>(i)]);
    if (l.log_scaled[static_cast<std::size_t>(i)]) {
      if (!(b.lower > 0.0)) throw InvalidParameter("box for " + l.names[static_cast<std::size_t>(i)] + " must be > 0");
      out.lower[i] = std::log(b.lower);
      out.upper[i] = std::log(b.upper);
    } else {
      out.lower[i] = b.lower;
      out.upper[i] = b.upper;
    }
  }
  return out;
}

std::vector<Eigen::VectorXd> latin_hypercube(const UBox& box, int n, Rng& rng) {
  const auto dim = box.lower.size();
  std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n), Eigen::VectorXd(dim));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (Eigen::Index d = 0; d < dim; ++d) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int i = 0; i < n; ++i) {
      const double q = (perm[static_cast<std::size_t>(i)] + u(rng)) / n;
      pts[static_cast<std::size_t>(i)][d] = box.lower[d] + q * (box.upper[d] - box.lower[d]);
    }
  }
  return pts;
}

// Tournament selection with Gaussian mutation; the best individual survives.
void genetic_refine(std::span<const long> y, const ModelSpec& spec, const UBox& box, const GaSettings& ga,
                    std::vector<Eigen::VectorXd>& pop, std::vector<double>& fit, Rng& rng, int threads) {
  const auto n = pop.size();
  if (n < 2) return;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::normal_distribution<double> gauss;
  const Eigen::VectorXd width = box.upper - box.lower;
  for (int g = 0; g < ga.generations; ++g) {
    const auto best = static_cast<std::size_t>(std::max_element(fit.begin(), fit.end()) - fit.begin());
    std::vector<Eigen::VectorXd> next(n);
    next[0] = pop[best];
    for (std::size_t i = 1; i < n; ++i) {
      std::size_t win = pick(rng);
      for (int k = 1; k < ga.tournament; ++k) {
        const std::size_t c = pick(rng);
        if (fit[c] > fit[win]) win = c;
      }
      Eigen::VectorXd child = pop[win];
      for (Eigen::Index d = 0; d < child.size(); ++d) {
        child[d] = std::clamp(child[d] + ga.mutation_scale * width[d] * gauss(rng), box.lower[d], box.upper[d]);
      }
      next[i] = std::move(child);
    }
    std::vector<double> next_fit(n);
    next_fit[0] = fit[best];
    parallel_for(n - 1, threads, [&](std::size_t i) { next_fit[i + 1] = value_at(y, spec, next[i + 1]); });
    pop = std::move(next);
    fit = std::move(next_fit);
  }
}

Eigen::MatrixXd delta_covariance(const Eigen::MatrixXd& cov_v, const Eigen::VectorXd& theta, const ParamLayout& l) {
  const Eigen::VectorXd q = unconstrained_jacobian(theta, l);
  return q.asDiagonal() * cov_v * q.asDiagonal();
}

}  // namespace

void FitConfig::validate() const {
  if (n_starts < 1) throw InvalidParameter("n_starts must be >= 1");
  if (!(newton.gradient_tolerance > 0.0)) throw InvalidParameter("gradient tolerance must be > 0");
  if (newton.max_iterations < 1) throw InvalidParameter("max_iterations must be >= 1");
  if (!(newton.ridge_start > 0.0)) throw InvalidParameter("ridge_start must be > 0");
  if (!(newton.armijo > 0.0 && newton.armijo < 0.5)) throw InvalidParameter("armijo constant must be in (0, 0.5)");
  if (!(newton.max_step > 0.0)) throw InvalidParameter("max_step must be > 0");
  if (!(polish_fraction > 0.0 && polish_fraction <= 1.0)) throw InvalidParameter("polish_fraction must be in (0, 1]");
  if (!(agreement_tolerance > 0.0)) throw InvalidParameter("agreement tolerance must be > 0");
  for (const auto& [name, b] : bounds) {
    if (!std::isfinite(b.lower) || !std::isfinite(b.upper) || !(b.lower < b.upper)) {
      throw InvalidParameter("box for " + name + " must be finite with lower < upper");
    }
  }
  if (ga) {
    if (ga->population < 2 || ga->generations < 0 || ga->tournament < 1 || !(ga->mutation_scale > 0.0)) {
      throw InvalidParameter("invalid genetic refinement settings");
    }
  }
}

std::map<std::string, Box> default_bounds(std::span<const long> y, const ModelSpec& spec) {
  const auto l = spec.layout();
  const long T = static_cast<long>(y.size());
  const double total = std::max(1.0, static_cast<double>(std::accumulate(y.begin(), y.end(), 0L)));
  const double max_daily = std::max(1.0, static_cast<double>(*std::max_element(y.begin(), y.end())));
  std::map<std::string, Box> b;
  if (l.alpha >= 0) b["alpha"] = {1e-2, max_daily};
  if (l.r >= 0) b["r"] = {total / 10.0, total * 10.0};
  b["h"] = {1e-3, 0.5};
  b["p"] = {-static_cast<double>(T), 2.0 * static_cast<double>(T)};
  b["s"] = {1e-2, 500.0};
  for (int j = 0; j < l.n_beta; ++j) {
    const auto& name = l.names[static_cast<std::size_t>(l.beta0 + j)];
    if (j == 0 && spec.covariates == Covariates::Multiplicative) {
      b[name] = {std::log(total / 10.0), std::log(total * 10.0)};
    } else if (j == 0) {
      b[name] = {std::log(1e-2), std::log(max_daily)};
    } else {
      b[name] = {-2.0, 2.0};
    }
  }
  if (l.nu >= 0) b["nu"] = {0.5, 500.0};
  return b;
}

InformationCriteria information_criteria(double loglik, int k, long T) {
  if (k < 0 || T < 1) throw InvalidParameter("information criteria need k >= 0 and T >= 1");
  InformationCriteria ic;
  const double kd = k;
  ic.aic = 2.0 * kd - 2.0 * loglik;
  ic.bic = kd * std::log(static_cast<double>(T)) - 2.0 * loglik;
  if (T > k + 1) ic.aicc = ic.aic + 2.0 * kd * (kd + 1.0) / static_cast<double>(T - k - 1);
  return ic;
}

Covariance observed_information(const Eigen::MatrixXd& hessian) {
  if (hessian.rows() != hessian.cols()) throw DimensionError("Hessian must be square");
  Covariance out;
  const Eigen::MatrixXd A = -0.5 * (hessian + hessian.transpose());
  if (A.size() == 0) return out;
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() == Eigen::Success) {
    out.matrix = llt.solve(Eigen::MatrixXd::Identity(A.rows(), A.cols()));
    out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double tol = std::max(ev.cwiseAbs().maxCoeff(), 1e-300) * 1e-12 * static_cast<double>(A.rows());
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > tol) inv[i] = 1.0 / ev[i];
  }
  out.matrix = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  out.degenerate = true;
  out.warning = "observed information is not positive definite; pseudo-inverse used";
  return out;
}

NewtonOutcome newton_maximize(std::span<const long> y, const ModelSpec& spec, const Eigen::VectorXd& v0,
                              const NewtonSettings& st, int max_iterations) {
  NewtonOutcome out;
  out.v = v0;
  auto ev = evaluate_at(y, spec, v0);
  if (!ev) {
    out.failed = true;
    return out;
  }
  const auto n = v0.size();
  double ridge_boost = 1.0;
  for (out.iterations = 0; out.iterations < max_iterations; ++out.iterations) {
    out.loglik = ev->loglik;
    out.gradient_norm = ev->gradient.lpNorm<Eigen::Infinity>();
    if (out.gradient_norm < st.gradient_tolerance) break;

    const Eigen::MatrixXd A = -ev->hessian;
    const double scale = std::max(A.cwiseAbs().maxCoeff(), 1e-300);
    double lambda = ridge_boost > 1.0 ? st.ridge_start * scale * ridge_boost : 0.0;
    Eigen::VectorXd d;
    for (int rung = 0; rung <= st.max_ridge_rungs; ++rung) {
      Eigen::LLT<Eigen::MatrixXd> llt(A + lambda * Eigen::MatrixXd::Identity(n, n));
      if (llt.info() == Eigen::Success) {
        d = llt.solve(ev->gradient);
        if (d.allFinite()) break;
      }
      d.resize(0);
      lambda = lambda == 0.0 ? st.ridge_start * scale : 2.0 * lambda;
    }
    if (d.size() == 0) d = ev->gradient / scale;
    const double dn = d.lpNorm<Eigen::Infinity>();
    if (dn > st.max_step) d *= st.max_step / dn;

    const double slope = ev->gradient.dot(d);
    double a = 1.0;
    bool accepted = false;
    Eigen::VectorXd trial;
    for (int bt = 0; bt < st.max_backtracks; ++bt, a *= 0.5) {
      trial = out.v + a * d;
      const double f = value_at(y, spec, trial);
      if (f > ev->loglik && f >= ev->loglik + st.armijo * a * slope) {
        accepted = true;
        break;
      }
    }
    if (accepted) {
      auto next = evaluate_at(y, spec, trial);
      if (!next) accepted = false;
      else {
        out.v = trial;
        ev = std::move(next);
        ridge_boost = 1.0;
        continue;
      }
    }
    if (relative_gradient_ok(out.gradient_norm, ev->loglik)) {
      out.stalled = true;
      break;
    }
    // push towards steepest ascent and try again
    ridge_boost = ridge_boost == 1.0 ? 1e4 : ridge_boost * 1e4;
    if (ridge_boost > 1e40) break;
  }
  out.loglik = ev->loglik;
  out.gradient_norm = ev->gradient.lpNorm<Eigen::Infinity>();
  out.converged = out.gradient_norm < st.gradient_tolerance ||
                  (out.stalled && relative_gradient_ok(out.gradient_norm, out.loglik));
  return out;
}

std::uint64_t hash_counts(std::span<const long> y) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (long v : y) {
    auto u = static_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      h ^= (u >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

FitResult fit(const CountSeries& y, const ModelSpec& spec, const FitConfig& cfg) {
  y.validate();
  auto res = fit(y.counts(), spec, cfg);
  res.origin = y.origin;
  return res;
}

FitResult fit(std::span<const long> y, const ModelSpec& spec, const FitConfig& cfg) {
  spec.validate();
  cfg.validate();
  const auto l = spec.layout();
  const long T = static_cast<long>(y.size());
  if (T <= l.size() + 2) {
    throw InsufficientData("series of length " + std::to_string(T) + " is too short for " +
                           std::to_string(l.size()) + " free parameters");
  }
  if (std::any_of(y.begin(), y.end(), [](long v) { return v < 0; })) throw DataError("negative count in series");
  if (std::all_of(y.begin(), y.end(), [](long v) { return v == 0; })) throw InsufficientData("series is all zero");
  if (spec.has_covariates() && spec.design_rows() < T) {
    throw DimensionError("design matrix has fewer rows than the series");
  }

  const UBox box = unconstrained_boxes(y, spec, cfg);
  Rng rng(cfg.seed);
  std::vector<Eigen::VectorXd> starts = latin_hypercube(box, cfg.n_starts, rng);
  std::vector<double> start_fit(starts.size());
  parallel_for(starts.size(), cfg.threads, [&](std::size_t i) { start_fit[i] = value_at(y, spec, starts[i]); });
  if (cfg.ga) {
    Rng ga_rng(derive_seed(cfg.seed, 1));
    genetic_refine(y, spec, box, *cfg.ga, starts, start_fit, ga_rng, cfg.threads);
  }

  // Short Newton runs on every start, then a full polish of the best fraction.
  std::vector<NewtonOutcome> screened(starts.size());
  parallel_for(starts.size(), cfg.threads, [&](std::size_t i) {
    screened[i] = newton_maximize(y, spec, starts[i], cfg.newton, cfg.newton.screening_iterations);
  });
  std::vector<std::size_t> order(screened.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double fa = screened[a].failed ? kNegInf : screened[a].loglik;
    const double fb = screened[b].failed ? kNegInf : screened[b].loglik;
    return fa > fb;
  });
  const auto n_polish = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(cfg.polish_fraction * static_cast<double>(starts.size()))));
  std::vector<Eigen::VectorXd> polish_from;
  for (std::size_t i = 0; i < std::min(n_polish, order.size()); ++i) {
    if (!screened[order[i]].failed) polish_from.push_back(screened[order[i]].v);
  }
  for (const auto& w : cfg.warm_starts) {
    if (w.size() != l.size()) throw DimensionError("warm start has wrong length");
    try {
      polish_from.push_back(to_unconstrained(w, spec).v);
    } catch (const DomainError&) {
      // outside the parameter domain, skip
    }
  }
  if (polish_from.empty()) {
    throw NonConvergence("no start produced a finite log-likelihood", {}, kNegInf);
  }

  std::vector<NewtonOutcome> polished(polish_from.size());
  parallel_for(polish_from.size(), cfg.threads, [&](std::size_t i) {
    polished[i] = newton_maximize(y, spec, polish_from[i], cfg.newton, cfg.newton.max_iterations);
  });

  // Best converged optimum; ties resolved by index for determinism.
  std::size_t best = polished.size();
  std::size_t best_any = polished.size();
  for (std::size_t i = 0; i < polished.size(); ++i) {
    if (polished[i].failed) continue;
    if (best_any == polished.size() || polished[i].loglik > polished[best_any].loglik) best_any = i;
    if (!polished[i].converged) continue;
    if (best == polished.size() || polished[i].loglik > polished[best].loglik) best = i;
  }
  if (best == polished.size()) {
    std::vector<double> theta;
    double ll = kNegInf;
    if (best_any < polished.size()) {
      const Eigen::VectorXd th = from_unconstrained(polished[best_any].v, spec);
      theta.assign(th.data(), th.data() + th.size());
      ll = polished[best_any].loglik;
    }
    throw NonConvergence("no start converged", std::move(theta), ll);
  }

  const NewtonOutcome& opt = polished[best];
  FitResult res;
  res.spec = spec;
  res.layout = l;
  res.v = opt.v;
  res.theta = from_unconstrained(opt.v, spec);
  const auto ev = evaluate_likelihood_unconstrained(y, spec, opt.v, true);
  res.loglik = ev.loglik;
  res.hessian = ev.hessian;
  res.covariance = observed_information(ev.hessian);
  res.covariance_theta = delta_covariance(res.covariance.matrix, res.theta, l);
  res.k = l.size();
  res.T = T;
  res.criteria = information_criteria(res.loglik, res.k, T);
  res.seed = cfg.seed;
  res.data_hash = hash_counts(y);

  auto& c = res.convergence;
  c.converged = true;
  c.gradient_norm = ev.gradient.lpNorm<Eigen::Infinity>();
  c.iterations = opt.iterations;
  c.stalled = opt.stalled;
  c.negative_definite = Eigen::LLT<Eigen::MatrixXd>(-ev.hessian).info() == Eigen::Success;
  c.starts_run = static_cast<int>(starts.size());
  c.starts_polished = static_cast<int>(polished.size());
  for (const auto& p : polished) {
    if (!p.failed) res.polished_logliks.push_back(p.loglik);
    if (p.converged && std::abs(p.loglik - res.loglik) < cfg.agreement_tolerance) ++c.starts_agreeing;
  }
  std::sort(res.polished_logliks.begin(), res.polished_logliks.end(), std::greater<>());
  if (!c.negative_definite) c.warnings.push_back("Hessian at the optimum is not negative definite");
  if (res.covariance.degenerate) c.warnings.push_back(res.covariance.warning);
  if (c.stalled) c.warnings.push_back("line search stalled; accepted on the relative gradient criterion");
  if (c.starts_agreeing < 2 && c.starts_polished > 1) c.warnings.push_back("only one polished start reached the optimum");
  const auto weak = weakly_identified(res.covariance.matrix);
  std::string weak_names;
  for (int i = 0; i < l.size(); ++i) {
    if (weak[static_cast<std::size_t>(i)]) weak_names += (weak_names.empty() ? "" : ", ") + l.names[static_cast<std::size_t>(i)];
  }
  if (!weak_names.empty()) {
    c.warnings.push_back("not identified by the data: " + weak_names +
                         "; intervals for these are unreliable and bootstrap draws will fail");
  }

  res.intervals = parameter_intervals(res);
  return res;
}

std::vector<ParameterInterval> parameter_intervals(const FitResult& fit, double level, IntervalScale scale) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidParameter("level must be in (0, 1)");
  const auto& l = fit.layout;
  if (fit.covariance.matrix.rows() != l.size()) throw DimensionError("fit has no covariance");
  const double z = boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 + 0.5 * level);
  const Eigen::VectorXd q = unconstrained_jacobian(fit.theta, l);
  const auto weak = weakly_identified(fit.covariance.matrix);
  std::vector<ParameterInterval> out;
  for (int i = 0; i < l.size(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    ParameterInterval pi;
    pi.name = l.names[ui];
    pi.estimate = fit.theta[i];
    const double var_v = fit.covariance.matrix(i, i);
    pi.reliable = !fit.covariance.degenerate && std::isfinite(var_v) && var_v >= 0.0 && !weak[ui];
    const double se_v = std::sqrt(std::max(var_v, 0.0));
    pi.std_error = std::abs(q[i]) * se_v;
    const bool positive = l.log_scaled[ui];
    if (scale == IntervalScale::Log && positive) {
      pi.lower = std::exp(fit.v[i] - z * se_v);
      pi.upper = std::exp(fit.v[i] + z * se_v);
    } else {
      pi.lower = pi.estimate - z * pi.std_error;
      pi.upper = pi.estimate + z * pi.std_error;
      if (positive) pi.lower = std::max(pi.lower, 0.0);
    }
    out.push_back(pi);
  }
  return out;
}

std::vector<ComparisonRow> compare_models(const std::vector<std::pair<std::string, const FitResult*>>& fits) {
  std::vector<ComparisonRow> rows;
  if (fits.empty()) return rows;
  const FitResult& ref = *fits.front().second;
  for (const auto& [label, f] : fits) {
    if (f->T != ref.T) throw DimensionError("fits cover different series lengths");
    if (f->data_hash != ref.data_hash) throw DataError("fits were made on different data");
    rows.push_back(ComparisonRow{label, f->loglik, f->k, f->criteria, 0.0});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
    if (a.criteria.aic != b.criteria.aic) return a.criteria.aic < b.criteria.aic;
    if (a.criteria.bic != b.criteria.bic) return a.criteria.bic < b.criteria.bic;
    return a.k < b.k;
  });
  for (auto& r : rows) r.delta_aic = r.criteria.aic - rows.front().criteria.aic;
  return rows;
}

}  // namespace richfit

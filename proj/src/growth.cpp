// Apache License, Version 2.0, refer to LICENSE.txt

#include "richfit/growth.hpp"

#include <cmath>
#include <limits>

#include "richfit/errors.hpp"

namespace richfit {

namespace {

constexpr double kLn10 = 2.302585092994045684;

// log(1 + e^z) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

// e^z / (1 + e^z)
double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// The r-free curve G(t) = (1 + 10^{h(p-t)})^{-s} and its derivatives over
// (h, p, s). Everything is evaluated through z = ln(10) h (p - t) so that
// 10^{h(p-t)} is never formed.
struct CurvePoint {
  double z = 0.0;
  double sp = 0.0;  // log(1 + 10^{h(p-t)})
  double w = 0.0;   // 10^{h(p-t)} / (1 + 10^{h(p-t)})
  double g = 0.0;
  Eigen::Vector3d dg = Eigen::Vector3d::Zero();
  Eigen::Matrix3d d2g = Eigen::Matrix3d::Zero();
};

enum { kH = 0, kP = 1, kS = 2 };

CurvePoint curve_point(double t, double h, double p, double s, bool second) {
  CurvePoint c;
  c.z = kLn10 * h * (p - t);
  c.sp = softplus(c.z);
  c.w = sigmoid(c.z);
  c.g = std::exp(-s * c.sp);
  const double a_h = kLn10 * (p - t);
  const double a_p = kLn10 * h;
  const double swg = s * c.w * c.g;
  c.dg[kH] = -swg * a_h;
  c.dg[kP] = -swg * a_p;
  c.dg[kS] = -c.sp * c.g;
  if (second) {
    // d/dz (s w G) = s w G (1 - w - s w)
    const double dfz = swg * (1.0 - c.w - s * c.w);
    const double ws = c.w * c.g * (1.0 - s * c.sp);
    c.d2g(kH, kH) = -dfz * a_h * a_h;
    c.d2g(kP, kP) = -dfz * a_p * a_p;
    c.d2g(kH, kP) = -dfz * a_h * a_p - swg * kLn10;
    c.d2g(kH, kS) = -a_h * ws;
    c.d2g(kP, kS) = -a_p * ws;
    c.d2g(kS, kS) = c.sp * c.sp * c.g;
    c.d2g(kP, kH) = c.d2g(kH, kP);
    c.d2g(kS, kH) = c.d2g(kH, kS);
    c.d2g(kS, kP) = c.d2g(kP, kS);
  }
  return c;
}

// G(t) - G(t-1) = -G(t) expm1(-s [sp(t-1) - sp(t)]), accurate on both tails.
double curve_step(const CurvePoint& cur, const CurvePoint& prev, double s) {
  return -cur.g * std::expm1(-s * (prev.sp - cur.sp));
}

void check_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw InvalidParameter(std::string("non-finite parameter ") + name);
}

}  // namespace

void RichardsParams::validate() const {
  check_finite(b, "b");
  check_finite(r, "r");
  check_finite(h, "h");
  check_finite(p, "p");
  check_finite(s, "s");
  if (b < 0.0) throw InvalidParameter("b must be >= 0");
  if (r <= 0.0) throw InvalidParameter("r must be > 0");
  if (h <= 0.0) throw InvalidParameter("h must be > 0");
  if (s <= 0.0) throw InvalidParameter("s must be > 0");
}

double richards(double t, const RichardsParams& g) {
  g.validate();
  if (!std::isfinite(t)) {
    if (std::isnan(t)) throw InvalidParameter("non-finite time");
    return t > 0 ? g.b + g.r : g.b;
  }
  return g.b + g.r * std::exp(-g.s * softplus(kLn10 * g.h * (g.p - t)));
}

double richards_diff(double t, const RichardsParams& g) {
  g.validate();
  if (std::isnan(t)) throw InvalidParameter("non-finite time");
  if (std::isinf(t)) return 0.0;
  const auto cur = curve_point(t, g.h, g.p, g.s, false);
  const auto prev = curve_point(t - 1.0, g.h, g.p, g.s, false);
  return g.r * curve_step(cur, prev, g.s);
}

std::array<double, 4> richards_gradient(double t, const RichardsParams& g) {
  g.validate();
  const auto c = curve_point(t, g.h, g.p, g.s, false);
  return {c.g, g.r * c.dg[kH], g.r * c.dg[kP], g.r * c.dg[kS]};
}

Eigen::Matrix4d richards_hessian(double t, const RichardsParams& g) {
  g.validate();
  const auto c = curve_point(t, g.h, g.p, g.s, true);
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  for (int i = 0; i < 3; ++i) {
    m(0, i + 1) = c.dg[i];
    m(i + 1, 0) = c.dg[i];
    for (int j = 0; j < 3; ++j) m(i + 1, j + 1) = g.r * c.d2g(i, j);
  }
  return m;
}

double peak_time(const RichardsParams& g) {
  g.validate();
  return g.p + std::log10(g.s) / g.h;
}

int ParamLayout::index_of(const std::string& name) const {
  for (int i = 0; i < size(); ++i) {
    if (names[i] == name) return i;
  }
  return -1;
}

void ModelSpec::validate() const {
  if (covariates == Covariates::Additive && baseline == Baseline::Constant) {
    throw InvalidParameter("additive covariates replace the constant baseline; use one or the other");
  }
  if (has_covariates()) {
    if (design.cols() < 1 || design.rows() < 1) throw InvalidParameter("covariate mode requires a design matrix");
    for (Eigen::Index i = 0; i < design.rows(); ++i) {
      if (design(i, 0) != 1.0) throw InvalidParameter("first design column must be the intercept (all ones)");
    }
    if (!design.allFinite()) throw InvalidParameter("design matrix has non-finite entries");
  }
}

long ModelSpec::design_rows() const {
  return has_covariates() ? static_cast<long>(design.rows()) : std::numeric_limits<long>::max();
}

ParamLayout ModelSpec::layout() const {
  ParamLayout l;
  auto add = [&l](const std::string& name, bool log_scaled) {
    l.names.push_back(name);
    l.log_scaled.push_back(log_scaled);
    return l.size() - 1;
  };
  if (baseline == Baseline::Constant) l.alpha = add("alpha", true);
  if (covariates != Covariates::Multiplicative) l.r = add("r", true);
  l.h = add("h", true);
  l.p = add("p", false);
  l.s = add("s", true);
  if (has_covariates()) {
    l.n_beta = static_cast<int>(design.cols());
    for (int j = 0; j < l.n_beta; ++j) {
      const int idx = add("beta" + std::to_string(j), false);
      if (j == 0) l.beta0 = idx;
    }
  }
  if (family == Family::NegBin) l.nu = add("nu", true);
  return l;
}

RichardsParams growth_params(const ModelSpec& spec, const Eigen::VectorXd& theta) {
  const auto l = spec.layout();
  if (theta.size() != l.size()) {
    throw DimensionError("parameter vector has " + std::to_string(theta.size()) + " entries, spec needs " +
                         std::to_string(l.size()));
  }
  RichardsParams g;
  g.r = l.r >= 0 ? theta[l.r] : 1.0;
  g.h = theta[l.h];
  g.p = theta[l.p];
  g.s = theta[l.s];
  return g;
}

namespace {

struct MeanContext {
  const ModelSpec& spec;
  ParamLayout layout;
  RichardsParams g;
  double alpha = 0.0;
  Eigen::VectorXd beta;

  MeanContext(const ModelSpec& sp, const Eigen::VectorXd& theta) : spec(sp), layout(sp.layout()) {
    sp.validate();
    g = growth_params(sp, theta);
    g.validate();
    if (layout.alpha >= 0) {
      alpha = theta[layout.alpha];
      if (!std::isfinite(alpha) || alpha < 0.0) throw InvalidParameter("alpha must be >= 0");
    }
    if (layout.n_beta > 0) {
      beta = theta.segment(layout.beta0, layout.n_beta);
      if (!beta.allFinite()) throw InvalidParameter("non-finite covariate coefficient");
    }
  }

  [[nodiscard]] double linear_exp(long t) const {
    if (t > spec.design_rows()) {
      throw DimensionError("design matrix has " + std::to_string(spec.design.rows()) + " rows, day " +
                           std::to_string(t) + " requested");
    }
    return std::exp(spec.design.row(t - 1).dot(beta));
  }

  // Fills mean / gradient / Hessian at day t given curve evaluations at t and t-1.
  void assemble(long t, const CurvePoint& cur, const CurvePoint& prev, bool second, MeanDerivatives& out) const {
    const int n = layout.mean_size();
    const double step = curve_step(cur, prev, g.s);
    const Eigen::Vector3d dstep = cur.dg - prev.dg;
    out.grad.setZero(n);
    if (second) out.hess.setZero(n, n);
    const int gi[3] = {layout.h, layout.p, layout.s};

    if (layout.alpha >= 0) out.grad[layout.alpha] = 1.0;

    if (spec.covariates == Covariates::Multiplicative) {
      const double m = linear_exp(t);
      out.mu = alpha + m * step;
      const auto x = spec.design.row(t - 1);
      for (int i = 0; i < 3; ++i) out.grad[gi[i]] = m * dstep[i];
      for (int j = 0; j < layout.n_beta; ++j) out.grad[layout.beta0 + j] = x[j] * m * step;
      if (second) {
        const Eigen::Matrix3d d2 = cur.d2g - prev.d2g;
        for (int i = 0; i < 3; ++i) {
          for (int k = 0; k < 3; ++k) out.hess(gi[i], gi[k]) = m * d2(i, k);
          for (int j = 0; j < layout.n_beta; ++j) {
            const double v = x[j] * m * dstep[i];
            out.hess(gi[i], layout.beta0 + j) = v;
            out.hess(layout.beta0 + j, gi[i]) = v;
          }
        }
        for (int j = 0; j < layout.n_beta; ++j) {
          for (int k = 0; k < layout.n_beta; ++k) out.hess(layout.beta0 + j, layout.beta0 + k) = x[j] * x[k] * m * step;
        }
      }
      return;
    }

    out.mu = g.r * step + alpha;
    out.grad[layout.r] = step;
    for (int i = 0; i < 3; ++i) out.grad[gi[i]] = g.r * dstep[i];
    if (second) {
      const Eigen::Matrix3d d2 = cur.d2g - prev.d2g;
      for (int i = 0; i < 3; ++i) {
        out.hess(layout.r, gi[i]) = dstep[i];
        out.hess(gi[i], layout.r) = dstep[i];
        for (int k = 0; k < 3; ++k) out.hess(gi[i], gi[k]) = g.r * d2(i, k);
      }
    }
    if (spec.covariates == Covariates::Additive) {
      const double m = linear_exp(t);
      out.mu += m;
      const auto x = spec.design.row(t - 1);
      for (int j = 0; j < layout.n_beta; ++j) out.grad[layout.beta0 + j] = x[j] * m;
      if (second) {
        for (int j = 0; j < layout.n_beta; ++j) {
          for (int k = 0; k < layout.n_beta; ++k) out.hess(layout.beta0 + j, layout.beta0 + k) = x[j] * x[k] * m;
        }
      }
    }
  }
};

void check_day(long t) {
  if (t < 1) throw DimensionError("daily means are defined for t >= 1, got " + std::to_string(t));
}

}  // namespace

double mean_daily(long t, const ModelSpec& spec, const Eigen::VectorXd& theta) {
  check_day(t);
  const MeanContext ctx(spec, theta);
  const double td = static_cast<double>(t);
  const auto cur = curve_point(td, ctx.g.h, ctx.g.p, ctx.g.s, false);
  const auto prev = curve_point(td - 1.0, ctx.g.h, ctx.g.p, ctx.g.s, false);
  const double step = curve_step(cur, prev, ctx.g.s);
  switch (spec.covariates) {
    case Covariates::Multiplicative:
      return ctx.alpha + ctx.linear_exp(t) * step;
    case Covariates::Additive:
      return ctx.linear_exp(t) + ctx.g.r * step;
    case Covariates::None:
      break;
  }
  return ctx.alpha + ctx.g.r * step;
}

Eigen::VectorXd mean_trajectory(long n, const ModelSpec& spec, const Eigen::VectorXd& theta) {
  const MeanContext ctx(spec, theta);
  Eigen::VectorXd out(n);
  auto prev = curve_point(0.0, ctx.g.h, ctx.g.p, ctx.g.s, false);
  for (long t = 1; t <= n; ++t) {
    auto cur = curve_point(static_cast<double>(t), ctx.g.h, ctx.g.p, ctx.g.s, false);
    const double step = curve_step(cur, prev, ctx.g.s);
    double mu = 0.0;
    switch (spec.covariates) {
      case Covariates::Multiplicative:
        mu = ctx.alpha + ctx.linear_exp(t) * step;
        break;
      case Covariates::Additive:
        mu = ctx.linear_exp(t) + ctx.g.r * step;
        break;
      case Covariates::None:
        mu = ctx.alpha + ctx.g.r * step;
        break;
    }
    out[t - 1] = mu;
    prev = cur;
  }
  return out;
}

Eigen::VectorXd mean_gradient(long t, const ModelSpec& spec, const Eigen::VectorXd& theta) {
  check_day(t);
  const MeanContext ctx(spec, theta);
  const double td = static_cast<double>(t);
  const auto cur = curve_point(td, ctx.g.h, ctx.g.p, ctx.g.s, false);
  const auto prev = curve_point(td - 1.0, ctx.g.h, ctx.g.p, ctx.g.s, false);
  MeanDerivatives d;
  ctx.assemble(t, cur, prev, false, d);
  return d.grad;
}

std::vector<MeanDerivatives> mean_derivatives(long n, const ModelSpec& spec, const Eigen::VectorXd& theta,
                                              bool with_hessian) {
  const MeanContext ctx(spec, theta);
  std::vector<MeanDerivatives> out(static_cast<std::size_t>(n));
  auto prev = curve_point(0.0, ctx.g.h, ctx.g.p, ctx.g.s, with_hessian);
  for (long t = 1; t <= n; ++t) {
    auto cur = curve_point(static_cast<double>(t), ctx.g.h, ctx.g.p, ctx.g.s, with_hessian);
    ctx.assemble(t, cur, prev, with_hessian, out[static_cast<std::size_t>(t - 1)]);
    prev = std::move(cur);
  }
  return out;
}

UnconstrainedVector to_unconstrained(const Eigen::VectorXd& theta, const ModelSpec& spec) {
  UnconstrainedVector u{theta, spec.layout()};
  if (theta.size() != u.layout.size()) throw DimensionError("parameter vector does not match the model layout");
  for (int i = 0; i < u.layout.size(); ++i) {
    if (!u.layout.log_scaled[i]) continue;
    if (!(theta[i] > 0.0) || !std::isfinite(theta[i])) {
      throw DomainError("parameter " + u.layout.names[i] + " must be strictly positive, got " +
                        std::to_string(theta[i]));
    }
    u.v[i] = std::log(theta[i]);
  }
  return u;
}

Eigen::VectorXd from_unconstrained(const Eigen::VectorXd& v, const ModelSpec& spec) {
  const auto layout = spec.layout();
  if (v.size() != layout.size()) throw DimensionError("unconstrained vector does not match the model layout");
  Eigen::VectorXd theta = v;
  for (int i = 0; i < layout.size(); ++i) {
    if (layout.log_scaled[i]) theta[i] = std::exp(v[i]);
  }
  return theta;
}

Eigen::VectorXd unconstrained_jacobian(const Eigen::VectorXd& theta, const ParamLayout& layout) {
  Eigen::VectorXd j = Eigen::VectorXd::Ones(theta.size());
  for (int i = 0; i < layout.size() && i < theta.size(); ++i) {
    if (layout.log_scaled[i]) j[i] = theta[i];
  }
  return j;
}

Eigen::VectorXd pull_back_gradient(const Eigen::VectorXd& grad, const Eigen::VectorXd& theta,
                                   const ParamLayout& layout) {
  return grad.cwiseProduct(unconstrained_jacobian(theta, layout));
}

Eigen::MatrixXd pull_back_hessian(const Eigen::MatrixXd& hess, const Eigen::VectorXd& grad,
                                  const Eigen::VectorXd& theta, const ParamLayout& layout) {
  const Eigen::VectorXd j = unconstrained_jacobian(theta, layout);
  Eigen::MatrixXd out = j.asDiagonal() * hess * j.asDiagonal();
  for (int i = 0; i < layout.size(); ++i) {
    if (layout.log_scaled[i]) out(i, i) += grad[i] * theta[i];
  }
  return out;
}

}  // namespace richfit

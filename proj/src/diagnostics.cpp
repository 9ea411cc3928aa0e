// Apache License, Version 2.0, refer to LICENSE.txt

#include "richfit/diagnostics.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numbers>
#include <numeric>

#include "richfit/errors.hpp"
#include "richfit/likelihood.hpp"

namespace richfit {

namespace {

const boost::math::normal_distribution<double> kStdNormal;

double poly(std::initializer_list<double> c, double x) {
  double out = 0.0;
  double p = 1.0;
  for (double ci : c) {
    out += ci * p;
    p *= x;
  }
  return out;
}

double upper_normal_tail(double z) { return boost::math::cdf(boost::math::complement(kStdNormal, z)); }

}  // namespace

double pseudo_r2(std::span<const double> y, std::span<const double> fitted) {
  if (y.size() != fitted.size()) throw DimensionError("observations and fitted values differ in length");
  if (y.size() < 2) throw InsufficientData("pseudo R2 needs at least 2 observations");
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - fitted[i]) * (y[i] - fitted[i]);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  if (ss_tot == 0.0) throw DomainError("pseudo R2 is undefined for a constant series");
  return 1.0 - ss_res / ss_tot;
}

double pseudo_r2(std::span<const long> y, std::span<const double> fitted) {
  std::vector<double> yd(y.begin(), y.end());
  return pseudo_r2(std::span<const double>(yd), fitted);
}

double empirical_coverage(std::span<const long> y, const PredictionBand& band) {
  if (band.lower.size() < y.size() || band.upper.size() < y.size()) {
    throw DimensionError("band covers " + std::to_string(band.lower.size()) + " days, series has " +
                         std::to_string(y.size()));
  }
  if (y.empty()) throw DimensionError("empty series");
  long inside = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto v = static_cast<double>(y[i]);
    inside += band.lower[i] <= v && v <= band.upper[i];
  }
  return static_cast<double>(inside) / static_cast<double>(y.size());
}

AcfResult acf(std::span<const double> x, int max_lag) {
  const auto T = static_cast<long>(x.size());
  if (max_lag < 0) throw InvalidParameter("max_lag must be >= 0");
  if (max_lag >= T - 1) throw DimensionError("max_lag must be below T - 1");
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(T);
  double c0 = 0.0;
  for (double v : x) c0 += (v - mean) * (v - mean);
  if (c0 == 0.0) throw DomainError("autocorrelation of a constant series");
  AcfResult out;
  out.values.resize(static_cast<std::size_t>(max_lag) + 1);
  for (int k = 0; k <= max_lag; ++k) {
    double ck = 0.0;
    for (long t = 0; t + k < T; ++t) ck += (x[static_cast<std::size_t>(t)] - mean) * (x[static_cast<std::size_t>(t + k)] - mean);
    out.values[static_cast<std::size_t>(k)] = ck / c0;
  }
  out.band = 1.96 / std::sqrt(static_cast<double>(T));
  return out;
}

NormalityTest shapiro_wilk(std::span<const double> data) {
  const auto n = data.size();
  if (n < 3 || n > 5000) throw InvalidParameter("Shapiro-Wilk needs 3 <= n <= 5000");
  std::vector<double> x(data.begin(), data.end());
  std::sort(x.begin(), x.end());
  if (x.back() - x.front() < 1e-19 * std::max(1.0, std::abs(x.front()))) {
    throw DomainError("Shapiro-Wilk is undefined for a constant sample");
  }
  const double an = static_cast<double>(n);

  // Coefficients: Royston's approximations for the two extreme weights, the
  // rest proportional to expected normal order statistics.
  std::vector<double> a(n, 0.0);
  if (n == 3) {
    a[0] = -std::numbers::sqrt2 / 2.0;
    a[2] = std::numbers::sqrt2 / 2.0;
  } else {
    std::vector<double> m(n);
    double summ2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = boost::math::quantile(kStdNormal, (static_cast<double>(i + 1) - 0.375) / (an + 0.25));
      summ2 += m[i] * m[i];
    }
    const double ssumm2 = std::sqrt(summ2);
    const double u = 1.0 / std::sqrt(an);
    // positive weights on the upper half
    const double c_n = m[n - 1] / ssumm2;
    const double w_n = c_n + poly({0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056}, u);
    std::size_t first = 1;
    double phi = 0.0;
    if (n > 5) {
      const double c_n1 = m[n - 2] / ssumm2;
      const double w_n1 = c_n1 + poly({0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633}, u);
      phi = (summ2 - 2.0 * m[n - 1] * m[n - 1] - 2.0 * m[n - 2] * m[n - 2]) /
            (1.0 - 2.0 * w_n * w_n - 2.0 * w_n1 * w_n1);
      a[n - 2] = w_n1;
      a[1] = -w_n1;
      first = 2;
    } else {
      phi = (summ2 - 2.0 * m[n - 1] * m[n - 1]) / (1.0 - 2.0 * w_n * w_n);
    }
    a[n - 1] = w_n;
    a[0] = -w_n;
    const double root = std::sqrt(phi);
    for (std::size_t i = first; i < n - first; ++i) a[i] = m[i] / root;
  }

  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / an;
  double ssq = 0.0;
  double num = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ssq += (x[i] - mean) * (x[i] - mean);
    num += a[i] * x[i];
  }
  NormalityTest out;
  out.method = "shapiro-wilk (royston)";
  out.statistic = std::min(1.0, num * num / ssq);
  const double w = out.statistic;

  if (n == 3) {
    const double p = 6.0 / std::numbers::pi * (std::asin(std::sqrt(w)) - std::asin(std::sqrt(0.75)));
    out.p_value = std::clamp(p, 0.0, 1.0);
    return out;
  }
  const double y = std::log1p(-w);
  double z = 0.0;
  if (n <= 11) {
    const double gamma = poly({-2.273, 0.459}, an);
    if (y >= gamma) {
      out.p_value = 0.0;
      return out;
    }
    const double m = poly({0.544, -0.39978, 0.025054, -6.714e-4}, an);
    const double s = std::exp(poly({1.3822, -0.77857, 0.062767, -0.0020322}, an));
    z = (-std::log(gamma - y) - m) / s;
  } else {
    const double ln = std::log(an);
    const double m = poly({-1.5861, -0.31082, -0.083751, 0.0038915}, ln);
    const double s = std::exp(poly({-0.4803, -0.082676, 0.0030302}, ln));
    z = (y - m) / s;
  }
  out.p_value = std::clamp(upper_normal_tail(z), 0.0, 1.0);
  return out;
}

NormalityTest jarque_bera(std::span<const double> x) {
  const auto n = static_cast<double>(x.size());
  if (x.size() < 3) throw InvalidParameter("Jarque-Bera needs n >= 3");
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (m2 == 0.0) throw DomainError("Jarque-Bera is undefined for a constant sample");
  const double skew = m3 / std::pow(m2, 1.5);
  const double kurt = m4 / (m2 * m2);
  NormalityTest out;
  out.method = "jarque-bera";
  out.statistic = n / 6.0 * (skew * skew + 0.25 * (kurt - 3.0) * (kurt - 3.0));
  out.p_value = std::exp(-0.5 * out.statistic);
  return out;
}

NormalityTest normality_test(std::span<const double> x) {
  return x.size() <= 5000 ? shapiro_wilk(x) : jarque_bera(x);
}

std::array<WeekdayGroup, 7> weekday_residual_summary(std::span<const double> residuals,
                                                    std::span<const Date> dates) {
  if (residuals.size() != dates.size()) throw DimensionError("residuals and dates differ in length");
  std::array<std::vector<double>, 7> groups;
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    groups[static_cast<std::size_t>(dates[i].weekday())].push_back(residuals[i]);
  }
  std::array<WeekdayGroup, 7> out;
  for (std::size_t d = 0; d < 7; ++d) {
    auto& g = out[d];
    g.day = static_cast<Weekday>(d);
    g.n = static_cast<long>(groups[d].size());
    if (groups[d].empty()) continue;
    g.median = quantile(groups[d], 0.5);
    g.q1 = quantile(groups[d], 0.25);
    g.q3 = quantile(groups[d], 0.75);
    g.min = *std::min_element(groups[d].begin(), groups[d].end());
    g.max = *std::max_element(groups[d].begin(), groups[d].end());
  }
  return out;
}

DiagnosticsReport diagnose(const CountSeries& y, const FitResult& fit, const PredictionBand& band, int max_lag) {
  if (y.size() != fit.T) throw DimensionError("series length differs from the fitted length");
  DiagnosticsReport rep;
  const Eigen::VectorXd mu = mean_trajectory(y.size(), fit.spec, fit.theta);
  rep.fitted.assign(mu.data(), mu.data() + mu.size());
  const double nu = fit.spec.family == Family::NegBin ? dispersion(fit.spec, fit.theta) : 0.0;
  const Eigen::VectorXd res = pearson_residuals(y.counts(), rep.fitted, fit.spec.family, nu);
  rep.residuals.assign(res.data(), res.data() + res.size());
  rep.r2 = pseudo_r2(y.counts(), rep.fitted);
  rep.coverage = empirical_coverage(y.counts(), band);
  rep.acf = acf(rep.residuals, std::min<int>(max_lag, static_cast<int>(y.size()) - 2));
  rep.normality = normality_test(rep.residuals);
  const auto dates = y.dates();
  rep.weekday = weekday_residual_summary(rep.residuals, dates);
  return rep;
}

}  // namespace richfit

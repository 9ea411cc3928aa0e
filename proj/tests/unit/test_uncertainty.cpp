// Apache License, Version 2.0, refer to LICENSE.txt

#include <doctest.h>

#include <cmath>

#include "richfit/errors.hpp"
#include "richfit/likelihood.hpp"
#include "richfit/uncertainty.hpp"
#include "support/oracles.hpp"

using namespace richfit;
using richfit::testing::sort_quantile;

namespace {

ModelSpec nb_baseline() {
  ModelSpec spec;
  spec.family = Family::NegBin;
  spec.baseline = Baseline::Constant;
  return spec;
}

Eigen::VectorXd truth() {
  Eigen::VectorXd th(6);
  th << 60.0, 80000.0, 0.04, 55.0, 1.5, 15.0;
  return th;
}

const FitResult& shared_fit() {
  static const FitResult f = [] {
    const auto y = sample_counts(nb_baseline(), truth(), 120, 31);
    FitConfig cfg;
    cfg.seed = 4;
    return fit(y, nb_baseline(), cfg);
  }();
  return f;
}

const std::vector<long>& shared_counts() {
  static const std::vector<long> y = sample_counts(nb_baseline(), truth(), 120, 31).values;
  return y;
}

// band levels as the library maps them
constexpr double kLo = 0.5 - 0.5 * 0.95;
constexpr double kHi = 0.5 + 0.5 * 0.95;

std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index c) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) out[static_cast<std::size_t>(r)] = m(r, c);
  return out;
}

}  // namespace

TEST_CASE("quantile matches the sort oracle") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n01;
  for (int n : {1, 2, 7, 100, 1001}) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = n01(rng);
    for (double q : {0.0, 0.025, 0.1, 0.5, 0.9, 0.975, 1.0}) CHECK(quantile(v, q) == sort_quantile(v, q));
  }
  CHECK_THROWS_AS(quantile({}, 0.5), DimensionError);
}

TEST_CASE("zero covariance: every draw is theta hat, bands and peak collapse") {
  FitResult f = shared_fit();
  f.covariance.matrix.setZero();
  const auto ens = draw_ensemble(f, 50, f.T + 10, 1);
  for (int b = 0; b < ens.B; ++b) {
    for (int j = 0; j < f.k; ++j) CHECK(ens.thetas(b, j) == doctest::Approx(f.theta[j]).epsilon(1e-15));
  }
  const auto pk = peak_interval(ens);
  CHECK(pk.lower == doctest::Approx(pk.point).epsilon(1e-12));
  CHECK(pk.upper == doctest::Approx(pk.point).epsilon(1e-12));
  const auto mb = prediction_band(ens, f, 0.95, 10, BandSource::Means);
  for (std::size_t t = 0; t < mb.t.size(); ++t) {
    CHECK(mb.lower[t] == doctest::Approx(mb.point[t]).epsilon(1e-12));
    CHECK(mb.upper[t] == doctest::Approx(mb.point[t]).epsilon(1e-12));
  }
}

TEST_CASE("draws centre on theta hat and are deterministic") {
  const auto& f = shared_fit();
  const int B = 4000;
  const auto e1 = draw_ensemble(f, B, f.T, 77, 1);
  const auto e3 = draw_ensemble(f, B, f.T, 77, 3);
  CHECK(e1.thetas == e3.thetas);
  CHECK(e1.counts == e3.counts);
  CHECK(e1.means == e3.means);

  for (int j = 0; j < f.k; ++j) {
    double mean = 0.0;
    for (int b = 0; b < B; ++b) {
      const double th = e1.thetas(b, j);
      mean += f.layout.log_scaled[static_cast<std::size_t>(j)] ? std::log(th) : th;
    }
    mean /= B;
    const double sd = std::sqrt(f.covariance.matrix(j, j));
    CHECK(std::abs(mean - f.v[j]) < 3.0 * sd / std::sqrt(static_cast<double>(B)));
  }
  CHECK((e1.means.array() >= 0.0).all());
  CHECK(e1.means.allFinite());

  const auto other = draw_ensemble(f, 10, f.T, 78, 1);
  CHECK(other.thetas.row(0) != e1.thetas.row(0));
}

TEST_CASE("prediction bands") {
  const auto& f = shared_fit();
  const auto ens = draw_ensemble(f, 2000, f.T + 20, 9);
  const auto band = prediction_band(ens, f, 0.95, 20);
  REQUIRE(band.t.size() == static_cast<std::size_t>(f.T + 20));
  CHECK(band.reliable);
  CHECK(band.repairs == 0);
  const Eigen::VectorXd point = mean_trajectory(f.T + 20, f.spec, f.theta);
  for (std::size_t t = 0; t < band.t.size(); ++t) {
    const auto c = column(ens.counts, static_cast<Eigen::Index>(t));
    CHECK(band.lower[t] == sort_quantile(c, kLo));
    CHECK(band.upper[t] == sort_quantile(c, kHi));
    CHECK(band.point[t] == point[static_cast<Eigen::Index>(t)]);
    CHECK(band.lower[t] <= band.upper[t]);
  }

  const auto narrow = prediction_band(ens, f, 0.80, 20);
  const auto median = prediction_band(ens, f, 0.0, 20);
  const auto means = prediction_band(ens, f, 0.95, 20, BandSource::Means);
  for (std::size_t t = 0; t < band.t.size(); ++t) {
    CHECK(narrow.lower[t] >= band.lower[t]);
    CHECK(narrow.upper[t] <= band.upper[t]);
    CHECK(median.lower[t] == median.upper[t]);
    CHECK(median.lower[t] == sort_quantile(column(ens.counts, static_cast<Eigen::Index>(t)), 0.5));
    CHECK(band.upper[t] - band.lower[t] >= means.upper[t] - means.lower[t]);
  }

  // in-sample coverage of the count band
  const auto& y = shared_counts();
  int inside = 0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    inside += band.lower[t] <= static_cast<double>(y[t]) && static_cast<double>(y[t]) <= band.upper[t];
  }
  const double cov = static_cast<double>(inside) / static_cast<double>(y.size());
  CHECK(cov >= 0.88);

  CHECK_THROWS_AS(prediction_band(ens, f, 0.95, 21), DimensionError);
  CHECK_THROWS_AS(prediction_band(ens, f, 1.0, 0), InvalidParameter);
  const auto small = draw_ensemble(f, 20, f.T, 1);
  CHECK_FALSE(prediction_band(small, f).reliable);
}

TEST_CASE("cumulative bands") {
  const auto& f = shared_fit();
  const auto ens = draw_ensemble(f, 1000, f.T, 12);
  const auto daily = prediction_band(ens, f);
  const auto cum = cumulative_band(ens, f);
  double run = 0.0;
  for (std::size_t t = 0; t < cum.t.size(); ++t) {
    run += daily.point[t];
    CHECK(cum.point[t] == doctest::Approx(run).epsilon(1e-14));
  }
  const auto T = static_cast<std::size_t>(f.T);
  CHECK(cum.upper[T - 1] - cum.lower[T - 1] >= cum.upper[T / 2 - 1] - cum.lower[T / 2 - 1]);

  const auto one = draw_ensemble(f, 1, f.T, 12);
  const auto single = cumulative_band(one, f);
  double path = 0.0;
  for (std::size_t t = 0; t < single.t.size(); ++t) {
    path += one.counts(0, static_cast<Eigen::Index>(t));
    CHECK(single.lower[t] == path);
    CHECK(single.upper[t] == path);
  }
}

TEST_CASE("peak interval") {
  const auto& f = shared_fit();
  const auto ens = draw_ensemble(f, 1000, f.T, 5);
  const auto pk = peak_interval(ens);
  CHECK(pk.point == peak_time(growth_params(f.spec, f.theta)));
  CHECK(pk.lower == sort_quantile(pk.draws, kLo));
  CHECK(pk.upper == sort_quantile(pk.draws, kHi));
  CHECK(pk.lower <= pk.point);
  CHECK(pk.point <= pk.upper);
  CHECK(pk.reliable);
  // truth: 55 + log10(1.5) / 0.04
  const double true_peak = 55.0 + std::log10(1.5) / 0.04;
  CHECK(pk.lower <= true_peak);
  CHECK(true_peak <= pk.upper);
  CHECK(pk.point_date == Date(2020, 1, 1) + std::lround(pk.point));
}

TEST_CASE("ensemble preconditions") {
  FitResult f = shared_fit();
  CHECK_THROWS_AS(draw_ensemble(f, 0, f.T, 1), InvalidParameter);
  f.covariance.degenerate = true;
  CHECK_THROWS_AS(draw_ensemble(f, 10, f.T, 1), DomainError);
}

TEST_CASE("fits on the Gompertz ridge are flagged and refuse to bootstrap") {
  // this replicate's optimum sits at s -> inf, where p and s trade off freely
  Eigen::VectorXd th(6);
  th << 175.04, 221940.0, 0.029, -32.29, 77.74, 18.76;
  FitConfig cfg;
  cfg.n_starts = 20;
  cfg.threads = 1;
  const auto f = fit(sample_counts(nb_baseline(), th, 150, 11), nb_baseline(), cfg);
  REQUIRE(f.theta[f.layout.s] > 1e6);
  const auto iv = parameter_intervals(f);
  CHECK(iv[static_cast<std::size_t>(f.layout.alpha)].reliable);
  CHECK(iv[static_cast<std::size_t>(f.layout.h)].reliable);
  CHECK(!iv[static_cast<std::size_t>(f.layout.p)].reliable);
  CHECK(!iv[static_cast<std::size_t>(f.layout.s)].reliable);
  bool warned = false;
  for (const auto& w : f.convergence.warnings) warned |= w.find("not identified") != std::string::npos;
  CHECK(warned);
  CHECK_THROWS_AS(draw_ensemble(f, 50, f.T, 1), DomainError);

  for (const auto& p : parameter_intervals(shared_fit())) CHECK(p.reliable);
}

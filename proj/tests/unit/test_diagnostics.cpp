// Apache License, Version 2.0, refer to LICENSE.txt

#include <doctest.h>

#include <cmath>
#include <random>

#include "richfit/diagnostics.hpp"
#include "richfit/errors.hpp"

using namespace richfit;

namespace {

struct SwCase {
  std::vector<double> x;
  double w;
  double p;
};

// Reference values from an independent Shapiro-Wilk implementation (scipy 1.15).
const std::vector<SwCase>& sw_cases() {
  static const std::vector<SwCase> cases = {
      {{1.0, 2.5, 2.6}, 0.796680497925311, 0.10659798663498787},
      {{0.3, -1.2, 2.2, 0.9, 0.1}, 0.9811691943636808, 0.940776697076481},
      {{-1.4238, 1.2637, -0.8707, -0.2592, -0.0753, -0.7409, -1.3678, 0.6489}, 0.9379015563247027,
       0.5905585806019719},
      {{0.6181, 0.537, 0.6345, 0.1744, 0.2482, 0.6848, 0.0809, 0.8751, 0.4287, 0.6184, 0.3131},
       0.9584013189491836, 0.7515968933040937},
      {{0.3611, -1.9529, 2.3474, 0.9685, -0.7594, 0.9022, -0.467, -0.0607, 0.7888, -1.2567,
        0.5759, 1.399, 1.3223, -0.2997, 0.9029, -1.6216, -0.1582, 0.4495, -1.3436, -0.0817},
       0.9785273478921773, 0.9136955301389316},
      {{0.3136, 0.3492, 0.1624, 1.6988, 2.3718, 3.1929, 1.2813, 1.6718, 1.0882, 2.1467,
        0.7026, 0.0888, 0.434, 2.3997, 1.0875, 3.26, 0.5799, 0.502, 0.5083, 0.4023,
        0.0094, 0.7866, 0.1173, 0.0654, 1.0381, 0.0543, 0.9124, 1.0399, 0.4583, 1.1949,
        4.1253, 2.1342, 0.386, 0.0865, 1.3487, 0.7546, 1.2005, 0.1506, 1.3544, 0.5555,
        0.1593, 0.1692, 1.1748, 0.2912, 1.4315, 0.587, 0.309, 4.4697, 0.1, 0.1807},
       0.816216758693235, 2.1164755554079886e-06},
  };
  return cases;
}

}  // namespace

TEST_CASE("pseudo R2") {
  const std::vector<double> y{1, 4, 2, 8, 5};
  CHECK(pseudo_r2(y, y) == 1.0);
  const std::vector<double> flat(5, 4.0);
  CHECK(pseudo_r2(y, flat) == doctest::Approx(0.0).scale(1.0));
  std::vector<double> yc = y, fc{1.5, 3.0, 2.5, 7.0, 5.5}, yc2 = y, fc2 = fc;
  for (auto& v : yc2) v += 1000.0;
  for (auto& v : fc2) v += 1000.0;
  CHECK(pseudo_r2(yc2, fc2) == doctest::Approx(pseudo_r2(yc, fc)).epsilon(1e-12));
  CHECK(pseudo_r2(y, fc) <= 1.0);
  const std::vector<double> c(5, 3.0);
  CHECK_THROWS_AS(pseudo_r2(c, c), DomainError);
  CHECK_THROWS_AS(pseudo_r2(y, std::vector<double>{1.0}), DimensionError);
}

TEST_CASE("empirical coverage") {
  const std::vector<long> y{3, 5, 7, 9};
  PredictionBand band;
  band.lower = {3, 0, 0, 0, 0};
  band.upper = {3, 10, 10, 8, 0};
  CHECK(empirical_coverage(y, band) == doctest::Approx(0.75));  // endpoints inclusive
  PredictionBand wide = band;
  wide.upper[3] = 9;
  CHECK(empirical_coverage(y, wide) >= empirical_coverage(y, band));
  PredictionBand zero;
  zero.lower = {2.5, 4.5, 6.5, 8.5};
  zero.upper = zero.lower;
  CHECK(empirical_coverage(y, zero) == 0.0);
  PredictionBand short_band;
  short_band.lower = {0, 0};
  short_band.upper = {1, 1};
  CHECK_THROWS_AS(empirical_coverage(y, short_band), DimensionError);
}

TEST_CASE("autocorrelation") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n01;
  std::vector<double> noise(500);
  for (auto& v : noise) v = n01(rng);
  const auto a = acf(noise, 20);
  CHECK(a.values[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(a.band == doctest::Approx(1.96 / std::sqrt(500.0)));
  for (int k = 1; k <= 20; ++k) CHECK(std::abs(a.values[static_cast<std::size_t>(k)]) < 4.0 / std::sqrt(500.0));

  std::vector<double> weekly(140);
  for (std::size_t t = 0; t < weekly.size(); ++t) weekly[t] = t % 7 == 0 ? 3.0 : (t % 7 == 3 ? -1.0 : 0.2 * static_cast<double>(t % 7));
  const auto w = acf(weekly, 10);
  for (int k = 1; k <= 6; ++k) CHECK(w.values[7] > w.values[static_cast<std::size_t>(k)]);

  CHECK_THROWS_AS(acf(noise, 499), DimensionError);
  CHECK_THROWS_AS(acf(std::vector<double>(10, 1.0), 2), DomainError);
}

TEST_CASE("Shapiro-Wilk against reference values") {
  for (const auto& c : sw_cases()) {
    const auto r = shapiro_wilk(c.x);
    CHECK(r.statistic == doctest::Approx(c.w).epsilon(1e-6));
    CHECK(r.p_value == doctest::Approx(c.p).epsilon(1e-4));
  }
  CHECK_THROWS_AS(shapiro_wilk(std::vector<double>(20, 2.0)), DomainError);
  CHECK_THROWS_AS(shapiro_wilk(std::vector<double>{1.0, 2.0}), InvalidParameter);
  CHECK(normality_test(sw_cases()[4].x).method == "shapiro-wilk (royston)");
}

TEST_CASE("Shapiro-Wilk size and power by simulation") {
  std::mt19937_64 rng(2020);
  std::normal_distribution<double> n01;
  std::exponential_distribution<double> ex(1.0);
  int normal_ok = 0, exp_rejected = 0;
  const int reps = 500;
  std::vector<double> x(200);
  for (int r = 0; r < reps; ++r) {
    for (auto& v : x) v = n01(rng);
    normal_ok += shapiro_wilk(x).p_value > 0.01;
    for (auto& v : x) v = ex(rng);
    exp_rejected += shapiro_wilk(x).p_value < 0.01;
  }
  CHECK(normal_ok >= 490);
  CHECK(exp_rejected >= 490);
}

TEST_CASE("Jarque-Bera") {
  // reference from scipy 1.15
  const auto r = jarque_bera(sw_cases()[4].x);
  CHECK(r.statistic == doctest::Approx(0.324250035049122).epsilon(1e-10));
  CHECK(r.p_value == doctest::Approx(0.8503348911317148).epsilon(1e-10));
  std::vector<double> big(6000);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  for (auto& v : big) v = n01(rng);
  CHECK(normality_test(big).method == "jarque-bera");
}

TEST_CASE("weekday residual summary") {
  const Date start(2020, 3, 1);  // a Sunday
  std::vector<Date> dates;
  std::vector<double> zero, shifted;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  for (int i = 0; i < 140; ++i) {
    dates.push_back(start + i);
    zero.push_back(0.0);
    shifted.push_back(0.3 * n01(rng) - (dates.back().weekday() == 1 ? 2.0 : 0.0));
  }
  CHECK(Date(2020, 3, 2).weekday() == static_cast<int>(Weekday::Mon));
  for (const auto& g : weekday_residual_summary(zero, dates)) {
    CHECK(g.n == 20);
    CHECK(g.median == 0.0);
  }
  const auto groups = weekday_residual_summary(shifted, dates);
  int lowest = 0;
  for (int d = 1; d < 7; ++d) {
    if (groups[static_cast<std::size_t>(d)].median < groups[static_cast<std::size_t>(lowest)].median) lowest = d;
  }
  CHECK(lowest == static_cast<int>(Weekday::Mon));
  CHECK(groups[1].q1 <= groups[1].median);
  CHECK(groups[1].median <= groups[1].q3);
  CHECK_THROWS_AS(weekday_residual_summary(zero, std::vector<Date>(3)), DimensionError);
}

// Apache License, Version 2.0, refer to LICENSE.txt

#include <doctest.h>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_dec_float.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>
#include <random>

#include "richfit/errors.hpp"
#include "richfit/special.hpp"

using namespace richfit;

TEST_CASE("digamma and trigamma against boost") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-6.0, 8.0);
  for (int k = 0; k < 2000; ++k) {
    const double x = std::pow(10.0, u(rng));
    CHECK(digamma(x) == doctest::Approx(boost::math::digamma(x)).epsilon(1e-13).scale(1.0));
    CHECK(trigamma(x) == doctest::Approx(boost::math::trigamma(x)).epsilon(1e-13));
  }
  CHECK(digamma(1.0) == doctest::Approx(-0.57721566490153286).epsilon(1e-15));
  CHECK(trigamma(1.0) == doctest::Approx(M_PI * M_PI / 6.0).epsilon(1e-15));
  CHECK_THROWS_AS(digamma(0.0), DomainError);
  CHECK_THROWS_AS(trigamma(-1.0), DomainError);
}

TEST_CASE("gamma ratios match direct differences") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2.0, 6.0);
  for (int k = 0; k < 2000; ++k) {
    const double x = std::pow(10.0, u(rng));
    const long n = static_cast<long>(rng() % 5000);
    const double xn = x + static_cast<double>(n);
    using Big = boost::multiprecision::cpp_dec_float_50;
    const Big lg = boost::math::lgamma(Big(x) + n) - boost::math::lgamma(Big(x));
    CHECK(lgamma_ratio(x, n) == doctest::Approx(static_cast<double>(lg)).epsilon(1e-12).scale(1.0));
    CHECK(digamma_ratio(x, n) ==
          doctest::Approx(boost::math::digamma(xn) - boost::math::digamma(x)).epsilon(1e-11).scale(1.0));
    CHECK(trigamma_ratio(x, n) ==
          doctest::Approx(boost::math::trigamma(xn) - boost::math::trigamma(x)).epsilon(1e-10).scale(1e-12));
  }
  CHECK(lgamma_ratio(3.5, 0) == 0.0);
  CHECK(digamma_ratio(3.5, 1) == doctest::Approx(1.0 / 3.5).epsilon(1e-15));
}

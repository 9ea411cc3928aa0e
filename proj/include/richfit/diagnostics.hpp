// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "richfit/dates.hpp"
#include "richfit/uncertainty.hpp"

namespace richfit {

/// 1 - sum (y - yhat)^2 / sum (y - ybar)^2.
double pseudo_r2(std::span<const double> y, std::span<const double> fitted);
double pseudo_r2(std::span<const long> y, std::span<const double> fitted);

/// Share of y_t inside [lower_t, upper_t] (inclusive) over the first |y| band days.
double empirical_coverage(std::span<const long> y, const PredictionBand& band);

struct AcfResult {
  std::vector<double> values;  ///< values[k] = autocorrelation at lag k, values[0] = 1
  double band = 0.0;           ///< 1.96 / sqrt(T)
};

AcfResult acf(std::span<const double> x, int max_lag);

struct NormalityTest {
  double statistic = 0.0;
  double p_value = 0.0;
  std::string method;
};

/// Shapiro-Wilk W with Royston's approximation; 3 <= n <= 5000.
NormalityTest shapiro_wilk(std::span<const double> x);
/// Jarque-Bera with the chi-square(2) tail.
NormalityTest jarque_bera(std::span<const double> x);
/// Shapiro-Wilk up to n = 5000, Jarque-Bera beyond.
NormalityTest normality_test(std::span<const double> x);

struct WeekdayGroup {
  Weekday day = Weekday::Sun;
  long n = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Residual distribution per day of week, Sunday first. Empty groups have n = 0.
std::array<WeekdayGroup, 7> weekday_residual_summary(std::span<const double> residuals,
                                                    std::span<const Date> dates);

struct DiagnosticsReport {
  double r2 = 0.0;
  double coverage = 0.0;
  AcfResult acf;
  NormalityTest normality;
  std::array<WeekdayGroup, 7> weekday;
  std::vector<double> residuals;  ///< Pearson
  std::vector<double> fitted;
};

/// All diagnostics of a fit against its in-sample band.
DiagnosticsReport diagnose(const CountSeries& y, const FitResult& fit, const PredictionBand& band,
                           int max_lag = 21);

}  // namespace richfit

// Apache License, Version 2.0, refer to LICENSE.txt

// Rolling-origin backtests: step-ahead RMSPE grids and peak anticipation.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "richfit/estimator.hpp"
#include "richfit/series.hpp"

namespace richfit {

/// sqrt(mean((y - yhat)^2)).
double rmspe(std::span<const double> y, std::span<const double> yhat);
double rmspe(std::span<const long> y, std::span<const double> yhat);

struct GridCell {
  long window_end = 0;  ///< last fitted day t~
  Date window_end_date;
  int horizon = 0;
  double rmspe = 0.0;  ///< NaN when the fit failed
  bool converged = false;
  std::string message;  ///< failure reason, empty on success
};

struct BacktestGrid {
  Date origin;
  std::vector<long> window_ends;
  std::vector<int> horizons;
  /// Row-major: cells[i * horizons.size() + j] is window i, horizon j.
  std::vector<GridCell> cells;
  std::vector<std::string> warnings;

  [[nodiscard]] const GridCell& at(std::size_t window, std::size_t horizon) const {
    return cells[window * horizons.size() + horizon];
  }
  /// Mean RMSPE at `horizon` over converged cells whose window end lies in
  /// [from, to]; NaN when there are none.
  [[nodiscard]] double mean_rmspe(int horizon, long from, long to) const;
};

/// For each window end t~ fits y_1..y_t~ and scores the mean forecast for
/// t~+1..t~+K against y. Windows are fitted in increasing order, each warm
/// started from the previous optimum. Windows with t~ + K > T are rejected.
BacktestGrid backtest_grid(const CountSeries& y, const ModelSpec& spec, const FitConfig& cfg,
                           const std::vector<long>& window_ends, const std::vector<int>& horizons);

struct TruePeak {
  long t = 0;
  Date date;
  double value = 0.0;  ///< smoothed count at the peak
  int window = 7;
  std::string method;
  std::vector<std::string> warnings;
};

/// Argmax of the centered moving average (odd `window`), earliest on ties.
TruePeak smoothed_true_peak(const CountSeries& y, int window = 7);

struct PeakBacktestRow {
  int offset = 0;       ///< days before the true peak
  long window_end = 0;  ///< true peak t minus offset
  Date window_end_date;
  bool converged = false;
  std::string message;
  double point = 0.0;  ///< estimated peak day
  double lower = 0.0;
  double upper = 0.0;
  Date point_date;
  Date lower_date;
  Date upper_date;
  /// Signed, in days: estimated minus true peak date.
  long delay = 0;
  /// upper_date - lower_date, in days.
  long width = 0;
  bool contains_truth = false;
};

struct PeakBacktestConfig {
  std::vector<int> offsets{15, 10, 5, 3, 2, 1};
  int B = 2000;
  double level = 0.95;
  int smoothing_window = 7;
  std::uint64_t seed = 20200224;
};

struct PeakBacktest {
  TruePeak truth;
  std::vector<PeakBacktestRow> rows;
  std::vector<std::string> warnings;
};

/// Fits the model without covariates on data up to offset days before the
/// smoothed true peak and scores the bootstrap peak interval.
PeakBacktest peak_backtest(const CountSeries& y, const ModelSpec& spec, const FitConfig& cfg,
                           const PeakBacktestConfig& pcfg = {});

}  // namespace richfit

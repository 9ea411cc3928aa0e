// Apache License, Version 2.0, refer to LICENSE.txt

#include "richfit/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "richfit/errors.hpp"
#include "richfit/growth.hpp"
#include "richfit/rng.hpp"
#include "richfit/uncertainty.hpp"

namespace richfit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

double rmspe(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size()) throw DimensionError("observed and predicted horizons differ in length");
  if (y.empty()) throw DimensionError("RMSPE needs a horizon of at least one day");
  double ss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) ss += (y[i] - yhat[i]) * (y[i] - yhat[i]);
  return std::sqrt(ss / static_cast<double>(y.size()));
}

double rmspe(std::span<const long> y, std::span<const double> yhat) {
  std::vector<double> yd(y.begin(), y.end());
  return rmspe(std::span<const double>(yd), yhat);
}

double BacktestGrid::mean_rmspe(int horizon, long from, long to) const {
  double sum = 0.0;
  long n = 0;
  for (const auto& c : cells) {
    if (c.horizon != horizon || c.window_end < from || c.window_end > to || !c.converged) continue;
    sum += c.rmspe;
    ++n;
  }
  return n == 0 ? kNaN : sum / static_cast<double>(n);
}

BacktestGrid backtest_grid(const CountSeries& y, const ModelSpec& spec, const FitConfig& cfg,
                           const std::vector<long>& window_ends, const std::vector<int>& horizons) {
  if (window_ends.empty() || horizons.empty()) throw InvalidParameter("backtest grid needs windows and horizons");
  for (int k : horizons) {
    if (k < 1) throw InvalidParameter("horizons must be >= 1");
  }
  const int kmax = *std::max_element(horizons.begin(), horizons.end());
  std::vector<long> ends = window_ends;
  std::sort(ends.begin(), ends.end());
  if (std::adjacent_find(ends.begin(), ends.end()) != ends.end()) throw InvalidParameter("duplicate window end");
  if (ends.front() < 1 || ends.back() + kmax > y.size()) {
    throw DimensionError("window ends plus the longest horizon must lie inside 1.." + std::to_string(y.size()));
  }
  if (spec.has_covariates() && spec.design_rows() < ends.back() + kmax) {
    throw DimensionError("design does not cover the forecast days");
  }

  BacktestGrid grid;
  grid.origin = y.origin;
  grid.window_ends = ends;
  grid.horizons = horizons;
  grid.cells.reserve(ends.size() * horizons.size());

  std::optional<Eigen::VectorXd> previous;
  for (std::size_t i = 0; i < ends.size(); ++i) {
    const long te = ends[i];
    FitConfig c = cfg;
    c.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(te));
    if (previous) c.warm_starts.push_back(*previous);
    std::optional<FitResult> fitted;
    std::string message;
    try {
      fitted = fit(std::span<const long>(y.values.data(), static_cast<std::size_t>(te)), spec, c);
      previous = fitted->theta;
    } catch (const NonConvergence& e) {
      message = e.what();
    } catch (const InsufficientData& e) {
      message = e.what();
    }
    if (!message.empty()) grid.warnings.push_back("window ending " + y.date_of(te).iso() + ": " + message);
    for (int k : horizons) {
      GridCell cell;
      cell.window_end = te;
      cell.window_end_date = y.date_of(te);
      cell.horizon = k;
      cell.message = message;
      if (fitted) {
        cell.converged = fitted->convergence.converged;
        std::vector<double> pred(static_cast<std::size_t>(k));
        for (int j = 1; j <= k; ++j) pred[static_cast<std::size_t>(j - 1)] = mean_daily(te + j, spec, fitted->theta);
        cell.rmspe = rmspe(y.counts().subspan(static_cast<std::size_t>(te), static_cast<std::size_t>(k)), pred);
      } else {
        cell.rmspe = kNaN;
      }
      grid.cells.push_back(std::move(cell));
    }
  }
  return grid;
}

TruePeak smoothed_true_peak(const CountSeries& y, int window) {
  if (window < 3 || window % 2 == 0) throw InvalidParameter("smoothing window must be odd and >= 3");
  if (y.size() < 15 || y.size() < window) throw InsufficientData("true peak needs at least 15 days");
  const long half = window / 2;
  TruePeak out;
  out.window = window;
  out.method = "centered moving average (" + std::to_string(window) + " days)";
  // integer window sums keep the tie test exact
  long best_sum = -1;
  long ties = 0;
  long sum = 0;
  for (long t = 1; t <= window; ++t) sum += y.values[static_cast<std::size_t>(t - 1)];
  for (long centre = 1 + half; centre + half <= y.size(); ++centre) {
    if (centre > 1 + half) {
      sum += y.values[static_cast<std::size_t>(centre + half - 1)] - y.values[static_cast<std::size_t>(centre - half - 2)];
    }
    if (sum > best_sum) {
      best_sum = sum;
      out.t = centre;
      ties = 0;
    } else if (sum == best_sum) {
      ++ties;
    }
  }
  out.date = y.date_of(out.t);
  out.value = static_cast<double>(best_sum) / static_cast<double>(window);
  if (ties > 0) {
    out.warnings.push_back(std::to_string(ties + 1) + " days share the maximum smoothed value; earliest taken");
  }
  return out;
}

PeakBacktest peak_backtest(const CountSeries& y, const ModelSpec& spec, const FitConfig& cfg,
                           const PeakBacktestConfig& pcfg) {
  if (pcfg.offsets.empty()) throw InvalidParameter("peak backtest needs at least one offset");
  if (pcfg.B < 1) throw InvalidParameter("B must be >= 1");
  PeakBacktest out;
  out.truth = smoothed_true_peak(y, pcfg.smoothing_window);
  out.warnings = out.truth.warnings;

  ModelSpec plain = spec;
  plain.covariates = Covariates::None;
  plain.design.resize(0, 0);
  plain.design_labels.clear();

  for (std::size_t i = 0; i < pcfg.offsets.size(); ++i) {
    const int off = pcfg.offsets[i];
    if (off < 0) throw InvalidParameter("offsets must be >= 0");
    PeakBacktestRow row;
    row.offset = off;
    row.window_end = out.truth.t - off;
    if (row.window_end < 1) throw DimensionError("offset " + std::to_string(off) + " lies before the series start");
    row.window_end_date = y.date_of(row.window_end);
    try {
      FitConfig c = cfg;
      c.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(row.window_end));
      const auto f = fit(y.head(row.window_end), plain, c);
      row.converged = f.convergence.converged;
      row.point = peak_time(growth_params(plain, f.theta));
      row.point_date = day_to_date(y.origin, row.point);
      row.delay = row.point_date - out.truth.date;
      const auto ens = draw_ensemble(f, pcfg.B, row.window_end, derive_seed(pcfg.seed, i), cfg.threads);
      const auto pk = peak_interval(ens, pcfg.level);
      row.lower = pk.lower;
      row.upper = pk.upper;
      row.lower_date = pk.lower_date;
      row.upper_date = pk.upper_date;
      row.width = pk.upper_date - pk.lower_date;
      row.contains_truth = pk.lower_date <= out.truth.date && out.truth.date <= pk.upper_date;
      if (!pk.reliable) row.message = "peak interval unreliable";
    } catch (const NonConvergence& e) {
      row.converged = false;
      row.message = e.what();
    } catch (const InsufficientData& e) {
      row.converged = false;
      row.message = e.what();
    } catch (const DomainError& e) {
      // degenerate covariance: point estimate kept, no interval
      row.message = e.what();
      row.lower = row.upper = kNaN;
    }
    if (!row.message.empty()) out.warnings.push_back("offset " + std::to_string(off) + ": " + row.message);
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace richfit

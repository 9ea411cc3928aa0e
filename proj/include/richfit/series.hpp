// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <span>
#include <string>
#include <vector>

#include "richfit/dates.hpp"

namespace richfit {

/// Daily incidence counts y_t for t = 1..T. `origin` is the calendar date of
/// t = 0 (the first recorded day), so y_t belongs to origin + t.
struct CountSeries {
  Date origin;
  std::vector<long> values;
  std::string indicator;
  std::string region;
  /// Days t whose negative daily difference was clamped to 0.
  std::vector<long> clamp_log;
  /// Sum of the negative daily differences that were clamped to 0 (<= 0), so
  /// that first cumulative + sum(values) + clamped_mass = last cumulative.
  long clamped_mass = 0;

  [[nodiscard]] long size() const { return static_cast<long>(values.size()); }
  [[nodiscard]] Date date_of(long t) const { return origin + t; }
  [[nodiscard]] std::span<const long> counts() const { return values; }
  /// Series restricted to t = 1..n.
  [[nodiscard]] CountSeries head(long n) const;
  /// Calendar dates of t = 1..n (n defaults to the series length).
  [[nodiscard]] std::vector<Date> dates(long n = -1) const;
  /// Throws DataError when empty or when a count is negative.
  void validate() const;
};

}  // namespace richfit

// Apache License, Version 2.0, refer to LICENSE.txt

#include "richfit/series.hpp"

#include <algorithm>

#include "richfit/errors.hpp"

namespace richfit {

CountSeries CountSeries::head(long n) const {
  if (n < 0 || n > size()) throw DimensionError("head(" + std::to_string(n) + ") outside series of length " +
                                                std::to_string(size()));
  CountSeries out = *this;
  out.values.resize(static_cast<std::size_t>(n));
  std::erase_if(out.clamp_log, [n](long t) { return t > n; });
  return out;
}

std::vector<Date> CountSeries::dates(long n) const {
  if (n < 0) n = size();
  std::vector<Date> out;
  out.reserve(static_cast<std::size_t>(n));
  for (long t = 1; t <= n; ++t) out.push_back(date_of(t));
  return out;
}

void CountSeries::validate() const {
  if (values.empty()) throw DataError("count series is empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < 0) throw DataError("negative count at t=" + std::to_string(i + 1));
  }
}

}  // namespace richfit

// Apache License, Version 2.0, refer to LICENSE.txt

// DPC-format CSV ingestion (national and regional files), merge of the two
// autonomous provinces, daily series extraction, weekday design matrices and
// the canonical series CSV.
//
// Mandatory columns: data, nuovi_positivi, deceduti, dimessi_guariti,
// terapia_intensiva, totale_positivi; regional files also need
// codice_regione and denominazione_regione. tamponi and totale_casi are read
// when present. Everything else is ignored and listed in the result.

#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "richfit/dates.hpp"
#include "richfit/series.hpp"

namespace richfit {

enum class Scope { National, Regional };
enum class Indicator { Positives, Deceased, Recovered };

Indicator parse_indicator(std::string_view name);
std::string_view indicator_name(Indicator ind);

struct DpcRecord {
  Date date;
  int region_code = -1;  ///< -1 in national files
  std::string region;    ///< empty in national files
  long nuovi_positivi = 0;
  long deceduti = 0;
  long dimessi_guariti = 0;
  long terapia_intensiva = 0;
  long totale_positivi = 0;
  std::optional<long> tamponi;
  std::optional<long> totale_casi;
};

struct DpcTable {
  Scope scope = Scope::National;
  std::vector<DpcRecord> records;
  std::vector<std::string> ignored_columns;
  std::vector<std::string> warnings;
};

DpcTable parse_dpc(const std::filesystem::path& path, Scope scope);
DpcTable parse_dpc_text(std::string_view text, Scope scope);

/// Splits one CSV line (RFC 4180 quoting) into fields.
std::vector<std::string> split_csv_line(std::string_view line);

inline constexpr std::string_view kMergedProvinces = "Trentino-Alto Adige";

/// Sums P.A. Bolzano and P.A. Trento per date into one region. A province
/// missing on a date counts as 0 and is reported in `warnings`.
DpcTable merge_autonomous_provinces(const DpcTable& table);

/// Daily counts on t = 1..n-1 where row 0 is the origin. Positives come from
/// nuovi_positivi, deceased and recovered from differencing the cumulative
/// columns. Negative values are clamped to 0 and logged. Regional tables are
/// filtered by `region` or summed over all regions when it is empty.
CountSeries extract_series(const DpcTable& table, Indicator indicator, const std::string& region = {});

struct Reconciliation {
  long first_cumulative = 0;
  long last_cumulative = 0;
  long sum_daily = 0;
  long clamped_mass = 0;
  bool balanced = false;
  /// Positives only: days where nuovi_positivi differs from the difference
  /// of totale_casi (-1 when totale_casi is absent).
  long divergent_days = -1;
};

/// Checks first + sum(daily) + clamped = last for the series' cumulative column.
Reconciliation reconcile(const DpcTable& table, const CountSeries& series, Indicator indicator,
                         const std::string& region = {});

struct DesignMatrix {
  Eigen::MatrixXd X;
  std::vector<std::string> labels;
};

/// Intercept plus a 0/1 column for the flagged weekdays. Throws
/// InvalidParameter when the dummy is constant over `dates` (rank deficient).
DesignMatrix weekday_design(const std::vector<Date>& dates, const std::set<Weekday>& flagged);

/// Canonical series CSV: "date,value,clamped" rows for t = 1..T, preceded by
/// "# key=value" metadata lines.
void write_series_csv(const std::filesystem::path& path, const CountSeries& s);
std::string series_csv(const CountSeries& s);
CountSeries read_series_csv(const std::filesystem::path& path);
CountSeries parse_series_csv(std::string_view text);

}  // namespace richfit

// Apache License, Version 2.0, refer to LICENSE.txt

#include "richfit/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "richfit/errors.hpp"

namespace richfit {

namespace {

constexpr std::string_view kBolzano = "P.A. Bolzano";
constexpr std::string_view kTrento = "P.A. Trento";
constexpr int kMergedCode = 4;

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::optional<long> parse_long(const std::string& field, std::size_t line, const std::string& column,
                               bool required) {
  const std::string f = trim(field);
  if (f.empty()) {
    if (required) throw RowError(line, "empty value in column " + column);
    return std::nullopt;
  }
  long v = 0;
  auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc() || ptr != f.data() + f.size()) {
    // tolerate integral values written as "12.0"
    double d = 0.0;
    auto [p2, ec2] = std::from_chars(f.data(), f.data() + f.size(), d);
    if (ec2 != std::errc() || p2 != f.data() + f.size() || d != static_cast<double>(static_cast<long>(d))) {
      throw RowError(line, "column " + column + ": '" + f + "' is not an integer");
    }
    v = static_cast<long>(d);
  }
  return v;
}

// Line-oriented reader that keeps quoted newlines inside one record.
std::vector<std::pair<std::size_t, std::string>> csv_records(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string>> out;
  std::string cur;
  bool quoted = false;
  std::size_t line = 1;
  std::size_t start_line = 1;
  for (char c : text) {
    if (c == '"') quoted = !quoted;
    if (c == '\n' && !quoted) {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      out.emplace_back(start_line, std::move(cur));
      cur.clear();
      ++line;
      start_line = line;
      continue;
    }
    if (c == '\n') ++line;
    cur.push_back(c);
  }
  if (!cur.empty()) {
    if (cur.back() == '\r') cur.pop_back();
    out.emplace_back(start_line, std::move(cur));
  }
  return out;
}

std::string strip_bom(std::string s) {
  if (s.size() >= 3 && static_cast<unsigned char>(s[0]) == 0xEF && static_cast<unsigned char>(s[1]) == 0xBB &&
      static_cast<unsigned char>(s[2]) == 0xBF) {
    s.erase(0, 3);
  }
  return s;
}

long cumulative_of(const DpcRecord& r, Indicator ind) {
  switch (ind) {
    case Indicator::Deceased:
      return r.deceduti;
    case Indicator::Recovered:
      return r.dimessi_guariti;
    case Indicator::Positives:
      break;
  }
  return r.totale_casi.value_or(0);
}

void add_into(DpcRecord& acc, const DpcRecord& r) {
  acc.nuovi_positivi += r.nuovi_positivi;
  acc.deceduti += r.deceduti;
  acc.dimessi_guariti += r.dimessi_guariti;
  acc.terapia_intensiva += r.terapia_intensiva;
  acc.totale_positivi += r.totale_positivi;
  if (r.tamponi) acc.tamponi = acc.tamponi.value_or(0) + *r.tamponi;
  if (r.totale_casi) acc.totale_casi = acc.totale_casi.value_or(0) + *r.totale_casi;
}

// One record per date, in date order, for the requested region (or all).
std::vector<DpcRecord> rows_for(const DpcTable& table, const std::string& region) {
  if (table.scope == Scope::National) {
    if (!region.empty()) throw InvalidParameter("national data has no region '" + region + "'");
    return table.records;
  }
  std::map<Date, DpcRecord> by_date;
  bool found = false;
  for (const auto& r : table.records) {
    if (!region.empty() && r.region != region) continue;
    found = true;
    auto [it, inserted] = by_date.try_emplace(r.date);
    if (inserted) {
      it->second = r;
      if (region.empty()) {
        it->second.region.clear();
        it->second.region_code = -1;
      }
    } else {
      add_into(it->second, r);
    }
  }
  if (!found) throw DataError("no records for region '" + region + "'");
  std::vector<DpcRecord> out;
  for (auto& [d, r] : by_date) out.push_back(std::move(r));
  return out;
}

}  // namespace

Indicator parse_indicator(std::string_view name) {
  std::string n;
  for (char c : name) n.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (n == "positives" || n == "nuovi_positivi") return Indicator::Positives;
  if (n == "deceased" || n == "deceduti") return Indicator::Deceased;
  if (n == "recovered" || n == "dimessi_guariti") return Indicator::Recovered;
  throw InvalidParameter("unknown indicator '" + std::string(name) + "'");
}

std::string_view indicator_name(Indicator ind) {
  switch (ind) {
    case Indicator::Positives:
      return "positives";
    case Indicator::Deceased:
      return "deceased";
    case Indicator::Recovered:
      return "recovered";
  }
  return "positives";
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

DpcTable parse_dpc(const std::filesystem::path& path, Scope scope) { return parse_dpc_text(slurp(path), scope); }

DpcTable parse_dpc_text(std::string_view text, Scope scope) {
  const auto records = csv_records(text);
  if (records.empty() || trim(records.front().second).empty()) throw SchemaError("empty file: no header row");
  const auto header = split_csv_line(strip_bom(records.front().second));
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[trim(header[i])] = i;

  std::vector<std::string> required{"data", "nuovi_positivi", "deceduti", "dimessi_guariti", "terapia_intensiva",
                                    "totale_positivi"};
  if (scope == Scope::Regional) {
    required.emplace_back("codice_regione");
    required.emplace_back("denominazione_regione");
  }
  for (const auto& name : required) {
    if (!col.contains(name)) throw SchemaError("missing mandatory column '" + name + "'");
  }
  const std::set<std::string> known{"data", "nuovi_positivi", "deceduti", "dimessi_guariti", "terapia_intensiva",
                                    "totale_positivi", "codice_regione", "denominazione_regione", "tamponi",
                                    "totale_casi"};
  DpcTable table;
  table.scope = scope;
  for (const auto& h : header) {
    const auto name = trim(h);
    if (!known.contains(name) || (scope == Scope::National && (name == "codice_regione" || name == "denominazione_regione"))) {
      table.ignored_columns.push_back(name);
    }
  }

  const auto field = [&](const std::vector<std::string>& f, const std::string& name, std::size_t line) {
    const auto idx = col.at(name);
    if (idx >= f.size()) throw RowError(line, "row has " + std::to_string(f.size()) + " fields, header has " + std::to_string(header.size()));
    return f[idx];
  };
  const auto optional_field = [&](const std::vector<std::string>& f, const std::string& name,
                                  std::size_t line) -> std::optional<long> {
    if (!col.contains(name) || col.at(name) >= f.size()) return std::nullopt;
    return parse_long(f[col.at(name)], line, name, false);
  };

  std::map<std::string, Date> last_date;
  for (std::size_t k = 1; k < records.size(); ++k) {
    const auto& [line, text_line] = records[k];
    if (trim(text_line).empty()) continue;
    const auto f = split_csv_line(text_line);
    DpcRecord r;
    try {
      r.date = Date::parse(trim(field(f, "data", line)));
    } catch (const RowError&) {
      throw;
    } catch (const DataError& e) {
      throw RowError(line, e.what());
    }
    r.nuovi_positivi = *parse_long(field(f, "nuovi_positivi", line), line, "nuovi_positivi", true);
    r.deceduti = *parse_long(field(f, "deceduti", line), line, "deceduti", true);
    r.dimessi_guariti = *parse_long(field(f, "dimessi_guariti", line), line, "dimessi_guariti", true);
    r.terapia_intensiva = *parse_long(field(f, "terapia_intensiva", line), line, "terapia_intensiva", true);
    r.totale_positivi = *parse_long(field(f, "totale_positivi", line), line, "totale_positivi", true);
    r.tamponi = optional_field(f, "tamponi", line);
    r.totale_casi = optional_field(f, "totale_casi", line);
    if (r.deceduti < 0 || r.dimessi_guariti < 0 || r.terapia_intensiva < 0 || r.totale_positivi < 0) {
      throw RowError(line, "cumulative and stock columns must be >= 0");
    }
    if (scope == Scope::Regional) {
      r.region_code = static_cast<int>(*parse_long(field(f, "codice_regione", line), line, "codice_regione", true));
      r.region = trim(field(f, "denominazione_regione", line));
      if (r.region.empty()) throw RowError(line, "empty region name");
    }
    auto [it, fresh] = last_date.try_emplace(r.region, r.date);
    if (!fresh) {
      if (!(r.date > it->second)) {
        throw RowError(line, "dates must be strictly increasing per region (" + r.date.iso() + " after " +
                                 it->second.iso() + ")");
      }
      it->second = r.date;
    }
    table.records.push_back(std::move(r));
  }
  if (table.records.empty()) throw SchemaError("file has a header but no data rows");
  if (!table.ignored_columns.empty()) {
    std::string list;
    for (const auto& c : table.ignored_columns) list += (list.empty() ? "" : ", ") + c;
    table.warnings.push_back("ignored columns: " + list);
  }
  return table;
}

DpcTable merge_autonomous_provinces(const DpcTable& table) {
  if (table.scope != Scope::Regional) throw InvalidParameter("province merge needs regional records");
  DpcTable out;
  out.scope = table.scope;
  out.ignored_columns = table.ignored_columns;
  out.warnings = table.warnings;
  std::map<Date, std::pair<std::optional<DpcRecord>, std::optional<DpcRecord>>> provinces;
  for (const auto& r : table.records) {
    if (r.region == kBolzano) provinces[r.date].first = r;
    else if (r.region == kTrento) provinces[r.date].second = r;
    else out.records.push_back(r);
  }
  for (const auto& [date, pair] : provinces) {
    DpcRecord m;
    m.date = date;
    m.region_code = kMergedCode;
    m.region = std::string(kMergedProvinces);
    if (pair.first) add_into(m, *pair.first);
    if (pair.second) add_into(m, *pair.second);
    if (!pair.first || !pair.second) {
      out.warnings.push_back(std::string(pair.first ? kTrento : kBolzano) + " missing on " + date.iso() +
                             ", counted as 0");
    }
    out.records.push_back(std::move(m));
  }
  std::stable_sort(out.records.begin(), out.records.end(), [](const DpcRecord& a, const DpcRecord& b) {
    if (a.date != b.date) return a.date < b.date;
    return a.region_code < b.region_code;
  });
  return out;
}

CountSeries extract_series(const DpcTable& table, Indicator indicator, const std::string& region) {
  const auto rows = rows_for(table, region);
  if (rows.size() < 2) throw InsufficientData("need at least two dated rows to form a daily series");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].date - rows[i - 1].date != 1) {
      throw DataError("dates are not consecutive: " + rows[i - 1].date.iso() + " -> " + rows[i].date.iso());
    }
  }
  CountSeries s;
  s.origin = rows.front().date;
  s.indicator = std::string(indicator_name(indicator));
  s.region = region;
  s.values.reserve(rows.size() - 1);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    long v = 0;
    if (indicator == Indicator::Positives) {
      v = rows[i].nuovi_positivi;
    } else {
      v = cumulative_of(rows[i], indicator) - cumulative_of(rows[i - 1], indicator);
    }
    if (v < 0) {
      s.clamp_log.push_back(static_cast<long>(i));
      s.clamped_mass += v;
      v = 0;
    }
    s.values.push_back(v);
  }
  return s;
}

Reconciliation reconcile(const DpcTable& table, const CountSeries& series, Indicator indicator,
                         const std::string& region) {
  const auto rows = rows_for(table, region);
  if (rows.size() != static_cast<std::size_t>(series.size()) + 1) {
    throw DimensionError("series does not match the table rows");
  }
  Reconciliation rec;
  for (long v : series.values) rec.sum_daily += v;
  rec.clamped_mass = series.clamped_mass;
  const bool has_cum = indicator != Indicator::Positives || rows.front().totale_casi.has_value();
  if (!has_cum) return rec;
  rec.first_cumulative = cumulative_of(rows.front(), indicator);
  rec.last_cumulative = cumulative_of(rows.back(), indicator);
  rec.balanced = rec.first_cumulative + rec.sum_daily + rec.clamped_mass == rec.last_cumulative;
  if (indicator == Indicator::Positives) {
    rec.divergent_days = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (!rows[i].totale_casi || !rows[i - 1].totale_casi) continue;
      rec.divergent_days += rows[i].nuovi_positivi != *rows[i].totale_casi - *rows[i - 1].totale_casi;
    }
  }
  return rec;
}

DesignMatrix weekday_design(const std::vector<Date>& dates, const std::set<Weekday>& flagged) {
  if (dates.empty()) throw InvalidParameter("weekday design needs at least one date");
  if (flagged.empty()) throw InvalidParameter("weekday design needs at least one flagged day");
  DesignMatrix d;
  const auto n = static_cast<Eigen::Index>(dates.size());
  d.X.resize(n, 2);
  double ones = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    d.X(i, 0) = 1.0;
    const auto w = static_cast<Weekday>(dates[static_cast<std::size_t>(i)].weekday());
    d.X(i, 1) = flagged.contains(w) ? 1.0 : 0.0;
    ones += d.X(i, 1);
  }
  if (ones == 0.0 || ones == static_cast<double>(n)) {
    throw InvalidParameter("weekday dummy is constant over the dates; design is rank deficient");
  }
  std::string label = "wd";
  for (auto w : flagged) {
    std::string name(weekday_name(w));
    for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    label += "_" + name;
  }
  d.labels = {"intercept", label};
  return d;
}

std::string series_csv(const CountSeries& s) {
  std::ostringstream out;
  out << "# indicator=" << s.indicator << "\n";
  if (!s.region.empty()) out << "# region=" << s.region << "\n";
  out << "# origin=" << s.origin.iso() << "\n";
  out << "# clamped_mass=" << s.clamped_mass << "\n";
  out << "date,value,clamped\n";
  for (long t = 1; t <= s.size(); ++t) {
    const bool clamped = std::find(s.clamp_log.begin(), s.clamp_log.end(), t) != s.clamp_log.end();
    out << s.date_of(t).iso() << "," << s.values[static_cast<std::size_t>(t - 1)] << "," << (clamped ? 1 : 0)
        << "\n";
  }
  return out.str();
}

void write_series_csv(const std::filesystem::path& path, const CountSeries& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << series_csv(s);
}

CountSeries read_series_csv(const std::filesystem::path& path) { return parse_series_csv(slurp(path)); }

CountSeries parse_series_csv(std::string_view text) {
  CountSeries s;
  std::optional<Date> origin;
  bool header = false;
  std::optional<Date> prev;
  long clamped_total = 0;
  bool has_mass = false;
  for (const auto& [line, raw] : csv_records(text)) {
    const std::string row = trim(raw);
    if (row.empty()) continue;
    if (row.front() == '#') {
      const auto eq = row.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = trim(std::string_view(row).substr(1, eq - 1));
      const std::string val = trim(std::string_view(row).substr(eq + 1));
      if (key == "indicator") s.indicator = val;
      else if (key == "region") s.region = val;
      else if (key == "origin") origin = Date::parse(val);
      else if (key == "clamped_mass") {
        clamped_total = *parse_long(val, line, "clamped_mass", true);
        has_mass = true;
      }
      continue;
    }
    const auto f = split_csv_line(row);
    if (!header) {
      if (f.size() < 2 || trim(f[0]) != "date" || trim(f[1]) != "value") {
        throw SchemaError("series file must start with a 'date,value[,clamped]' header");
      }
      header = true;
      continue;
    }
    if (f.size() < 2) throw RowError(line, "expected date,value");
    Date d;
    try {
      d = Date::parse(trim(f[0]));
    } catch (const DataError& e) {
      throw RowError(line, e.what());
    }
    if (prev && d - *prev != 1) throw RowError(line, "dates must be consecutive");
    if (!prev) {
      if (origin && d - *origin != 1) throw RowError(line, "first date must follow the origin by one day");
      if (!origin) origin = d - 1;
    }
    prev = d;
    const long v = *parse_long(f[1], line, "value", true);
    if (v < 0) throw RowError(line, "negative count");
    s.values.push_back(v);
    if (f.size() >= 3 && trim(f[2]) == "1") s.clamp_log.push_back(s.size());
  }
  if (!header) throw SchemaError("series file has no header");
  if (s.values.empty()) throw DataError("series file has no rows");
  s.origin = *origin;
  if (has_mass) s.clamped_mass = clamped_total;
  return s;
}

}  // namespace richfit

// Apache License, Version 2.0, refer to LICENSE.txt

#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "richfit/data.hpp"
#include "richfit/diagnostics.hpp"
#include "richfit/errors.hpp"
#include "richfit/estimator.hpp"
#include "richfit/evaluation.hpp"
#include "richfit/growth.hpp"
#include "richfit/likelihood.hpp"
#include "richfit/uncertainty.hpp"

namespace richfit::cli {

namespace fs = std::filesystem;

namespace {

struct RunConfig {
  std::string command;
  std::string input;
  std::string scope = "national";
  std::string indicator = "positives";
  std::string region;
  std::string family = "negbin";
  bool baseline = false;
  std::string covariates = "none";
  std::vector<std::string> weekdays{"mon", "tue"};
  int B = 2000;
  std::uint64_t seed = 20200224;
  long horizon = 14;
  double level = 0.95;
  std::string out = ".";
  int threads = 0;
  int starts = 50;
  bool ga = false;
  int max_lag = 21;
  // backtest
  std::string mode = "both";
  std::string from;
  std::string to;
  std::vector<int> horizons{1, 5, 10, 15};
  std::vector<int> offsets{15, 10, 5, 3, 2, 1};
  int smoothing_window = 7;
  // simulate
  std::vector<double> theta;
  long length = 150;
  std::string origin = "2020-02-24";
};

/// Settings that determine the numbers; output location and thread count do not.
Json config_json(const RunConfig& c) {
  Json j;
  j["command"] = c.command;
  if (c.command != "simulate") {
    j["input"] = fs::path(c.input).filename().string();
    j["scope"] = c.scope;
    j["region"] = c.region;
  }
  j["indicator"] = c.indicator;
  if (c.command != "ingest") {
    j["family"] = c.family;
    j["baseline"] = c.baseline;
    j["covariates"] = c.covariates;
    j["weekdays"] = c.covariates == "none" ? std::vector<std::string>{} : c.weekdays;
    j["starts"] = c.starts;
    j["ga"] = c.ga;
    j["level"] = c.level;
  }
  if (c.command == "forecast" || c.command == "peak" || c.command == "diagnose" || c.command == "backtest") {
    j["B"] = c.B;
  }
  if (c.command == "forecast") j["horizon"] = c.horizon;
  if (c.command == "diagnose") j["max_lag"] = c.max_lag;
  if (c.command == "backtest") {
    j["mode"] = c.mode;
    j["from"] = c.from;
    j["to"] = c.to;
    j["horizons"] = c.horizons;
    j["offsets"] = c.offsets;
    j["smoothing_window"] = c.smoothing_window;
  }
  if (c.command == "simulate") {
    j["theta"] = c.theta;
    j["length"] = c.length;
    j["origin"] = c.origin;
  }
  return j;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void dump_into(std::string& s, const Json& j, int indent, int depth) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    s.push_back('\n');
    s.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        s += "{}";
        return;
      }
      s.push_back('{');
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) s.push_back(',');
        first = false;
        newline(depth + 1);
        s += Json(it.key()).dump();
        s += indent < 0 ? ":" : ": ";
        dump_into(s, it.value(), indent, depth + 1);
      }
      newline(depth);
      s.push_back('}');
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        s += "[]";
        return;
      }
      s.push_back('[');
      bool first = true;
      for (const auto& v : j) {
        if (!first) s.push_back(',');
        first = false;
        newline(depth + 1);
        dump_into(s, v, indent, depth + 1);
      }
      newline(depth);
      s.push_back(']');
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      s += std::isfinite(v) ? format_real(v) : "null";
      return;
    }
    default:
      s += j.dump();
  }
}

// ---------------------------------------------------------------------------
// inputs

struct Loaded {
  CountSeries series;
  std::string kind;
  std::uint64_t hash = 0;
  std::vector<std::string> warnings;
  Json ingest;  ///< ingest details (DPC inputs only)
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open input file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool looks_like_series(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') {
      if (!line.empty()) return true;
      continue;
    }
    return line.rfind("date,value", 0) == 0;
  }
  return false;
}

Indicator indicator_of(const RunConfig& c) { return parse_indicator(c.indicator); }

Loaded load_input(const RunConfig& c) {
  if (c.input.empty()) throw InvalidParameter("--input is required");
  Loaded l;
  const std::string text = read_file(c.input);
  l.hash = fnv1a(text);
  if (looks_like_series(text)) {
    l.kind = "series";
    l.series = parse_series_csv(text);
    if (!c.region.empty()) throw InvalidParameter("--region applies to DPC inputs only");
    return l;
  }
  const Scope scope = c.scope == "regional" ? Scope::Regional : Scope::National;
  if (scope == Scope::National && !c.region.empty()) throw InvalidParameter("--region needs --scope regional");
  DpcTable table = parse_dpc_text(text, scope);
  if (scope == Scope::Regional) table = merge_autonomous_provinces(table);
  l.kind = scope == Scope::Regional ? "dpc-regional" : "dpc-national";
  const Indicator ind = indicator_of(c);
  l.series = extract_series(table, ind, c.region);
  l.warnings = table.warnings;
  const auto rec = reconcile(table, l.series, ind, c.region);
  Json r;
  r["first_cumulative"] = rec.first_cumulative;
  r["last_cumulative"] = rec.last_cumulative;
  r["sum_daily"] = rec.sum_daily;
  r["clamped_mass"] = rec.clamped_mass;
  r["balanced"] = rec.balanced;
  if (rec.divergent_days >= 0) r["divergent_days"] = rec.divergent_days;
  l.ingest["records"] = table.records.size();
  l.ingest["ignored_columns"] = table.ignored_columns;
  l.ingest["reconciliation"] = r;
  if (!l.series.clamp_log.empty()) {
    l.warnings.push_back(std::to_string(l.series.clamp_log.size()) + " negative daily values clamped to 0");
  }
  return l;
}

// ---------------------------------------------------------------------------
// model setup

std::set<Weekday> flagged_days(const RunConfig& c) {
  std::set<Weekday> out;
  for (const auto& w : c.weekdays) out.insert(parse_weekday(w));
  return out;
}

ModelSpec build_spec(const RunConfig& c, const Date& origin, long design_days) {
  ModelSpec spec;
  spec.family = c.family == "poisson" ? Family::Poisson : Family::NegBin;
  spec.baseline = c.baseline ? Baseline::Constant : Baseline::None;
  if (c.covariates == "additive") spec.covariates = Covariates::Additive;
  if (c.covariates == "multiplicative") spec.covariates = Covariates::Multiplicative;
  if (spec.has_covariates()) {
    std::vector<Date> dates;
    for (long t = 1; t <= design_days; ++t) dates.push_back(origin + t);
    auto d = weekday_design(dates, flagged_days(c));
    spec.design = std::move(d.X);
    spec.design_labels = std::move(d.labels);
  }
  spec.validate();
  return spec;
}

FitConfig fit_config(const RunConfig& c) {
  FitConfig f;
  f.n_starts = c.starts;
  f.seed = c.seed;
  f.threads = c.threads;
  if (c.ga) f.ga = GaSettings{};
  f.validate();
  return f;
}

// ---------------------------------------------------------------------------
// report pieces

Json header(const RunConfig& c, const std::optional<Loaded>& in) {
  Json j;
  j["richfit_version"] = RICHFIT_VERSION;
  j["command"] = c.command;
  j["seed"] = c.seed;
  if (in) {
    j["input"] = {{"file", fs::path(c.input).filename().string()}, {"kind", in->kind}, {"fnv1a64", hex64(in->hash)}};
  }
  j["config"] = config_json(c);
  return j;
}

Json series_json(const CountSeries& s) {
  Json j;
  j["indicator"] = s.indicator;
  j["region"] = s.region;
  j["origin"] = s.origin.iso();
  j["first_date"] = s.date_of(1).iso();
  j["last_date"] = s.date_of(s.size()).iso();
  j["T"] = s.size();
  j["clamped_days"] = s.clamp_log.size();
  j["clamped_mass"] = s.clamped_mass;
  j["fnv1a64_counts"] = hex64(hash_counts(s.counts()));
  return j;
}

Json intervals_json(const std::vector<ParameterInterval>& iv) {
  Json a = Json::array();
  for (const auto& p : iv) {
    a.push_back({{"name", p.name},
                 {"estimate", p.estimate},
                 {"lower", p.lower},
                 {"upper", p.upper},
                 {"std_error", p.std_error},
                 {"reliable", p.reliable}});
  }
  return a;
}

Json fit_json(const FitResult& f, const RunConfig& c) {
  Json j;
  Json model;
  model["family"] = c.family;
  model["baseline"] = c.baseline;
  model["covariates"] = c.covariates;
  if (f.spec.has_covariates()) {
    model["weekdays"] = c.weekdays;
    model["design_labels"] = f.spec.design_labels;
  }
  model["parameters"] = f.layout.names;
  j["model"] = model;
  Json est;
  for (int i = 0; i < f.layout.size(); ++i) est[f.layout.names[static_cast<std::size_t>(i)]] = f.theta[i];
  j["estimates"] = est;
  j["loglik"] = f.loglik;
  j["k"] = f.k;
  j["T"] = f.T;
  j["criteria"] = {{"aic", f.criteria.aic},
                   {"aicc", f.criteria.aicc ? Json(*f.criteria.aicc) : Json(nullptr)},
                   {"bic", f.criteria.bic}};
  j["intervals"] = {{"level", c.level},
                    {"log", intervals_json(parameter_intervals(f, c.level, IntervalScale::Log))},
                    {"constrained", intervals_json(parameter_intervals(f, c.level, IntervalScale::Constrained))}};
  const double tp = peak_time(growth_params(f.spec, f.theta));
  j["peak"] = {{"t", tp}, {"date", day_to_date(f.origin, tp).iso()}};
  const auto& cv = f.convergence;
  j["convergence"] = {{"converged", cv.converged},
                      {"gradient_norm", cv.gradient_norm},
                      {"iterations", cv.iterations},
                      {"negative_definite", cv.negative_definite},
                      {"stalled", cv.stalled},
                      {"starts_run", cv.starts_run},
                      {"starts_polished", cv.starts_polished},
                      {"starts_agreeing", cv.starts_agreeing},
                      {"warnings", cv.warnings}};
  Json cov = Json::array();
  for (Eigen::Index r = 0; r < f.covariance_theta.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < f.covariance_theta.cols(); ++k) row.push_back(f.covariance_theta(r, k));
    cov.push_back(row);
  }
  j["covariance"] = {{"degenerate", f.covariance.degenerate}, {"warning", f.covariance.warning}, {"theta", cov}};
  j["polished_logliks"] = f.polished_logliks;
  return j;
}

std::string band_csv(const PredictionBand& b) {
  std::string s = "date,t,point,lower,upper\n";
  for (std::size_t i = 0; i < b.t.size(); ++i) {
    s += (b.origin + b.t[i]).iso() + "," + std::to_string(b.t[i]) + "," + format_real(b.point[i]) + "," +
         format_real(b.lower[i]) + "," + format_real(b.upper[i]) + "\n";
  }
  return s;
}

Json band_summary(const PredictionBand& b) {
  return {{"level", b.level}, {"days", b.t.size()}, {"repairs", b.repairs}, {"reliable", b.reliable}};
}

Json peak_json(const PeakEstimate& p, const BootstrapEnsemble& ens, double level) {
  return {{"point", p.point},
          {"lower", p.lower},
          {"upper", p.upper},
          {"point_date", p.point_date.iso()},
          {"lower_date", p.lower_date.iso()},
          {"upper_date", p.upper_date.iso()},
          {"width_days", p.upper_date - p.lower_date},
          {"level", level},
          {"B", ens.B},
          {"redraws", ens.redraws},
          {"reliable", p.reliable}};
}

// ---------------------------------------------------------------------------
// commands

using Files = std::vector<std::pair<std::string, std::string>>;

struct Prepared {
  Loaded in;
  ModelSpec spec;
  FitResult fit;
};

Prepared prepare(const RunConfig& c, long extra_design_days) {
  Prepared p{load_input(c), {}, {}};
  p.spec = build_spec(c, p.in.series.origin, p.in.series.size() + extra_design_days);
  p.fit = fit(p.in.series, p.spec, fit_config(c));
  return p;
}

Json base_report(const RunConfig& c, const Prepared& p) {
  Json j = header(c, p.in);
  j["series"] = series_json(p.in.series);
  j["warnings"] = p.in.warnings;
  return j;
}

Files cmd_ingest(const RunConfig& c) {
  const auto in = load_input(c);
  Json j = header(c, in);
  j["series"] = series_json(in.series);
  j["ingest"] = in.ingest;
  j["clamp_log"] = in.series.clamp_log;
  j["warnings"] = in.warnings;
  return {{"series.csv", series_csv(in.series)}, {"ingest.json", dump(j)}};
}

Files cmd_fit(const RunConfig& c) {
  const auto p = prepare(c, 0);
  Json j = base_report(c, p);
  j["fit"] = fit_json(p.fit, c);
  const auto mu = mean_trajectory(p.fit.T, p.spec, p.fit.theta);
  std::string csv = "date,t,observed,fitted\n";
  for (long t = 1; t <= p.fit.T; ++t) {
    csv += p.in.series.date_of(t).iso() + "," + std::to_string(t) + "," +
           std::to_string(p.in.series.values[static_cast<std::size_t>(t - 1)]) + "," + format_real(mu(t - 1)) + "\n";
  }
  return {{"fit_report.json", dump(j)}, {"fitted.csv", csv}};
}

Files cmd_forecast(const RunConfig& c) {
  if (c.horizon < 0) throw InvalidParameter("--horizon must be >= 0");
  const auto p = prepare(c, c.horizon);
  const auto ens = draw_ensemble(p.fit, c.B, p.fit.T + c.horizon, c.seed, c.threads);
  const auto daily = prediction_band(ens, p.fit, c.level, c.horizon);
  const auto cum = cumulative_band(ens, p.fit, c.level, c.horizon);
  Json j = base_report(c, p);
  j["fit"] = fit_json(p.fit, c);
  j["daily"] = band_summary(daily);
  j["cumulative"] = band_summary(cum);
  j["peak"] = peak_json(peak_interval(ens, c.level), ens, c.level);
  for (const auto& w : ens.warnings) j["warnings"].push_back(w);
  return {{"forecast.json", dump(j)}, {"forecast_daily.csv", band_csv(daily)}, {"forecast_cumulative.csv", band_csv(cum)}};
}

Files cmd_peak(const RunConfig& c) {
  const auto p = prepare(c, 0);
  const auto ens = draw_ensemble(p.fit, c.B, p.fit.T, c.seed, c.threads);
  Json j = base_report(c, p);
  j["estimates"] = fit_json(p.fit, c)["estimates"];
  j["peak"] = peak_json(peak_interval(ens, c.level), ens, c.level);
  for (const auto& w : ens.warnings) j["warnings"].push_back(w);
  return {{"peak.json", dump(j)}};
}

Files cmd_diagnose(const RunConfig& c) {
  const auto p = prepare(c, 0);
  const auto ens = draw_ensemble(p.fit, c.B, p.fit.T, c.seed, c.threads);
  const auto band = prediction_band(ens, p.fit, c.level, 0);
  const auto d = diagnose(p.in.series, p.fit, band, c.max_lag);
  Json j = base_report(c, p);
  j["loglik"] = p.fit.loglik;
  j["pseudo_r2"] = d.r2;
  j["coverage"] = {{"level", c.level}, {"empirical", d.coverage}, {"band", band_summary(band)}};
  j["acf"] = {{"values", d.acf.values}, {"band", d.acf.band}};
  j["normality"] = {{"method", d.normality.method}, {"statistic", d.normality.statistic}, {"p_value", d.normality.p_value}};
  Json wd = Json::array();
  for (const auto& g : d.weekday) {
    wd.push_back({{"day", std::string(weekday_name(g.day))},
                  {"n", g.n},
                  {"median", g.median},
                  {"q1", g.q1},
                  {"q3", g.q3},
                  {"min", g.min},
                  {"max", g.max}});
  }
  j["weekday_residuals"] = wd;
  std::string csv = "date,t,observed,fitted,pearson,lower,upper\n";
  for (long t = 1; t <= p.fit.T; ++t) {
    const auto i = static_cast<std::size_t>(t - 1);
    csv += p.in.series.date_of(t).iso() + "," + std::to_string(t) + "," + std::to_string(p.in.series.values[i]) +
           "," + format_real(d.fitted[i]) + "," + format_real(d.residuals[i]) + "," + format_real(band.lower[i]) +
           "," + format_real(band.upper[i]) + "\n";
  }
  return {{"diagnostics.json", dump(j)}, {"residuals.csv", csv}};
}

long day_index(const std::string& date, const CountSeries& s, long fallback) {
  if (date.empty()) return fallback;
  return Date::parse(date) - s.origin;
}

Files cmd_backtest(const RunConfig& c) {
  if (c.mode != "grid" && c.mode != "peak" && c.mode != "both") throw InvalidParameter("--mode must be grid, peak or both");
  const auto in = load_input(c);
  const auto& y = in.series;
  const auto spec = build_spec(c, y.origin, y.size());
  const auto fcfg = fit_config(c);
  Json j = header(c, in);
  j["series"] = series_json(y);
  j["warnings"] = in.warnings;
  Files files;

  if (c.mode != "peak") {
    const int kmax = *std::max_element(c.horizons.begin(), c.horizons.end());
    const long from = day_index(c.from, y, std::min<long>(30, y.size() - kmax));
    const long to = day_index(c.to, y, y.size() - kmax);
    if (from > to) throw InvalidParameter("--from lies after --to");
    std::vector<long> ends;
    for (long t = from; t <= to; ++t) ends.push_back(t);
    const auto grid = backtest_grid(y, spec, fcfg, ends, c.horizons);
    std::string csv = "window_end,t,horizon,rmspe,converged,message\n";
    Json cells = Json::array();
    for (const auto& cell : grid.cells) {
      csv += cell.window_end_date.iso() + "," + std::to_string(cell.window_end) + "," + std::to_string(cell.horizon) +
             "," + (std::isfinite(cell.rmspe) ? format_real(cell.rmspe) : "NA") + "," + (cell.converged ? "1" : "0") +
             ",\"" + cell.message + "\"\n";
      cells.push_back({{"window_end", cell.window_end_date.iso()},
                       {"horizon", cell.horizon},
                       {"rmspe", cell.rmspe},
                       {"converged", cell.converged},
                       {"message", cell.message}});
    }
    Json g;
    g["horizons"] = c.horizons;
    g["from"] = y.date_of(from).iso();
    g["to"] = y.date_of(to).iso();
    g["cells"] = cells;
    g["warnings"] = grid.warnings;
    j["grid"] = g;
    files.emplace_back("backtest_grid.csv", csv);
  }
  if (c.mode != "grid") {
    PeakBacktestConfig pc;
    pc.offsets = c.offsets;
    pc.B = c.B;
    pc.level = c.level;
    pc.smoothing_window = c.smoothing_window;
    pc.seed = c.seed;
    const auto pb = peak_backtest(y, spec, fcfg, pc);
    std::string csv = "offset,window_end,point_date,lower_date,upper_date,delay,width,contains_truth,converged,message\n";
    Json rows = Json::array();
    for (const auto& r : pb.rows) {
      const bool has_iv = std::isfinite(r.lower) && std::isfinite(r.upper) && r.upper_date != Date{};
      csv += std::to_string(r.offset) + "," + r.window_end_date.iso() + "," + r.point_date.iso() + "," +
             (has_iv ? r.lower_date.iso() : "NA") + "," + (has_iv ? r.upper_date.iso() : "NA") + "," +
             std::to_string(r.delay) + "," + std::to_string(r.width) + "," + (r.contains_truth ? "1" : "0") + "," +
             (r.converged ? "1" : "0") + ",\"" + r.message + "\"\n";
      rows.push_back({{"offset", r.offset},
                      {"window_end", r.window_end_date.iso()},
                      {"point", r.point},
                      {"lower", r.lower},
                      {"upper", r.upper},
                      {"point_date", r.point_date.iso()},
                      {"lower_date", r.lower_date.iso()},
                      {"upper_date", r.upper_date.iso()},
                      {"delay", r.delay},
                      {"width", r.width},
                      {"contains_truth", r.contains_truth},
                      {"converged", r.converged},
                      {"message", r.message}});
    }
    j["peak_backtest"] = {{"true_peak",
                           {{"date", pb.truth.date.iso()},
                            {"t", pb.truth.t},
                            {"value", pb.truth.value},
                            {"method", pb.truth.method}}},
                          {"rows", rows},
                          {"warnings", pb.warnings}};
    files.emplace_back("peak_backtest.csv", csv);
  }
  files.emplace_back("backtest.json", dump(j));
  return files;
}

Files cmd_simulate(const RunConfig& c) {
  if (c.length < 1) throw InvalidParameter("--length must be >= 1");
  const Date origin = Date::parse(c.origin);
  const auto spec = build_spec(c, origin, c.length);
  const auto layout = spec.layout();
  if (static_cast<int>(c.theta.size()) != layout.size()) {
    std::string names;
    for (const auto& n : layout.names) names += (names.empty() ? "" : ",") + n;
    throw InvalidParameter("--theta needs " + std::to_string(layout.size()) + " values (" + names + ")");
  }
  const Eigen::VectorXd theta = Eigen::Map<const Eigen::VectorXd>(c.theta.data(), static_cast<Eigen::Index>(c.theta.size()));
  CountSeries s = sample_counts(spec, theta, c.length, c.seed);
  s.origin = origin;
  s.indicator = c.indicator;
  Json j = header(c, std::nullopt);
  j["series"] = series_json(s);
  Json th;
  for (int i = 0; i < layout.size(); ++i) th[layout.names[static_cast<std::size_t>(i)]] = theta[i];
  j["theta"] = th;
  return {{"series.csv", series_csv(s)}, {"simulate.json", dump(j)}};
}

// ---------------------------------------------------------------------------

void write_error(std::ostream& err, const std::string& kind, const std::string& message, int code) {
  Json j;
  j["error"] = kind;
  j["message"] = message;
  j["exit_code"] = code;
  err << dump(j, -1) << "\n";
}

void write_files(const std::string& dir, const Files& files) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory '" + dir + "': " + ec.message());
  for (const auto& [name, content] : files) {
    const auto path = fs::path(dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << content;
  }
}

}  // namespace

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string dump(const Json& j, int indent) {
  std::string s;
  dump_into(s, j, indent, 0);
  return s;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Richards-curve count models for epidemic incidence series", "richfit"};
  app.set_version_flag("--version", std::string(RICHFIT_VERSION));
  app.set_config("--config", "", "key = value file mirroring the long flags; flags win");
  app.require_subcommand(1, 1);
  app.fallthrough();

  app.add_option("-i,--input", c.input, "DPC CSV or canonical series CSV");
  app.add_option("--scope", c.scope, "DPC file scope")->check(CLI::IsMember({"national", "regional"}));
  app.add_option("--indicator", c.indicator)->check(CLI::IsMember({"positives", "deceased", "recovered"}));
  app.add_option("--region", c.region, "region name (regional scope)");
  app.add_option("--family", c.family)->check(CLI::IsMember({"poisson", "negbin"}));
  app.add_flag("--baseline", c.baseline, "constant baseline rate alpha");
  app.add_option("--covariates", c.covariates)->check(CLI::IsMember({"none", "additive", "multiplicative"}));
  app.add_option("--weekdays", c.weekdays, "flagged weekdays for the dummy")->delimiter(',');
  app.add_option("-B,--bootstrap", c.B, "bootstrap replicates")->check(CLI::PositiveNumber);
  app.add_option("--seed", c.seed);
  app.add_option("--horizon", c.horizon, "forecast days beyond the data")->check(CLI::NonNegativeNumber);
  app.add_option("--level", c.level)->check(CLI::Range(0.5, 0.999999));
  app.add_option("-o,--out", c.out, "output directory");
  app.add_option("--threads", c.threads, "worker threads (0: RICHFIT_THREADS or all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("--starts", c.starts, "multistart points")->check(CLI::PositiveNumber);
  app.add_flag("--ga", c.ga, "evolve the starts with a genetic algorithm");
  app.add_option("--max-lag", c.max_lag)->check(CLI::PositiveNumber);
  app.add_option("--mode", c.mode)->check(CLI::IsMember({"grid", "peak", "both"}));
  app.add_option("--from", c.from, "first window end (ISO date)");
  app.add_option("--to", c.to, "last window end (ISO date)");
  app.add_option("--horizons", c.horizons)->delimiter(',')->check(CLI::PositiveNumber);
  app.add_option("--offsets", c.offsets)->delimiter(',')->check(CLI::NonNegativeNumber);
  app.add_option("--smoothing-window", c.smoothing_window);
  app.add_option("--theta", c.theta, "parameter vector in layout order")->delimiter(',');
  app.add_option("--length", c.length, "simulated days");
  app.add_option("--origin", c.origin, "date of day 0 for simulate");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"ingest", "parse a DPC CSV into a canonical daily series"},
      {"fit", "maximum-likelihood fit; fit report and fitted curve"},
      {"forecast", "bootstrap prediction bands, daily and cumulative"},
      {"peak", "peak day with bootstrap interval"},
      {"diagnose", "residual diagnostics"},
      {"backtest", "rolling-origin RMSPE grid and peak anticipation"},
      {"simulate", "synthetic series from a parameter vector"}};
  for (const auto& [name, help] : commands) {
    app.add_subcommand(name, help)->callback([&c, n = name] { c.command = n; });
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
    if (c.baseline && c.covariates == "additive") {
      throw CLI::ValidationError("--baseline", "additive covariates replace the baseline; drop one of them");
    }
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << RICHFIT_VERSION << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    write_error(err, "usage", e.what(), kUsage);
    return kUsage;
  }

  try {
    Files files;
    if (c.command == "ingest") files = cmd_ingest(c);
    else if (c.command == "fit") files = cmd_fit(c);
    else if (c.command == "forecast") files = cmd_forecast(c);
    else if (c.command == "peak") files = cmd_peak(c);
    else if (c.command == "diagnose") files = cmd_diagnose(c);
    else if (c.command == "backtest") files = cmd_backtest(c);
    else if (c.command == "simulate") files = cmd_simulate(c);
    write_files(c.out, files);
    for (const auto& f : files) out << (fs::path(c.out) / f.first).string() << "\n";
    return kOk;
  } catch (const NonConvergence& e) {
    write_error(err, e.kind(), e.what(), kNonConvergence);
    return kNonConvergence;
  } catch (const InvalidParameter& e) {
    write_error(err, e.kind(), e.what(), kUsage);
    return kUsage;
  } catch (const Error& e) {
    write_error(err, e.kind(), e.what(), kData);
    return kData;
  } catch (const std::exception& e) {
    write_error(err, "internal", e.what(), kData);
    return kData;
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace richfit::cli

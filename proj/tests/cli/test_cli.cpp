// Apache License, Version 2.0, refer to LICENSE.txt

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

namespace fs = std::filesystem;
using richfit::cli::Json;
using richfit::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("richfit_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  [[nodiscard]] std::string operator/(const std::string& leaf) const { return (path / leaf).string(); }
};

const char* kTheta = "175,221940,0.029,-32.29,77.74,18.76";

}  // namespace

TEST_CASE("usage errors exit 2 and write nothing") {
  TempDir d("usage");
  auto r = call({"fit", "--bogus", "-o", d / "out"});
  CHECK(r.code == 2);
  CHECK(!fs::exists(d / "out"));
  const auto err = Json::parse(r.err);
  CHECK(err["error"] == "usage");
  CHECK(err["exit_code"] == 2);

  CHECK(call({}).code == 2);
  CHECK(call({"fit", "simulate"}).code == 2);
  CHECK(call({"fit", "--family", "gaussian"}).code == 2);
  CHECK(call({"fit", "--baseline", "--covariates", "additive", "-i", "x.csv"}).code == 2);
  r = call({"simulate", "--theta", "1,2", "-o", d / "out"});
  CHECK(r.code == 2);
  CHECK(Json::parse(r.err)["error"] == "invalid_parameter");
  CHECK(!fs::exists(d / "out"));
  CHECK(call({"--help"}).code == 0);
  CHECK(call({"--version"}).out.find('.') != std::string::npos);
}

TEST_CASE("data errors exit 3") {
  TempDir d("data");
  auto r = call({"fit", "-i", d / "missing.csv", "-o", d / "out"});
  CHECK(r.code == 3);
  CHECK(Json::parse(r.err)["error"] == "data_error");
  {
    std::ofstream(d / "empty.csv") << "";
  }
  r = call({"ingest", "-i", d / "empty.csv", "-o", d / "out"});
  CHECK(r.code == 3);
  CHECK(Json::parse(r.err)["error"] == "schema_error");
  CHECK(!fs::exists(d / "out"));
}

TEST_CASE("simulate then fit recovers the parameters") {
  TempDir d("roundtrip");
  REQUIRE(call({"simulate", "--family", "negbin", "--baseline", "--theta", kTheta, "--length", "150", "--seed", "7",
                "-o", d / "sim"})
              .code == 0);
  const auto sim = slurp(d / "sim/series.csv");
  const std::string input = d / "sim/series.csv";
  REQUIRE(call({"fit", "-i", input, "--family", "negbin", "--baseline", "-o", d / "fit"}).code == 0);
  CHECK(slurp(d / "sim/series.csv") == sim);  // input untouched

  const auto rep = Json::parse(slurp(d / "fit/fit_report.json"));
  CHECK(rep["seed"] == 20200224);
  CHECK(rep["input"]["fnv1a64"].get<std::string>().size() == 16);
  CHECK(rep["config"]["family"] == "negbin");
  CHECK(!rep["richfit_version"].get<std::string>().empty());
  const std::vector<double> truth{175, 221940, 0.029, -32.29, 77.74, 18.76};
  const auto& iv = rep["fit"]["intervals"]["log"];
  REQUIRE(iv.size() == truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double est = iv[i]["estimate"];
    const double se = iv[i]["std_error"];
    INFO(iv[i]["name"].get<std::string>());
    CHECK(std::abs(est - truth[i]) <= 3.0 * se);
  }
  CHECK(rep["fit"]["intervals"]["constrained"].size() == truth.size());
  CHECK(rep["fit"]["convergence"]["converged"] == true);

  // same embeds, same bytes
  REQUIRE(call({"fit", "-i", input, "--family", "negbin", "--baseline", "--threads", "1", "-o", d / "fit2"}).code == 0);
  CHECK(slurp(d / "fit/fit_report.json") == slurp(d / "fit2/fit_report.json"));
  CHECK(slurp(d / "fit/fitted.csv") == slurp(d / "fit2/fitted.csv"));
}

TEST_CASE("reals carry 17 significant digits") {
  CHECK(richfit::cli::format_real(0.1) == "0.10000000000000001");
  Json j;
  j["x"] = 1.0 / 3.0;
  j["n"] = 3;
  j["bad"] = std::nan("");
  CHECK(richfit::cli::dump(j, -1) == "{\"x\":0.33333333333333331,\"n\":3,\"bad\":null}");
  CHECK(richfit::cli::fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(richfit::cli::fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("config file mirrors flags; flags win") {
  TempDir d("config");
  {
    std::ofstream cfg(d / "run.ini");
    cfg << "family = poisson\nlength = 40\nseed = 3\ntheta = 5000,0.05,20,1.0\n";
  }
  REQUIRE(call({"simulate", "--config", d / "run.ini", "-o", d / "a"}).code == 0);
  auto rep = Json::parse(slurp(d / "a/simulate.json"));
  CHECK(rep["config"]["family"] == "poisson");
  CHECK(rep["series"]["T"] == 40);
  CHECK(rep["seed"] == 3);
  REQUIRE(call({"simulate", "--config", d / "run.ini", "--length", "50", "-o", d / "b"}).code == 0);
  rep = Json::parse(slurp(d / "b/simulate.json"));
  CHECK(rep["series"]["T"] == 50);
  CHECK(rep["seed"] == 3);
}

TEST_CASE("ingest, forecast, peak, diagnose and backtest on simulated data") {
  TempDir d("pipeline");
  {
    // national DPC layout built from a simulated deceased curve
    std::ostringstream csv;
    csv << "data,stato,ricoverati_con_sintomi,terapia_intensiva,totale_positivi,nuovi_positivi,dimessi_guariti,"
           "deceduti,totale_casi,tamponi\n";
    REQUIRE(call({"simulate", "--family", "poisson", "--theta", "20000,0.04,60,1.5", "--length", "110", "--seed", "5",
                  "-o", d / "sim"})
                .code == 0);
    std::ifstream in(d / "sim/series.csv");
    std::string line;
    long cum = 10;
    long tot = 100;
    csv << "2020-02-24T18:00:00,ITA,0,0,0,100,0," << cum << "," << tot << ",0\n";
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#' || line.rfind("date", 0) == 0) continue;
      const auto c1 = line.find(',');
      const auto c2 = line.find(',', c1 + 1);
      const long v = std::stol(line.substr(c1 + 1, c2 - c1 - 1));
      cum += v;
      tot += 2 * v;
      csv << line.substr(0, c1) << "T18:00:00,ITA,0,0,0," << 2 * v << ",0," << cum << "," << tot << ",0\n";
    }
    std::ofstream(d / "dpc.csv") << csv.str();
  }
  const std::string dpc = d / "dpc.csv";
  REQUIRE(call({"ingest", "-i", dpc, "--indicator", "deceased", "-o", d / "ing"}).code == 0);
  auto rep = Json::parse(slurp(d / "ing/ingest.json"));
  CHECK(rep["ingest"]["records"] == 111);
  CHECK(rep["ingest"]["reconciliation"]["balanced"] == true);
  CHECK(rep["ingest"]["reconciliation"]["divergent_days"].is_null());
  CHECK(rep["series"]["T"] == 110);

  const std::vector<std::string> model{"-i", dpc, "--indicator", "deceased", "--family", "poisson", "--starts", "20",
                                       "-B", "200"};
  auto with = [&](std::vector<std::string> head, const std::string& out) {
    head.insert(head.end(), model.begin(), model.end());
    head.push_back("-o");
    head.push_back(d / out);
    return call(head);
  };
  REQUIRE(with({"forecast", "--horizon", "10"}, "fc").code == 0);
  const auto band = slurp(d / "fc/forecast_daily.csv");
  CHECK(band.rfind("date,t,point,lower,upper\n", 0) == 0);
  CHECK(std::count(band.begin(), band.end(), '\n') == 121);
  CHECK(fs::exists(d / "fc/forecast_cumulative.csv"));

  REQUIRE(with({"peak"}, "pk").code == 0);
  rep = Json::parse(slurp(d / "pk/peak.json"));
  const double lo = rep["peak"]["lower"], pt = rep["peak"]["point"], hi = rep["peak"]["upper"];
  CHECK(lo <= pt);
  CHECK(pt <= hi);
  CHECK(std::abs(pt - (60.0 + std::log10(1.5) / 0.04)) < 5.0);

  REQUIRE(with({"diagnose"}, "dg").code == 0);
  rep = Json::parse(slurp(d / "dg/diagnostics.json"));
  CHECK(rep["pseudo_r2"].get<double>() > 0.8);
  CHECK(rep["weekday_residuals"].size() == 7);
  CHECK(rep["acf"]["values"][0].get<double>() == doctest::Approx(1.0));

  REQUIRE(with({"backtest", "--from", "2020-05-20", "--to", "2020-05-24", "--horizons", "1,5", "--offsets", "5,1"},
               "bt")
              .code == 0);
  rep = Json::parse(slurp(d / "bt/backtest.json"));
  CHECK(rep["grid"]["cells"].size() == 10);
  CHECK(rep["peak_backtest"]["rows"].size() == 2);
  CHECK(fs::exists(d / "bt/backtest_grid.csv"));
  CHECK(fs::exists(d / "bt/peak_backtest.csv"));
}

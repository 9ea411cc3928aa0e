// Apache License, Version 2.0, refer to LICENSE.txt

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "richfit/data.hpp"
#include "richfit/diagnostics.hpp"
#include "richfit/errors.hpp"
#include "richfit/estimator.hpp"
#include "richfit/evaluation.hpp"
#include "richfit/growth.hpp"
#include "richfit/likelihood.hpp"
#include "richfit/uncertainty.hpp"

namespace py = pybind11;
using namespace richfit;

namespace {

using Counts = py::array_t<long, py::array::c_style | py::array::forcecast>;
using Reals = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<long> to_counts(const Counts& y) {
  if (y.ndim() != 1) throw DimensionError("counts must be one-dimensional");
  return {y.data(), y.data() + y.size()};
}

std::vector<double> to_reals(const Reals& x) {
  if (x.ndim() != 1) throw DimensionError("values must be one-dimensional");
  return {x.data(), x.data() + x.size()};
}

template <class T>
py::array_t<T> to_array(const std::vector<T>& v) {
  py::array_t<T> a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

ModelSpec make_spec(const std::string& family, bool baseline, const std::string& covariates,
                    const std::optional<Eigen::MatrixXd>& design) {
  ModelSpec s;
  if (family == "poisson") s.family = Family::Poisson;
  else if (family == "negbin") s.family = Family::NegBin;
  else throw InvalidParameter("family must be 'poisson' or 'negbin'");
  s.baseline = baseline ? Baseline::Constant : Baseline::None;
  if (covariates == "additive") s.covariates = Covariates::Additive;
  else if (covariates == "multiplicative") s.covariates = Covariates::Multiplicative;
  else if (covariates != "none") throw InvalidParameter("covariates must be none, additive or multiplicative");
  if (design) s.design = *design;
  s.validate();
  return s;
}

Date to_date(const py::object& o) {
  return Date::parse(py::str(o).cast<std::string>());
}

py::array_t<double> apply(const Reals& t, const RichardsParams& g, double (*f)(double, const RichardsParams&)) {
  py::array_t<double> out(t.request().shape);
  const double* in = t.data();
  double* o = out.mutable_data();
  for (py::ssize_t i = 0; i < t.size(); ++i) o[i] = f(in[i], g);
  return out;
}

py::dict band_dict(const PredictionBand& b) {
  py::dict d;
  std::vector<std::string> dates;
  for (long t : b.t) dates.push_back((b.origin + t).iso());
  d["t"] = to_array(b.t);
  d["date"] = dates;
  d["point"] = to_array(b.point);
  d["lower"] = to_array(b.lower);
  d["upper"] = to_array(b.upper);
  d["level"] = b.level;
  d["repairs"] = b.repairs;
  d["reliable"] = b.reliable;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Richards-curve Poisson / negative binomial models for daily epidemic counts";
  m.attr("__version__") = RICHFIT_VERSION;

  py::register_exception<InvalidParameter>(m, "InvalidParameter", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<InsufficientData>(m, "InsufficientData", PyExc_ValueError);
  py::register_exception<NonConvergence>(m, "NonConvergence", PyExc_RuntimeError);

  py::class_<RichardsParams>(m, "Richards")
      .def(py::init([](double b, double r, double h, double p, double s) {
             RichardsParams g{b, r, h, p, s};
             g.validate();
             return g;
           }),
           py::arg("b") = 0.0, py::arg("r"), py::arg("h"), py::arg("p"), py::arg("s"))
      .def_readwrite("b", &RichardsParams::b)
      .def_readwrite("r", &RichardsParams::r)
      .def_readwrite("h", &RichardsParams::h)
      .def_readwrite("p", &RichardsParams::p)
      .def_readwrite("s", &RichardsParams::s)
      .def("__call__", [](const RichardsParams& g, double t) { return richards(t, g); })
      .def("__call__", [](const RichardsParams& g, const Reals& t) { return apply(t, g, richards); })
      .def("diff", [](const RichardsParams& g, double t) { return richards_diff(t, g); })
      .def("diff", [](const RichardsParams& g, const Reals& t) { return apply(t, g, richards_diff); },
           "expected daily count lambda(t) - lambda(t-1)")
      .def_property_readonly("peak", [](const RichardsParams& g) { return peak_time(g); });

  py::class_<ModelSpec>(m, "Model")
      .def(py::init(&make_spec), py::arg("family") = "negbin", py::arg("baseline") = true,
           py::arg("covariates") = "none", py::arg("design") = py::none())
      .def_property_readonly("names", [](const ModelSpec& s) { return s.layout().names; })
      .def_property_readonly("k", [](const ModelSpec& s) { return s.layout().size(); })
      .def("mean", [](const ModelSpec& s, const Eigen::VectorXd& theta, long n) { return mean_trajectory(n, s, theta); },
           py::arg("theta"), py::arg("n"), "daily means for t = 1..n")
      .def("loglik", [](const ModelSpec& s, const Counts& y, const Eigen::VectorXd& th) {
             const auto v = to_counts(y);
             return loglik(v, s, th);
           })
      .def("gradient", [](const ModelSpec& s, const Counts& y, const Eigen::VectorXd& th) {
             const auto v = to_counts(y);
             return loglik_gradient(v, s, th);
           })
      .def("hessian", [](const ModelSpec& s, const Counts& y, const Eigen::VectorXd& th) {
             const auto v = to_counts(y);
             return loglik_hessian(v, s, th);
           })
      .def("simulate", [](const ModelSpec& s, const Eigen::VectorXd& th, long n, std::uint64_t seed) {
             return to_array(sample_counts(s, th, n, seed).values);
           },
           py::arg("theta"), py::arg("n"), py::arg("seed"))
      .def("peak", [](const ModelSpec& s, const Eigen::VectorXd& th) { return peak_time(growth_params(s, th)); });

  py::class_<FitResult>(m, "Fit")
      .def_property_readonly("theta", [](const FitResult& f) { return f.theta; })
      .def_property_readonly("names", [](const FitResult& f) { return f.layout.names; })
      .def_readonly("loglik", &FitResult::loglik)
      .def_readonly("k", &FitResult::k)
      .def_readonly("T", &FitResult::T)
      .def_readonly("seed", &FitResult::seed)
      .def_property_readonly("aic", [](const FitResult& f) { return f.criteria.aic; })
      .def_property_readonly("aicc", [](const FitResult& f) { return f.criteria.aicc; })
      .def_property_readonly("bic", [](const FitResult& f) { return f.criteria.bic; })
      .def_property_readonly("covariance", [](const FitResult& f) { return f.covariance_theta; })
      .def_property_readonly("converged", [](const FitResult& f) { return f.convergence.converged; })
      .def_property_readonly("peak", [](const FitResult& f) { return peak_time(growth_params(f.spec, f.theta)); })
      .def_property_readonly("estimates", [](const FitResult& f) {
        py::dict d;
        for (int i = 0; i < f.layout.size(); ++i) d[py::str(f.layout.names[static_cast<std::size_t>(i)])] = f.theta[i];
        return d;
      })
      .def("intervals",
           [](const FitResult& f, double level, const std::string& scale) {
             if (scale != "log" && scale != "constrained") throw InvalidParameter("scale must be 'log' or 'constrained'");
             py::list out;
             for (const auto& p : parameter_intervals(
                      f, level, scale == "log" ? IntervalScale::Log : IntervalScale::Constrained)) {
               py::dict d;
               d["name"] = p.name;
               d["estimate"] = p.estimate;
               d["lower"] = p.lower;
               d["upper"] = p.upper;
               d["std_error"] = p.std_error;
               d["reliable"] = p.reliable;
               out.append(d);
             }
             return out;
           },
           py::arg("level") = 0.95, py::arg("scale") = "log");

  m.def(
      "fit",
      [](const ModelSpec& spec, const Counts& y, int starts, std::uint64_t seed, int threads, bool ga) {
        FitConfig cfg;
        cfg.n_starts = starts;
        cfg.seed = seed;
        cfg.threads = threads;
        if (ga) cfg.ga = GaSettings{};
        const auto v = to_counts(y);
        py::gil_scoped_release release;
        return fit(v, spec, cfg);
      },
      py::arg("model"), py::arg("y"), py::arg("starts") = 50, py::arg("seed") = 20200224, py::arg("threads") = 0,
      py::arg("ga") = false, "maximum-likelihood fit by multistart Newton");

  m.def(
      "forecast",
      [](const FitResult& f, int B, long horizon, std::uint64_t seed, double level, int threads) {
        BootstrapEnsemble ens;
        {
          py::gil_scoped_release release;
          ens = draw_ensemble(f, B, f.T + horizon, seed, threads);
        }
        py::dict d;
        d["daily"] = band_dict(prediction_band(ens, f, level, horizon));
        d["cumulative"] = band_dict(cumulative_band(ens, f, level, horizon));
        const auto pk = peak_interval(ens, level);
        d["peak"] = py::dict(py::arg("point") = pk.point, py::arg("lower") = pk.lower, py::arg("upper") = pk.upper,
                             py::arg("reliable") = pk.reliable);
        return d;
      },
      py::arg("fit"), py::arg("B") = 2000, py::arg("horizon") = 14, py::arg("seed") = 20200224,
      py::arg("level") = 0.95, py::arg("threads") = 0, "parametric double bootstrap bands and peak interval");

  m.def("rmspe", [](const Reals& y, const Reals& yhat) { return rmspe(to_reals(y), to_reals(yhat)); });
  m.def("pseudo_r2", [](const Reals& y, const Reals& fitted) { return pseudo_r2(to_reals(y), to_reals(fitted)); });
  m.def("shapiro_wilk", [](const Reals& x) {
    const auto r = shapiro_wilk(to_reals(x));
    return py::make_tuple(r.statistic, r.p_value);
  });
  m.def(
      "smoothed_true_peak",
      [](const Counts& y, int window) {
        CountSeries s;
        s.values = to_counts(y);
        return smoothed_true_peak(s, window).t;
      },
      py::arg("y"), py::arg("window") = 7, "day index t of the centered moving-average maximum");

  m.def(
      "read_dpc",
      [](const std::filesystem::path& path, const std::string& indicator, const std::string& scope,
         const std::string& region) {
        const Scope sc = scope == "regional" ? Scope::Regional : Scope::National;
        auto table = parse_dpc(path, sc);
        if (sc == Scope::Regional) table = merge_autonomous_provinces(table);
        const auto s = extract_series(table, parse_indicator(indicator), region);
        return py::make_tuple(s.origin.iso(), to_array(s.values), to_array(s.clamp_log));
      },
      py::arg("path"), py::arg("indicator") = "positives", py::arg("scope") = "national", py::arg("region") = "",
      "(origin date, daily counts for t = 1..T, clamped days)");

  m.def(
      "weekday_design",
      [](const py::object& origin, long n, const std::vector<std::string>& days) {
        std::set<Weekday> flagged;
        for (const auto& d : days) flagged.insert(parse_weekday(d));
        const Date o = to_date(origin);
        std::vector<Date> dates;
        for (long t = 1; t <= n; ++t) dates.push_back(o + t);
        return weekday_design(dates, flagged).X;
      },
      py::arg("origin"), py::arg("n"), py::arg("days"), "intercept plus weekday dummy for t = 1..n");
}

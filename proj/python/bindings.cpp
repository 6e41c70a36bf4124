#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "austen/commands.hpp"
#include "austen/core.hpp"
#include "austen/errors.hpp"
#include "austen/io.hpp"
#include "austen/plot.hpp"
#include "austen/specfun.hpp"

namespace py = pybind11;
using namespace austen;

namespace {

Estimand estimand_arg(const std::string& s) { return parse_estimand(s); }

py::dict curve_dict(const BiasCurve& curve) {
  std::vector<double> alpha, r2;
  std::vector<bool> feasible;
  for (const auto& p : curve.points) {
    alpha.push_back(p.alpha);
    r2.push_back(p.r2);
    feasible.push_back(p.feasible);
  }
  py::dict d;
  d["target_bias"] = curve.target_bias;
  d["estimand"] = to_string(curve.estimand);
  d["alpha"] = alpha;
  d["r2"] = r2;
  d["feasible"] = feasible;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Austen plots: sensitivity analysis for unobserved confounding";

  auto base = py::register_exception<Error>(m, "AustenError", PyExc_RuntimeError);
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<DegenerateDataError>(m, "DegenerateDataError", base.ptr());

  m.def("digamma", py::overload_cast<double>(&specfun::digamma), py::arg("x"));
  m.def("trigamma", py::overload_cast<double>(&specfun::trigamma), py::arg("x"));

  py::class_<PredictionFrame>(m, "PredictionFrame")
      .def(py::init(&PredictionFrame::from_columns), py::arg("y"), py::arg("t"), py::arg("g"),
           py::arg("q0"), py::arg("q1"))
      .def_static("read_csv", [](const std::filesystem::path& p) { return io::read_predictions(p); })
      .def("__len__", &PredictionFrame::size)
      .def_property_readonly("clipped_count", &PredictionFrame::clipped_count)
      .def_property_readonly("treated_count", &PredictionFrame::treated_count)
      .def_property_readonly("g", [](const PredictionFrame& f) {
        return std::vector<double>(f.g().begin(), f.g().end());
      });

  m.def(
      "tau_hat",
      [](const PredictionFrame& f, const std::string& est) { return tau_hat(f, estimand_arg(est)); },
      py::arg("frame"), py::arg("estimand") = "ate");
  m.def(
      "bias",
      [](const PredictionFrame& f, double alpha, double delta, const std::string& est) {
        return bias(alpha, delta, f, estimand_arg(est));
      },
      py::arg("frame"), py::arg("alpha"), py::arg("delta"), py::arg("estimand") = "ate");
  m.def(
      "r2_par", [](const PredictionFrame& f, double alpha, double delta) {
        return r2_par(alpha, delta, f);
      },
      py::arg("frame"), py::arg("alpha"), py::arg("delta"));
  m.def(
      "delta_from_r2",
      [](const PredictionFrame& f, double alpha, double r2) { return delta_from_r2(r2, alpha, f); },
      py::arg("frame"), py::arg("alpha"), py::arg("r2"));
  m.def(
      "bias_contour",
      [](const PredictionFrame& f, double target, const std::string& est,
         std::optional<std::vector<double>> grid) {
        const auto g = grid ? *grid : default_alpha_grid();
        return curve_dict(bias_contour(target, f, estimand_arg(est), g));
      },
      py::arg("frame"), py::arg("target_bias"), py::arg("estimand") = "ate",
      py::arg("alpha_grid") = py::none());
  m.def(
      "calibrate",
      [](const PredictionFrame& f, const std::string& group, std::vector<double> g_wo,
         std::vector<double> q_wo) {
        const auto lo = LeaveOutPredictions::make(group, std::move(g_wo), std::move(q_wo));
        const auto d = covariate_influence(f, lo);
        py::dict out;
        out["group"] = d.group_name;
        out["alpha_hat"] = d.alpha_hat;
        out["r2_hat"] = d.r2_hat;
        out["alpha_raw"] = d.alpha_raw;
        out["r2_raw"] = d.r2_raw;
        out["clipped"] = d.clipped;
        return out;
      },
      py::arg("frame"), py::arg("group"), py::arg("g_wo"), py::arg("q_wo"));
  m.def(
      "render_svg",
      [](const std::string& plot_data_json) {
        return render_svg(io::parse_plot_data(io::Json::parse(plot_data_json)));
      },
      py::arg("plot_data_json"));
  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "austen");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "austen/commands.hpp"
#include "austen/errors.hpp"
#include "fixtures.hpp"

using namespace austen;
using namespace austen::cli;

namespace {

struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name)
      : dir(fs::temp_directory_path() / ("austen_cmd_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int invoke(std::vector<std::string> args, std::string* out_text = nullptr,
           std::string* err_text = nullptr) {
  args.insert(args.begin(), "austen");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

fs::path write_frame(const fs::path& dir, const PredictionFrame& f) {
  const auto p = dir / "pred.csv";
  io::write_predictions(p, f);
  return p;
}

}  // namespace

TEST_CASE("exit codes") {
  Scratch s("exit");
  const auto pred = write_frame(s.dir, test::random_frame(1));
  const auto out = (s.dir / "out").string();
  std::string o, e;
  CHECK(invoke({"plot", pred.string(), "--out", out}, &o, &e) == kExitOk);
  CHECK(o.find("austen_plot.svg") != std::string::npos);
  CHECK(e.find("tau_hat") != std::string::npos);
  CHECK(invoke({"--help"}) == kExitOk);
  CHECK(invoke({"plot", pred.string(), "--target-bias", "0", "--out", out}, &o, &e) == kExitInput);
  CHECK(e.find("target bias must be positive") != std::string::npos);
  CHECK(invoke({"plot", pred.string(), "--target-bias", "-1", "--out", out}) == kExitInput);
  CHECK(invoke({"plot", (s.dir / "absent.csv").string()}) == kExitInput);
  CHECK(invoke({"plot", pred.string(), "--estimand", "ato"}) == kExitInput);
  CHECK(invoke({"plot", pred.string(), "--alpha-grid", "0.5,0.1,3"}) == kExitInput);
  CHECK(invoke({"bias", pred.string(), "--alpha", "0.3", "--r2", "1"}) == kExitInput);
  CHECK(invoke({"bias", pred.string(), "--alpha", "0.3", "--r2", "0.1", "--delta", "1"}) ==
        kExitInput);

  // a constant outcome model gives zero residual variance
  const auto flat = PredictionFrame::from_columns({1, 1, 1, 1}, {0, 1, 0, 1}, {0.4, 0.5, 0.6, 0.5},
                                                  {1, 1, 1, 1}, {1, 1, 1, 1});
  const auto flat_path = write_frame(s.dir, flat);
  CHECK(invoke({"plot", flat_path.string(), "--target-bias", "0.5", "--out", out}, &o, &e) ==
        kExitNumeric);
  CHECK(invoke({"plot", flat_path.string(), "--out", out}) == kExitNumeric);
}

TEST_CASE("plot outputs") {
  Scratch s("plot");
  const auto f = test::random_frame(2);
  PlotOptions opts;
  opts.predictions = write_frame(s.dir, f);
  opts.out = s.dir / "out";

  SUBCASE("curve only") {
    const auto r = cmd_plot(opts);
    CHECK(r.data.dots.empty());
    CHECK_FALSE(r.band);
    CHECK(r.target_bias == std::abs(tau_hat(f, Estimand::ATE)));
    CHECK(r.data.curve.points.size() == 199);
    CHECK(fs::exists(opts.out / "austen_plot.svg"));
    CHECK(fs::exists(opts.out / "plot_data.json"));
    CHECK_FALSE(fs::exists(opts.out / "band.json"));
    const auto doc = io::read_json(opts.out / "plot_data.json");
    CHECK(doc["band"].is_null());
    CHECK(doc["labels"]["annotation"].get<std::string>().rfind("bias = ", 0) == 0);
  }
  SUBCASE("repeat runs are byte-identical") {
    opts.bootstrap = 20;
    opts.seed = 3;
    cmd_plot(opts);
    const auto svg = slurp(opts.out / "austen_plot.svg");
    const auto band = slurp(opts.out / "band.json");
    cmd_plot(opts);
    CHECK(slurp(opts.out / "austen_plot.svg") == svg);
    CHECK(slurp(opts.out / "band.json") == band);
  }
  SUBCASE("unattainable target") {
    opts.target_bias = 1e6;
    const auto r = cmd_plot(opts);
    CHECK(r.data.feasible_region_empty());
    CHECK(r.warnings.back().find("unattainable") != std::string::npos);
  }
}

TEST_CASE("estimands agree under constant propensity") {
  Scratch s("att");
  const auto f = test::constant_g_frame(4, 300, 0.35);
  PlotOptions opts;
  opts.predictions = write_frame(s.dir, f);
  opts.out = s.dir / "out";
  opts.target_bias = 0.4;
  const auto ate = cmd_plot(opts);
  opts.estimand = Estimand::ATT;
  const auto att = cmd_plot(opts);
  for (std::size_t i = 0; i < ate.data.curve.points.size(); ++i) {
    CHECK(att.data.curve.points[i].r2 ==
          doctest::Approx(ate.data.curve.points[i].r2).epsilon(1e-12));
  }
}

TEST_CASE("bias command") {
  Scratch s("bias");
  const auto f = test::random_frame(5);
  BiasOptions b;
  b.predictions = write_frame(s.dir, f);
  b.alpha = 0.2;
  b.r2 = 0.0;
  CHECK(cmd_bias(b) == 0.0);

  // the two parameterizations describe the same confounder
  b.r2 = 0.3;
  const double via_r2 = cmd_bias(b);
  b.r2.reset();
  b.delta = delta_from_r2(0.3, 0.2, f);
  CHECK(cmd_bias(b) == doctest::Approx(via_r2).epsilon(1e-12));

  // a contour point induces the target bias
  const auto curve = bias_contour(0.25, f, Estimand::ATE, alpha_grid(0.1, 0.9, 9));
  for (const auto& p : curve.points) {
    if (!p.feasible) continue;
    b.alpha = p.alpha;
    b.delta.reset();
    b.r2 = p.r2;
    CHECK(std::abs(cmd_bias(b)) == doctest::Approx(0.25).epsilon(1e-9));
  }

  b.alpha = 1.0;
  CHECK_THROWS_AS(cmd_bias(b), InputError);
}

TEST_CASE("config overrides flags") {
  Scratch s("config");
  const auto f = test::random_frame(6);
  write_frame(s.dir, f);
  io::write_json(s.dir / "run.json",
                 io::Json{{"schema_version", 1},
                          {"predictions", "pred.csv"},
                          {"target_bias", 0.3},
                          {"alpha_grid", {{"start", 0.1}, {"stop", 0.9}, {"count", 5}}},
                          {"out", "from_config"}});
  PlotOptions opts;
  opts.predictions = "ignored.csv";
  opts.target_bias = 9.0;
  opts.out = "ignored";
  apply_config(opts, io::read_config(s.dir / "run.json"));
  CHECK(opts.predictions == s.dir / "pred.csv");
  CHECK(opts.target_bias == 0.3);
  CHECK(opts.out == s.dir / "from_config");
  CHECK(opts.grid.count == 5);
  CHECK(opts.bootstrap == 0);

  CHECK(invoke({"plot", "--target-bias", "9", "--config", (s.dir / "run.json").string()}) ==
        kExitOk);
  const auto doc = io::read_json(s.dir / "from_config" / "plot_data.json");
  CHECK(doc["target_bias"].get<double>() == 0.3);
  CHECK(doc["curve"]["alpha"].size() == 5);
}

TEST_CASE("simulate, fit, calibrate") {
  Scratch s("pipeline");
  SimulateOptions so;
  so.n = 600;
  so.seed = 8;
  so.out = s.dir / "sim";
  const auto sample = cmd_simulate(so);
  CHECK(sample.size() == 600);
  const auto truth = io::read_json(so.out / "ground_truth.json");
  CHECK(truth["bias"].get<double>() == sample.truth.bias);

  io::write_json(s.dir / "groups.json",
                 io::to_json(GroupSpec{{{"x1", {"x1"}}, {"noise1", {"noise1"}}}, false}));
  FitOptions fo;
  fo.dataset = so.out / "dataset.csv";
  fo.groups = s.dir / "groups.json";
  fo.out = s.dir / "fit";
  const auto fit = cmd_fit(fo);
  CHECK(fit.leave.leave_outs.size() == 2);
  CHECK(fs::exists(fo.out / "leave_out" / "noise1.csv"));

  CalibrateOptions co;
  co.predictions = fo.out / "predictions.csv";
  co.leave_outs = {io::parse_leave_out_source((fo.out / "leave_out" / "x1.csv").string()),
                   io::parse_leave_out_source("n=" + (fo.out / "leave_out" / "noise1.csv").string())};
  const auto dots = cmd_calibrate(co);
  REQUIRE(dots.size() == 2);
  CHECK(dots[0].group_name == "x1");
  CHECK(dots[1].group_name == "n");
  const auto table = format_dots(dots);
  CHECK(table.rfind("group\talpha_hat", 0) == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 3);

  io::write_json(s.dir / "bad_groups.json",
                 io::to_json(GroupSpec{{{"a/b", {"x1"}}}, false}));
  fo.groups = s.dir / "bad_groups.json";
  CHECK_THROWS_AS(cmd_fit(fo), InputError);
}

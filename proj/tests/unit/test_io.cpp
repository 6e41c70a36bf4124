#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "austen/errors.hpp"
#include "austen/io.hpp"
#include "fixtures.hpp"

using namespace austen;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("austen_io_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& name, const std::string& text) const {
    const auto p = path / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }
};

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& s, const std::string& part) {
  return s.find(part) != std::string::npos;
}

}  // namespace

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125, 1e21, 0.0}) {
    const auto s = io::format_number(v);
    CHECK(std::stod(s) == v);
  }
  CHECK(io::format_number(0.1) == "0.1");
}

TEST_CASE("predictions table") {
  TempDir dir;
  SUBCASE("well formed") {
    const auto p = dir.write("p.csv", "y,t,g,q0,q1\n1.5,1,0.4,0,1\n-2,0,0.6,0.5,1e-3\n3,0,0.5,1,2\n");
    const auto f = io::read_predictions(p);
    CHECK(f.size() == 3);
    CHECK(f.q1()[1] == 1e-3);
  }
  SUBCASE("CRLF and missing final newline") {
    const auto p = dir.write("p.csv", "y,t,g,q0,q1\r\n1,1,0.4,0,1\r\n2,0,0.6,0,1");
    CHECK(io::read_predictions(p).size() == 2);
  }
  SUBCASE("boundary propensity") {
    const auto p = dir.write("p.csv", "y,t,g,q0,q1\n1,1,1.0,0,1\n2,0,0.6,0,1\n3,0,0.5,0,1\n");
    const auto f = io::read_predictions(p);
    CHECK(f.clipped_count() == 1);
    CHECK(f.g()[0] == 1.0 - 1e-6);
  }
  SUBCASE("wrong header names the missing columns") {
    const auto p = dir.write("p.csv", "y,t,g,q\n1,1,0.5,0\n2,0,0.5,0\n");
    const auto msg = error_of([&] { io::read_predictions(p); });
    CHECK(contains(msg, "missing columns: q0, q1"));
    CHECK(contains(msg, "unexpected columns: q"));
    CHECK(contains(msg, "p.csv:1"));
  }
  SUBCASE("cell errors carry coordinates") {
    auto msg = error_of([&] {
      io::read_predictions(dir.write("p.csv", "y,t,g,q0,q1\n1,1,0.5,0,1\n2,0,abc,0,1\n"));
    });
    CHECK(contains(msg, "p.csv:3"));
    CHECK(contains(msg, "column 'g'"));
    msg = error_of([&] {
      io::read_predictions(dir.write("p.csv", "y,t,g,q0,q1\nnan,1,0.5,0,1\n2,0,0.5,0,1\n"));
    });
    CHECK(contains(msg, "p.csv:2"));
    CHECK(contains(msg, "column 'y'"));
    msg = error_of([&] {
      io::read_predictions(dir.write("p.csv", "y,t,g,q0,q1\n1,1,0.5,0,inf\n2,0,0.5,0,1\n"));
    });
    CHECK(contains(msg, "column 'q1'"));
    msg = error_of([&] {
      io::read_predictions(dir.write("p.csv", "y,t,g,q0,q1\n1,2,0.5,0,1\n2,0,0.5,0,1\n"));
    });
    CHECK(contains(msg, "column 't'"));
    msg = error_of([&] {
      io::read_predictions(dir.write("p.csv", "y,t,g,q0,q1\n1,1,0.5,0\n2,0,0.5,0,1\n"));
    });
    CHECK(contains(msg, "p.csv:2"));
    msg = error_of([&] {
      io::read_predictions(dir.write("p.csv", "y,t,g,q0,q1\n1,1,1.5,0,1\n2,0,0.5,0,1\n"));
    });
    CHECK(contains(msg, "column 'g'"));
    msg = error_of([&] {
      io::read_predictions(dir.write("p.csv", "y,t,g,q0,q1\n1,1, 0.5,0,1\n2,0,0.5,0,1\n"));
    });
    CHECK(contains(msg, "column 'g'"));
  }
  SUBCASE("missing file and empty file") {
    CHECK_THROWS_AS(io::read_predictions(dir.path / "absent.csv"), InputError);
    CHECK_THROWS_AS(io::read_predictions(dir.write("e.csv", "")), InputError);
    CHECK_THROWS_AS(io::read_predictions(dir.write("h.csv", "y,t,g,q0,q1\n")), InputError);
  }
  SUBCASE("round trip is value exact") {
    const auto f = test::random_frame(1, 64);
    io::write_predictions(dir.path / "rt.csv", f);
    const auto g = io::read_predictions(dir.path / "rt.csv");
    for (std::size_t i = 0; i < f.size(); ++i) {
      CHECK(g.y()[i] == f.y()[i]);
      CHECK(g.t()[i] == f.t()[i]);
      CHECK(g.g()[i] == f.g()[i]);
      CHECK(g.q0()[i] == f.q0()[i]);
      CHECK(g.q1()[i] == f.q1()[i]);
    }
  }
}

TEST_CASE("leave-out table") {
  TempDir dir;
  const auto f = test::random_frame(2, 20);
  std::vector<double> g(f.size(), 0.4), q(f.size(), 0.25);
  const auto lo = LeaveOutPredictions::make("grp", g, q);
  io::write_leave_out(dir.path / "sub" / "grp.csv", f, lo);
  const auto back = io::read_leave_out(dir.path / "sub" / "grp.csv", "grp", &f);
  CHECK(back.g_wo == lo.g_wo);
  CHECK(back.q_wo == lo.q_wo);

  const auto other = test::random_frame(3, 20);
  const auto msg = error_of([&] { io::read_leave_out(dir.path / "sub" / "grp.csv", "grp", &other); });
  CHECK(contains(msg, "does not match"));
  const auto shorter = test::random_frame(3, 19);
  CHECK_THROWS_AS(io::read_leave_out(dir.path / "sub" / "grp.csv", "grp", &shorter), InputError);
  CHECK_THROWS_AS(io::read_leave_out(dir.write("bad.csv", "y,t,g,q\n1,1,0.5,0\n"), "grp"),
                  InputError);
}

TEST_CASE("dataset table") {
  TempDir dir;
  Dataset d{{1.0, 2.5}, {0, 1}, {"a", "b"}, {{0.1, 0.2}, {3.0, -4.0}}};
  io::write_dataset(dir.path / "d.csv", d);
  const auto back = io::read_dataset(dir.path / "d.csv");
  CHECK(back.y == d.y);
  CHECK(back.t == d.t);
  CHECK(back.covariate_names == d.covariate_names);
  CHECK(back.covariates == d.covariates);
  CHECK_THROWS_AS(io::read_dataset(dir.write("x.csv", "t,y,a\n0,1,2\n")), InputError);
  CHECK_THROWS_AS(io::read_dataset(dir.write("x.csv", "y,t,a,a\n1,0,2,3\n")), InputError);
}

TEST_CASE("command-line value syntaxes") {
  const auto g = io::parse_alpha_grid("0.1,0.9,5");
  CHECK(g.start == 0.1);
  CHECK(g.stop == 0.9);
  CHECK(g.count == 5);
  CHECK_THROWS_AS(io::parse_alpha_grid("0.1,0.9"), InputError);
  CHECK_THROWS_AS(io::parse_alpha_grid("0,0.9,5"), InputError);
  CHECK_THROWS_AS(io::parse_alpha_grid("0.1,0.9,x"), InputError);

  const auto a = io::parse_leave_out_source("age=out/lo.csv");
  CHECK(a.group == "age");
  CHECK(a.path == fs::path("out/lo.csv"));
  const auto b = io::parse_leave_out_source("out/leave_out/income.csv");
  CHECK(b.group == "income");
  CHECK_THROWS_AS(io::parse_leave_out_source("=x.csv"), InputError);
}

TEST_CASE("run config") {
  TempDir dir;
  const auto p = dir.write("run.json", R"({
    "schema_version": 1,
    "predictions": "fit/predictions.csv",
    "leave_out": [{"group": "x1", "path": "fit/leave_out/x1.csv"}],
    "target_bias": 1.5,
    "estimand": "att",
    "alpha_grid": {"start": 0.01, "stop": 0.99, "count": 50},
    "bootstrap": 20,
    "level": 0.9,
    "seed": 3,
    "out": "/abs/out",
    "title": "T"
  })");
  const auto c = io::read_config(p);
  CHECK(*c.predictions == dir.path / "fit/predictions.csv");
  CHECK(c.leave_outs->at(0).path == dir.path / "fit/leave_out/x1.csv");
  CHECK(*c.target_bias == 1.5);
  CHECK(*c.estimand == Estimand::ATT);
  CHECK(c.alpha_grid->count == 50);
  CHECK(*c.bootstrap == 20);
  CHECK(*c.out == fs::path("/abs/out"));

  auto msg = error_of([] {
    io::parse_run_config(io::Json::parse(R"({"schema_version":1,"targt_bias":1})"));
  });
  CHECK(contains(msg, "unknown key 'targt_bias'"));
  CHECK(contains(msg, "accepted keys: schema_version, predictions"));
  msg = error_of([] { io::parse_run_config(io::Json::parse(R"({"schema_version":1,"estimand":"ATC"})")); });
  CHECK(contains(msg, "ATE, ATT"));
  CHECK_THROWS_AS(io::parse_run_config(io::Json::parse(R"({"schema_version":1,"target_bias":0})")),
                  InputError);
  CHECK_THROWS_AS(io::parse_run_config(io::Json::parse(R"({"schema_version":2})")), InputError);
  CHECK_THROWS_AS(io::parse_run_config(io::Json::parse(R"({})")), InputError);
  CHECK_THROWS_AS(io::parse_run_config(io::Json::parse(R"({"schema_version":1,"level":1.5})")),
                  InputError);
  CHECK_THROWS_AS(io::read_config(dir.write("bad.json", "{not json")), InputError);
}

TEST_CASE("JSON documents are canonical") {
  auto round_trip = [](const io::Json& doc, auto parse) {
    const auto text = io::dump(doc);
    CHECK(io::dump(io::to_json(parse(io::Json::parse(text)))) == text);
  };
  SUBCASE("fit config") {
    FitConfig c;
    c.k = 3;
    c.seed = 9;
    round_trip(io::to_json(c), io::parse_fit_config);
    CHECK_THROWS_AS(io::parse_fit_config(io::Json::parse(R"({"schema_version":1,"k":1})")),
                    InputError);
  }
  SUBCASE("sim config") {
    SimConfig c;
    c.scenario = Scenario::Cancellation;
    c.propensity_coefs = {0.5, -0.25};
    round_trip(io::to_json(c), io::parse_sim_config);
  }
  SUBCASE("group spec keeps declaration order") {
    const auto spec = io::parse_group_spec(
        io::Json::parse(R"({"schema_version":1,"groups":{"zeta":["z"],"alpha":["a","b"]}})"));
    CHECK(spec.groups[0].first == "zeta");
    CHECK(spec.groups[1].second == std::vector<std::string>{"a", "b"});
    round_trip(io::to_json(spec), io::parse_group_spec);
  }
  SUBCASE("ground truth") {
    GroundTruth t{Scenario::Sensitivity, 0.3, 2.0, -2.5, -2.4, 3.5, 3.4, 0.8};
    round_trip(io::to_json(t), io::parse_ground_truth);
  }
  SUBCASE("dots") {
    std::vector<CovariateInfluence> dots{{"a", 0.1, 0.0, 0.1, -0.2, true}};
    round_trip(io::to_json(dots), io::parse_dots);
  }
  SUBCASE("band") {
    BootstrapBand b;
    b.replicates = 10;
    b.level = 0.95;
    b.seed = 4;
    b.alpha = {0.1, 0.2};
    b.r2 = {{0.1, 0.3}, {0.05, 1.7}};
    b.dots = {{"a", {0.0, 0.1}, {0.2, 0.3}}};
    round_trip(io::to_json(b), io::parse_band);
  }
  SUBCASE("plot data") {
    BiasCurve curve{0.5, Estimand::ATT, {{0.1, 1.0, false}, {0.5, 0.25, true}}};
    auto pd = build_plot_data(curve, {{"a", 0.1, 0.2, 0.1, 0.2, false}},
                              std::vector<Interval>{{0.9, 1.0}, {0.2, 0.3}}, PlotLabels{});
    round_trip(io::to_json(pd), io::parse_plot_data);
    pd.band.reset();
    round_trip(io::to_json(pd), io::parse_plot_data);
    auto doc = io::to_json(pd);
    doc["feasible_region_empty"] = true;
    CHECK_THROWS_AS(io::parse_plot_data(doc), InputError);
  }
}

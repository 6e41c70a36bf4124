#include "doctest.h"

#include <cmath>

#include "austen/bootstrap.hpp"
#include "austen/errors.hpp"
#include "fixtures.hpp"

using namespace austen;

namespace {

LeaveOutPredictions shrunk_leave_out(const PredictionFrame& f, const std::string& name) {
  std::vector<double> g(f.size()), q(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    g[i] = 0.5 + 0.6 * (f.g()[i] - 0.5);
    q[i] = 0.7 * f.q_observed(i);
  }
  return LeaveOutPredictions::make(name, g, q);
}

}  // namespace

TEST_CASE("quantiles") {
  CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 0.25) == doctest::Approx(1.75));
  CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 0.0) == 1.0);
  CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 1.0) == 4.0);
  CHECK(quantile({7.0}, 0.3) == 7.0);
  const auto iv = percentile_interval({1.0, 2.0, 3.0, 4.0}, 0.5);
  CHECK(iv.lo == doctest::Approx(1.75));
  CHECK(iv.hi == doctest::Approx(3.25));
}

TEST_CASE("config validation") {
  BootstrapConfig c;
  c.replicates = 0;
  CHECK_THROWS_AS(c.validate(), InputError);
  c.replicates = 10;
  c.level = 1.0;
  CHECK_THROWS_AS(c.validate(), InputError);
}

TEST_CASE("single replicate") {
  const auto f = test::random_frame(31, 150);
  const std::vector<LeaveOutPredictions> los{shrunk_leave_out(f, "z")};
  const auto grid = alpha_grid(0.05, 0.95, 19);
  BootstrapConfig c;
  c.replicates = 1;
  c.seed = 77;
  for (auto est : {Estimand::ATE, Estimand::ATT}) {
    const auto band = bootstrap_band(f, los, 0.3, est, grid, c);
    std::size_t redraws = 0;
    const auto rows = draw_rows(f.t(), 77, 0, c.max_redraws, redraws);
    const auto sel = f.select(rows);
    for (std::size_t a = 0; a < grid.size(); ++a) {
      CHECK(band.r2[a].lo == band.r2[a].hi);
      CHECK(band.r2[a].lo == doctest::Approx(contour_r2(0.3, sel, est, grid[a])).epsilon(1e-12));
    }
    const auto dot = covariate_influence(sel, los[0].select(rows));
    CHECK(band.dots[0].alpha.lo == dot.alpha_hat);
    CHECK(band.dots[0].r2.hi == dot.r2_hat);
  }
}

TEST_CASE("determinism") {
  const auto f = test::random_frame(32, 200);
  const std::vector<LeaveOutPredictions> los{shrunk_leave_out(f, "a"), shrunk_leave_out(f, "b")};
  const auto grid = default_alpha_grid();
  BootstrapConfig c;
  c.replicates = 40;
  c.seed = 5;
  const auto a = bootstrap_band(f, los, 0.5, Estimand::ATE, grid, c);
  const auto b = bootstrap_band(f, los, 0.5, Estimand::ATE, grid, c);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(a.r2[i].lo == b.r2[i].lo);
    CHECK(a.r2[i].hi == b.r2[i].hi);
    CHECK(a.r2[i].lo <= a.r2[i].hi);
  }
  CHECK(a.dots[1].r2.lo == b.dots[1].r2.lo);
  c.seed = 6;
  const auto d = bootstrap_band(f, los, 0.5, Estimand::ATE, grid, c);
  CHECK(d.r2[50].lo != a.r2[50].lo);
}

TEST_CASE("single-arm replicates are redrawn") {
  const auto f = PredictionFrame::from_columns({1, 2, 3}, {0, 0, 1}, {0.3, 0.4, 0.5}, {0, 0, 0},
                                               {1, 1, 1});
  const std::vector<double> grid{0.5};
  BootstrapConfig c;
  c.replicates = 100;
  const auto band = bootstrap_band(f, {}, 0.3, Estimand::ATE, grid, c);
  CHECK(band.redraws > 0);

  const auto pair = PredictionFrame::from_columns({1, 2}, {0, 1}, {0.3, 0.4}, {0, 0}, {1, 1});
  c.replicates = 200;
  c.max_redraws = 1;
  CHECK_THROWS_AS(bootstrap_band(pair, {}, 0.3, Estimand::ATE, grid, c), DegenerateDataError);
}

TEST_CASE("input checks") {
  const auto f = test::random_frame(33, 50);
  const std::vector<double> grid{0.5};
  CHECK_THROWS_AS(bootstrap_band(f, {}, 0.0, Estimand::ATE, grid, {}), InputError);
  const std::vector<double> bad{0.5, 0.4};
  CHECK_THROWS_AS(bootstrap_band(f, {}, 0.3, Estimand::ATE, bad, {}), InputError);
}

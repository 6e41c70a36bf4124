#include "doctest.h"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

#include "austen/errors.hpp"
#include "austen/io.hpp"
#include "austen/plot.hpp"
#include "fixtures.hpp"
#include "svg_probe.hpp"

using namespace austen;

namespace {

const std::string kData = AUSTEN_TEST_DATA_DIR;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

PlotData fixture() { return io::parse_plot_data(io::read_json(kData + "/plot_fixture.json")); }

void check_well_formed(const std::string& svg) { CHECK(test::well_formed(svg)); }

}  // namespace

TEST_CASE("golden file") {
  const auto svg = render_svg(fixture());
  if (std::getenv("AUSTEN_UPDATE_GOLDEN") != nullptr) {
    std::ofstream(kData + "/golden_plot.svg", std::ios::binary) << svg;
  }
  CHECK(svg == slurp(kData + "/golden_plot.svg"));
  CHECK(render_svg(fixture()) == svg);
  check_well_formed(svg);
  CHECK_FALSE(test::well_formed(svg.substr(0, svg.size() / 2)));
}

TEST_CASE("document validation") {
  const auto pd = fixture();
  CHECK_THROWS_AS(build_plot_data(BiasCurve{1.0, Estimand::ATE, {}}, {}, std::nullopt, {}),
                  InputError);
  CHECK_THROWS_AS(build_plot_data(pd.curve, {}, std::vector<Interval>{{0.1, 0.2}}, {}), InputError);
  std::vector<Interval> inverted(pd.curve.points.size(), Interval{0.1, 0.2});
  inverted[3] = {0.5, 0.4};
  CHECK_THROWS_AS(build_plot_data(pd.curve, {}, inverted, {}), InputError);
  PlotStyle squeezed;
  squeezed.width = 50;
  CHECK_THROWS_AS(build_plot_data(pd.curve, {}, std::nullopt, {}, squeezed), InputError);
}

TEST_CASE("minimal documents") {
  const auto pd = fixture();
  SUBCASE("no dots") {
    const auto d = build_plot_data(pd.curve, {}, std::nullopt, {});
    const auto svg = render_svg(d);
    check_well_formed(svg);
    CHECK(svg.find("<g id=\"dots\">\n</g>") != std::string::npos);
    CHECK(svg.find("id=\"band\"") == std::string::npos);
  }
  SUBCASE("dot at the origin") {
    const auto d = build_plot_data(pd.curve, {{"o", 0.0, 0.0, 0.0, 0.0, false}}, std::nullopt, {});
    const auto svg = render_svg(d);
    const auto ax = axis_transform(d.style);
    std::ostringstream expect;
    expect << "<circle cx=\"" << ax.x0 << "\" cy=\"" << ax.y0 << "\"";
    CHECK(svg.find(expect.str()) != std::string::npos);
  }
  SUBCASE("single curve point") {
    const auto d = build_plot_data(BiasCurve{0.2, Estimand::ATE, {{0.5, 0.5, true}}}, {},
                                   std::nullopt, {});
    const auto svg = render_svg(d);
    check_well_formed(svg);
    CHECK(svg.find("<polyline") == std::string::npos);
  }
  SUBCASE("escaping") {
    PlotLabels l;
    l.title = "a<b & \"c\"";
    const auto svg = render_svg(build_plot_data(pd.curve, {{"x&y", 0.2, 0.2, 0.2, 0.2, false}},
                                                std::nullopt, l));
    CHECK(svg.find("a&lt;b &amp; &quot;c&quot;") != std::string::npos);
    CHECK(svg.find(">x&amp;y<") != std::string::npos);
    check_well_formed(svg);
  }
}

TEST_CASE("infeasible region") {
  const auto c = test::constant_g_frame(1, 100, 0.5);
  const auto curve = bias_contour(1e6, c, Estimand::ATE, default_alpha_grid());
  const auto d = build_plot_data(curve, {}, std::nullopt, {});
  CHECK(d.feasible_region_empty());
  CHECK(io::to_json(d)["feasible_region_empty"] == true);
  const auto svg = render_svg(d);
  check_well_formed(svg);
  CHECK(svg.find("id=\"no-feasible\"") != std::string::npos);
  CHECK(svg.find("stroke-dasharray=\"6 4\"") != std::string::npos);

  const auto fx = render_svg(fixture());
  // only the first fixture point is infeasible: one dashed segment, then one solid run
  const std::regex dashed("<polyline stroke-dasharray=\"6 4\" points=\"([^\"]*)\"");
  std::smatch m;
  REQUIRE(std::regex_search(fx, m, dashed));
  const std::string pts = m[1].str();
  CHECK(std::count(pts.begin(), pts.end(), ',') == 2);
}

TEST_CASE("axis transform inverts") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto f = test::random_frame(seed, 200, 0.03, 0.97);
    const auto curve = bias_contour(0.2 + 0.1 * seed, f, Estimand::ATE, default_alpha_grid());
    const auto d = build_plot_data(curve, {}, std::nullopt, {});
    const auto svg = render_svg(d);
    check_well_formed(svg);
    const auto ax = test::published_axes(svg);
    CHECK(ax.x0 == axis_transform(d.style).x0);
    CHECK(ax.height == axis_transform(d.style).height);
    CHECK(test::curve_pixels(svg).size() == curve.points.size());
    CHECK(test::inverse_transform_error(svg, curve) < 1e-6);
  }
}

TEST_CASE("label layout") {
  const auto pd = fixture();
  SUBCASE("coincident dots take successive clockwise slots") {
    const auto d = build_plot_data(
        pd.curve, {{"aa", 0.5, 0.5, 0.5, 0.5, false}, {"bb", 0.5, 0.5, 0.5, 0.5, false}},
        std::nullopt, {});
    const auto svg = render_svg(d);
    const std::regex label("<text x=\"([-0-9.]+)\" y=\"([-0-9.]+)\" text-anchor=\"(\\w+)\">(aa|bb)</text>");
    std::vector<std::smatch> found;
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), label); it != std::sregex_iterator();
         ++it) {
      found.push_back(*it);
    }
    REQUIRE(found.size() == 2);
    const auto ax = axis_transform(d.style);
    const double cx = ax.px(0.5);
    const double cy = ax.py(0.5);
    // first label north-east: starts right of the dot, sits above it
    CHECK(found[0][3] == "start");
    CHECK(std::stod(found[0][1]) > cx);
    CHECK(std::stod(found[0][2]) < cy);
    // second label moves on clockwise to east: level with the dot
    CHECK(found[1][3] == "start");
    CHECK(std::stod(found[1][2]) > cy - 6.0);
    CHECK(std::stod(found[1][2]) < cy + 6.0);
  }
  SUBCASE("label near the right edge goes west") {
    const auto d = build_plot_data(pd.curve, {{"a long label", 1.0, 0.5, 1.0, 0.5, false}},
                                   std::nullopt, {});
    const auto svg = render_svg(d);
    CHECK(svg.find("text-anchor=\"end\">a long label</text>") != std::string::npos);
  }
}

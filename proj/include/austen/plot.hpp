#pragma once

// Austen plot document and its reference SVG rendering.

#include <optional>
#include <string>
#include <vector>

#include "austen/bootstrap.hpp"
#include "austen/calibration.hpp"
#include "austen/core.hpp"

namespace austen {

struct PlotLabels {
  std::string title = "Austen plot";
  std::string x_label = "Influence on treatment (alpha)";
  std::string y_label = "Influence on outcome (partial R²)";
  std::string annotation;  // e.g. "bias = 2.00"; empty hides it
};

struct PlotStyle {
  int width = 480;
  int height = 480;
  int margin_left = 64;
  int margin_right = 24;
  int margin_top = 40;
  int margin_bottom = 56;
  int font_size = 12;
  double dot_radius = 4.5;
  std::string curve_color = "#000000";
  std::string band_color = "#9ecae1";
  std::string infeasible_color = "#eeeeee";
  std::vector<std::string> dot_colors{"#d62728", "#ff7f0e", "#2ca02c", "#1f77b4",
                                      "#9467bd", "#8c564b", "#e377c2", "#17becf"};
};

struct PlotData {
  BiasCurve curve;
  std::vector<CovariateInfluence> dots;
  std::optional<std::vector<Interval>> band;  // aligned with curve.points
  PlotLabels labels;
  PlotStyle style;

  bool feasible_region_empty() const { return !curve.any_feasible(); }
};

/// Throws InputError when the curve is empty, the band is misaligned or a
/// band interval is inverted.
PlotData build_plot_data(BiasCurve curve, std::vector<CovariateInfluence> dots,
                         std::optional<std::vector<Interval>> band, PlotLabels labels,
                         PlotStyle style = {});

/// Maps the unit square onto the plot area: alpha rightwards, partial R² upwards.
struct AxisTransform {
  double x0 = 0.0;  // pixel x of alpha = 0
  double y0 = 0.0;  // pixel y of r2 = 0
  double width = 0.0;
  double height = 0.0;

  double px(double alpha) const { return x0 + alpha * width; }
  double py(double r2) const { return y0 - r2 * height; }
  double alpha_at(double px_value) const { return (px_value - x0) / width; }
  double r2_at(double py_value) const { return (y0 - py_value) / height; }
};

AxisTransform axis_transform(const PlotStyle& style);

/// Deterministic SVG 1.1 text. The axis transform is published in a
/// <metadata> element so coordinates can be mapped back.
std::string render_svg(const PlotData& data);

}  // namespace austen

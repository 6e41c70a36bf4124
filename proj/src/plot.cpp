#include "austen/plot.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <sstream>

#include "austen/errors.hpp"

namespace austen {
namespace {

// Fixed-point text with at most four decimals, trailing zeros dropped.
std::string num(double v) {
  if (std::abs(v) < 5e-5) v = 0.0;
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 4);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  std::string s(buf, ptr);
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::size_t glyphs(std::string_view text) {
  std::size_t n = 0;
  for (unsigned char c : text) n += (c & 0xC0) != 0x80;
  return n;
}

double unit(double v) { return std::clamp(v, 0.0, 1.0); }

struct Box {
  double x0, y0, x1, y1;
  bool overlaps(const Box& o) const {
    return x0 < o.x1 && o.x0 < x1 && y0 < o.y1 && o.y0 < y1;
  }
};

struct LabelSlot {
  double dx, dy;
};

// clockwise from north-east
constexpr double kDiag = 0.70710678118654752;
constexpr std::array<LabelSlot, 8> kSlots{{{kDiag, -kDiag},
                                           {1.0, 0.0},
                                           {kDiag, kDiag},
                                           {0.0, 1.0},
                                           {-kDiag, kDiag},
                                           {-1.0, 0.0},
                                           {-kDiag, -kDiag},
                                           {0.0, -1.0}}};

struct PlacedLabel {
  Box box;
  std::string anchor;
  double x, y;  // text position
};

PlacedLabel place_at(double cx, double cy, const LabelSlot& s, double offset, double w, double h) {
  const double ax = cx + offset * s.dx;
  const double ay = cy + offset * s.dy;
  PlacedLabel p{};
  if (s.dx > 0.1) {
    p.box.x0 = ax;
    p.anchor = "start";
    p.x = ax;
  } else if (s.dx < -0.1) {
    p.box.x0 = ax - w;
    p.anchor = "end";
    p.x = ax;
  } else {
    p.box.x0 = ax - w / 2.0;
    p.anchor = "middle";
    p.x = ax;
  }
  p.box.x1 = p.box.x0 + w;
  if (s.dy < -0.1) {
    p.box.y1 = ay;
  } else if (s.dy > 0.1) {
    p.box.y1 = ay + h;
  } else {
    p.box.y1 = ay + h / 2.0;
  }
  p.box.y0 = p.box.y1 - h;
  p.y = p.box.y1 - 0.2 * h;
  return p;
}

}  // namespace

PlotData build_plot_data(BiasCurve curve, std::vector<CovariateInfluence> dots,
                         std::optional<std::vector<Interval>> band, PlotLabels labels,
                         PlotStyle style) {
  if (curve.points.empty()) throw InputError("plot: curve has no points");
  if (band) {
    if (band->size() != curve.points.size()) {
      throw InputError("plot: band has " + std::to_string(band->size()) + " intervals for " +
                       std::to_string(curve.points.size()) + " curve points");
    }
    for (const auto& iv : *band) {
      if (!(iv.lo <= iv.hi)) throw InputError("plot: band interval has lo > hi");
    }
  }
  if (style.dot_colors.empty()) throw InputError("plot: style needs at least one dot colour");
  axis_transform(style);
  return PlotData{std::move(curve), std::move(dots), std::move(band), std::move(labels),
                  std::move(style)};
}

AxisTransform axis_transform(const PlotStyle& style) {
  const double w = style.width - style.margin_left - style.margin_right;
  const double h = style.height - style.margin_top - style.margin_bottom;
  if (!(w > 0.0) || !(h > 0.0)) throw InputError("plot: margins leave no drawing area");
  return {static_cast<double>(style.margin_left),
          static_cast<double>(style.height - style.margin_bottom), w, h};
}

std::string render_svg(const PlotData& data) {
  const auto& s = data.style;
  const auto ax = axis_transform(s);
  const auto& pts = data.curve.points;
  const double font = s.font_size;
  std::ostringstream out;

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << s.width
      << "\" height=\"" << s.height << "\" viewBox=\"0 0 " << s.width << ' ' << s.height
      << "\" font-family=\"sans-serif\" font-size=\"" << s.font_size << "\">\n";
  out << "<metadata><austen:axes xmlns:austen=\"urn:austen-plots\" x0=\"" << num(ax.x0)
      << "\" y0=\"" << num(ax.y0) << "\" width=\"" << num(ax.width) << "\" height=\""
      << num(ax.height) << "\"/></metadata>\n";
  out << "<title>" << escape(data.labels.title) << "</title>\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << s.width << "\" height=\"" << s.height
      << "\" fill=\"#ffffff\"/>\n";

  // shade alpha ranges where the target bias is unattainable
  out << "<g id=\"infeasible\" fill=\"" << escape(s.infeasible_color) << "\">\n";
  for (std::size_t i = 0; i < pts.size();) {
    if (pts[i].feasible) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < pts.size() && !pts[j + 1].feasible) ++j;
    const double left = i == 0 ? 0.0 : (pts[i - 1].alpha + pts[i].alpha) / 2.0;
    const double right = j + 1 == pts.size() ? 1.0 : (pts[j].alpha + pts[j + 1].alpha) / 2.0;
    out << "<rect x=\"" << num(ax.px(left)) << "\" y=\"" << num(ax.py(1.0)) << "\" width=\""
        << num(ax.px(right) - ax.px(left)) << "\" height=\"" << num(ax.height) << "\"/>\n";
    i = j + 1;
  }
  out << "</g>\n";

  out << "<g id=\"grid\" stroke=\"#dddddd\" stroke-width=\"1\">\n";
  for (int k = 0; k <= 5; ++k) {
    const double v = k / 5.0;
    out << "<line x1=\"" << num(ax.px(v)) << "\" y1=\"" << num(ax.py(0.0)) << "\" x2=\""
        << num(ax.px(v)) << "\" y2=\"" << num(ax.py(1.0)) << "\"/>\n";
    out << "<line x1=\"" << num(ax.px(0.0)) << "\" y1=\"" << num(ax.py(v)) << "\" x2=\""
        << num(ax.px(1.0)) << "\" y2=\"" << num(ax.py(v)) << "\"/>\n";
  }
  out << "</g>\n";

  if (data.band) {
    out << "<polygon id=\"band\" fill=\"" << escape(s.band_color)
        << "\" fill-opacity=\"0.5\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      out << (i ? " " : "") << num(ax.px(pts[i].alpha)) << ','
          << num(ax.py(unit((*data.band)[i].hi)));
    }
    for (std::size_t i = pts.size(); i-- > 0;) {
      out << ' ' << num(ax.px(pts[i].alpha)) << ',' << num(ax.py(unit((*data.band)[i].lo)));
    }
    out << "\"/>\n";
  }

  out << "<g id=\"curve\" fill=\"none\" stroke=\"" << escape(s.curve_color)
      << "\" stroke-width=\"2\">\n";
  if (pts.size() == 1) {
    out << "<circle cx=\"" << num(ax.px(pts[0].alpha)) << "\" cy=\"" << num(ax.py(pts[0].r2))
        << "\" r=\"2\" fill=\"" << escape(s.curve_color) << "\"/>\n";
  }
  for (std::size_t i = 0; i + 1 < pts.size();) {
    const bool dashed = !pts[i].feasible || !pts[i + 1].feasible;
    std::size_t j = i + 1;
    while (j + 1 < pts.size() && (!pts[j].feasible || !pts[j + 1].feasible) == dashed) ++j;
    out << "<polyline" << (dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
    for (std::size_t k = i; k <= j; ++k) {
      out << (k > i ? " " : "") << num(ax.px(pts[k].alpha)) << ',' << num(ax.py(pts[k].r2));
    }
    out << "\"/>\n";
    i = j;
  }
  out << "</g>\n";

  out << "<g id=\"axes\" stroke=\"#000000\" stroke-width=\"1\">\n";
  out << "<line x1=\"" << num(ax.px(0.0)) << "\" y1=\"" << num(ax.py(0.0)) << "\" x2=\""
      << num(ax.px(1.0)) << "\" y2=\"" << num(ax.py(0.0)) << "\"/>\n";
  out << "<line x1=\"" << num(ax.px(0.0)) << "\" y1=\"" << num(ax.py(0.0)) << "\" x2=\""
      << num(ax.px(0.0)) << "\" y2=\"" << num(ax.py(1.0)) << "\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double v = k / 5.0;
    out << "<line x1=\"" << num(ax.px(v)) << "\" y1=\"" << num(ax.py(0.0)) << "\" x2=\""
        << num(ax.px(v)) << "\" y2=\"" << num(ax.py(0.0) + 5.0) << "\"/>\n";
    out << "<line x1=\"" << num(ax.px(0.0) - 5.0) << "\" y1=\"" << num(ax.py(v)) << "\" x2=\""
        << num(ax.px(0.0)) << "\" y2=\"" << num(ax.py(v)) << "\"/>\n";
  }
  out << "</g>\n";

  out << "<g id=\"tick-labels\" fill=\"#000000\">\n";
  for (int k = 0; k <= 5; ++k) {
    const double v = k / 5.0;
    const std::string label = num(v);
    out << "<text x=\"" << num(ax.px(v)) << "\" y=\"" << num(ax.py(0.0) + 8.0 + font)
        << "\" text-anchor=\"middle\">" << label << "</text>\n";
    out << "<text x=\"" << num(ax.px(0.0) - 8.0) << "\" y=\"" << num(ax.py(v) + font * 0.35)
        << "\" text-anchor=\"end\">" << label << "</text>\n";
  }
  out << "</g>\n";

  out << "<g id=\"dots\">\n";
  std::vector<Box> obstacles;
  for (const auto& d : data.dots) {
    const double cx = ax.px(unit(d.alpha_hat));
    const double cy = ax.py(unit(d.r2_hat));
    obstacles.push_back({cx - s.dot_radius, cy - s.dot_radius, cx + s.dot_radius, cy + s.dot_radius});
  }
  std::vector<Box> placed;
  const Box canvas{0.0, 0.0, static_cast<double>(s.width), static_cast<double>(s.height)};
  for (std::size_t i = 0; i < data.dots.size(); ++i) {
    const auto& d = data.dots[i];
    const auto& color = s.dot_colors[i % s.dot_colors.size()];
    const double cx = ax.px(unit(d.alpha_hat));
    const double cy = ax.py(unit(d.r2_hat));
    out << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"" << num(s.dot_radius)
        << "\" fill=\"" << escape(color) << "\" stroke=\"#000000\" stroke-width=\"0.5\"/>\n";

    const double w = 0.6 * font * static_cast<double>(glyphs(d.group_name));
    const double offset = s.dot_radius + 4.0;
    std::optional<PlacedLabel> chosen;
    for (const auto& slot : kSlots) {
      auto candidate = place_at(cx, cy, slot, offset, w, font);
      const auto& b = candidate.box;
      const bool inside = b.x0 >= canvas.x0 && b.y0 >= canvas.y0 && b.x1 <= canvas.x1 &&
                          b.y1 <= canvas.y1;
      const auto hits = [&](const Box& o) { return b.overlaps(o); };
      if (inside && std::none_of(placed.begin(), placed.end(), hits) &&
          std::none_of(obstacles.begin(), obstacles.end(), hits)) {
        chosen = candidate;
        break;
      }
    }
    if (!chosen) chosen = place_at(cx, cy, kSlots[0], offset, w, font);
    placed.push_back(chosen->box);
    out << "<text x=\"" << num(chosen->x) << "\" y=\"" << num(chosen->y) << "\" text-anchor=\""
        << chosen->anchor << "\">" << escape(d.group_name) << "</text>\n";
  }
  out << "</g>\n";

  out << "<text id=\"title\" x=\"" << num(s.width / 2.0) << "\" y=\""
      << num(s.margin_top / 2.0 + font * 0.35) << "\" text-anchor=\"middle\" font-size=\""
      << num(font * 1.25) << "\">" << escape(data.labels.title) << "</text>\n";
  out << "<text id=\"x-label\" x=\"" << num(ax.px(0.5)) << "\" y=\""
      << num(s.height - s.margin_bottom / 4.0) << "\" text-anchor=\"middle\">"
      << escape(data.labels.x_label) << "</text>\n";
  const double yl_x = s.margin_left / 4.0 + font * 0.35;
  out << "<text id=\"y-label\" x=\"" << num(yl_x) << "\" y=\"" << num(ax.py(0.5))
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 " << num(yl_x) << ' ' << num(ax.py(0.5))
      << ")\">" << escape(data.labels.y_label) << "</text>\n";
  if (!data.labels.annotation.empty()) {
    out << "<text id=\"annotation\" x=\"" << num(ax.px(1.0) - 6.0) << "\" y=\""
        << num(ax.py(1.0) + font + 4.0) << "\" text-anchor=\"end\">"
        << escape(data.labels.annotation) << "</text>\n";
  }
  if (data.feasible_region_empty()) {
    out << "<text id=\"no-feasible\" x=\"" << num(ax.px(0.5)) << "\" y=\"" << num(ax.py(0.5))
        << "\" text-anchor=\"middle\">target bias unattainable for every alpha</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace austen

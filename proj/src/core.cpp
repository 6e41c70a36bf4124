#include "austen/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "austen/errors.hpp"
#include "austen/specfun.hpp"

namespace austen {
namespace {

void require_open_unit(double value, const char* what) {
  if (!std::isfinite(value) || !(value > 0.0) || !(value < 1.0)) {
    throw std::domain_error(std::string(what) + " must lie in (0,1), got " + std::to_string(value));
  }
}

long double concentration(double alpha) { return 1.0L / static_cast<long double>(alpha) - 1.0L; }

}  // namespace

Estimand parse_estimand(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "ate") return Estimand::ATE;
  if (lower == "att") return Estimand::ATT;
  throw InputError("estimand must be one of {ATE, ATT}, got '" + std::string(text) + "'");
}

std::string to_string(Estimand estimand) { return estimand == Estimand::ATE ? "ATE" : "ATT"; }

double clip_propensity(double g) {
  return std::clamp(g, kPropensityClip, 1.0 - kPropensityClip);
}

PredictionFrame PredictionFrame::from_columns(std::vector<double> y, std::vector<int> t,
                                              std::vector<double> g, std::vector<double> q0,
                                              std::vector<double> q1) {
  const std::size_t n = y.size();
  if (t.size() != n || g.size() != n || q0.size() != n || q1.size() != n) {
    throw InputError("prediction columns differ in length");
  }
  if (n < 2) throw InputError("prediction frame needs at least 2 rows, got " + std::to_string(n));

  PredictionFrame frame;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = std::to_string(i);
    if (!std::isfinite(y[i]) || !std::isfinite(g[i]) || !std::isfinite(q0[i]) ||
        !std::isfinite(q1[i])) {
      throw InputError("non-finite value in row " + row);
    }
    if (t[i] != 0 && t[i] != 1) {
      throw InputError("treatment must be 0 or 1 in row " + row + ", got " + std::to_string(t[i]));
    }
    if (g[i] < 0.0 || g[i] > 1.0) {
      throw InputError("propensity outside [0,1] in row " + row + ": " + std::to_string(g[i]));
    }
    const double clipped = clip_propensity(g[i]);
    if (clipped != g[i]) {
      ++frame.clipped_;
      g[i] = clipped;
    }
    frame.treated_ += static_cast<std::size_t>(t[i]);
  }
  if (frame.treated_ == 0 || frame.treated_ == n) {
    throw InputError("prediction frame needs at least one treated and one control row");
  }
  frame.y_ = std::move(y);
  frame.t_ = std::move(t);
  frame.g_ = std::move(g);
  frame.q0_ = std::move(q0);
  frame.q1_ = std::move(q1);
  return frame;
}

PredictionFrame PredictionFrame::select(std::span<const std::size_t> rows) const {
  PredictionFrame out;
  out.y_.reserve(rows.size());
  out.t_.reserve(rows.size());
  out.g_.reserve(rows.size());
  out.q0_.reserve(rows.size());
  out.q1_.reserve(rows.size());
  for (std::size_t r : rows) {
    if (r >= size()) throw std::out_of_range("row index out of range in PredictionFrame::select");
    out.y_.push_back(y_[r]);
    out.t_.push_back(t_[r]);
    out.g_.push_back(g_[r]);
    out.q0_.push_back(q0_[r]);
    out.q1_.push_back(q1_[r]);
    out.treated_ += static_cast<std::size_t>(t_[r]);
  }
  if (out.size() < 2 || out.treated_ == 0 || out.treated_ == out.size()) {
    throw DegenerateDataError("row selection lacks a treatment arm");
  }
  return out;
}

SensitivityParams SensitivityParams::with_delta(double alpha, double delta) {
  require_open_unit(alpha, "alpha");
  if (!std::isfinite(delta)) throw std::domain_error("delta must be finite");
  return {alpha, Delta{delta}};
}

SensitivityParams SensitivityParams::with_r2(double alpha, double r2) {
  require_open_unit(alpha, "alpha");
  if (!std::isfinite(r2) || r2 < 0.0 || r2 >= 1.0) {
    throw std::domain_error("partial R2 must lie in [0,1), got " + std::to_string(r2));
  }
  return {alpha, PartialR2{r2}};
}

std::vector<double> BiasCurve::alpha_grid() const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.alpha);
  return out;
}

bool BiasCurve::any_feasible() const {
  return std::any_of(points.begin(), points.end(), [](const CurvePoint& p) { return p.feasible; });
}

double tau_hat(const PredictionFrame& frame, Estimand estimand) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    if (estimand == Estimand::ATT && frame.t()[i] != 1) continue;
    sum += frame.q1()[i] - frame.q0()[i];
    ++count;
  }
  if (count == 0) throw DegenerateDataError("no rows to average for " + to_string(estimand));
  return sum / static_cast<double>(count);
}

double digamma_bracket(double g, double alpha) {
  require_open_unit(g, "propensity");
  require_open_unit(alpha, "alpha");
  using specfun::digamma;
  const long double m = concentration(alpha);
  const long double a = static_cast<long double>(g) * m;
  const long double b = (1.0L - static_cast<long double>(g)) * m;
  // paired so each difference is taken at full extended precision
  const long double treated_shift = digamma(a + 1.0L) - digamma(a);
  const long double control_shift = digamma(b + 1.0L) - digamma(b);
  return static_cast<double>(treated_shift + control_shift);
}

double trigamma_variance_term(double g, int t, double alpha) {
  require_open_unit(g, "propensity");
  require_open_unit(alpha, "alpha");
  if (t != 0 && t != 1) throw std::domain_error("treatment must be 0 or 1");
  const long double m = concentration(alpha);
  const long double a = static_cast<long double>(g) * m + t;
  const long double b = (1.0L - static_cast<long double>(g)) * m + (1 - t);
  return static_cast<double>(specfun::trigamma(a) + specfun::trigamma(b));
}

double mean_digamma_bracket(const PredictionFrame& frame, double alpha, Estimand estimand) {
  // shifted by the first term, so equal terms average to exactly that term
  double shift = 0.0;
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    if (estimand == Estimand::ATT && frame.t()[i] != 1) continue;
    const double term = digamma_bracket(frame.g()[i], alpha);
    if (count == 0) shift = term;
    sum += term - shift;
    ++count;
  }
  if (count == 0) throw DegenerateDataError("no rows to average for " + to_string(estimand));
  return shift + sum / static_cast<double>(count);
}

double mean_trigamma_variance(const PredictionFrame& frame, double alpha) {
  double sum = 0.0;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    sum += trigamma_variance_term(frame.g()[i], frame.t()[i], alpha);
  }
  return sum / static_cast<double>(frame.size());
}

double mean_squared_residual(const PredictionFrame& frame) {
  double sum = 0.0;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    const double r = frame.residual(i);
    sum += r * r;
  }
  return sum / static_cast<double>(frame.size());
}

double bias(double alpha, double delta, const PredictionFrame& frame, Estimand estimand) {
  if (delta == 0.0) return 0.0;
  return delta * mean_digamma_bracket(frame, alpha, estimand);
}

double bias(const SensitivityParams& params, const PredictionFrame& frame, Estimand estimand) {
  const double delta =
      std::holds_alternative<Delta>(params.outcome)
          ? std::get<Delta>(params.outcome).value
          : delta_from_r2(std::get<PartialR2>(params.outcome).value, params.alpha, frame);
  return bias(params.alpha, delta, frame, estimand);
}

double r2_par(double alpha, double delta, const PredictionFrame& frame) {
  const double mse = mean_squared_residual(frame);
  if (!(mse > 0.0)) throw DegenerateDataError("outcome residuals have zero variance");
  if (delta == 0.0) return 0.0;
  return delta * delta * mean_trigamma_variance(frame, alpha) / mse;
}

double r2_par(const SensitivityParams& params, const PredictionFrame& frame) {
  if (std::holds_alternative<PartialR2>(params.outcome)) {
    return std::get<PartialR2>(params.outcome).value;
  }
  return r2_par(params.alpha, std::get<Delta>(params.outcome).value, frame);
}

double delta_from_r2(double r2, double alpha, const PredictionFrame& frame) {
  if (!std::isfinite(r2) || r2 < 0.0 || r2 > 1.0) {
    throw std::domain_error("partial R2 must lie in [0,1], got " + std::to_string(r2));
  }
  const double mse = mean_squared_residual(frame);
  if (!(mse > 0.0)) throw DegenerateDataError("outcome residuals have zero variance");
  const double variance = mean_trigamma_variance(frame, alpha);
  if (!(variance > 0.0)) throw std::logic_error("trigamma mean is not positive");
  return std::sqrt(r2 * mse / variance);
}

double contour_r2(double target_bias, double mean_bracket, double mean_variance,
                  double mean_sq_residual) {
  if (!(mean_sq_residual > 0.0)) throw DegenerateDataError("outcome residuals have zero variance");
  const double delta = std::abs(target_bias) / mean_bracket;
  return delta * delta * mean_variance / mean_sq_residual;
}

double contour_r2(double target_bias, const PredictionFrame& frame, Estimand estimand,
                  double alpha) {
  return contour_r2(target_bias, mean_digamma_bracket(frame, alpha, estimand),
                    mean_trigamma_variance(frame, alpha), mean_squared_residual(frame));
}

std::vector<double> alpha_grid(double start, double stop, std::size_t count) {
  if (!(start > 0.0) || !(stop < 1.0) || !(start <= stop) || count == 0 ||
      (count > 1 && start == stop)) {
    throw InputError("alpha grid must satisfy 0 < start < stop < 1 with count >= 1");
  }
  if (count == 1) return {start};
  std::vector<double> grid(count);
  const double step = (stop - start) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) grid[i] = start + step * static_cast<double>(i);
  grid.back() = stop;
  return grid;
}

void validate_alpha_grid(std::span<const double> grid) {
  if (grid.empty()) throw InputError("alpha grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0 && grid[i] < 1.0)) throw InputError("alpha grid values must lie in (0,1)");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw InputError("alpha grid must be strictly increasing");
  }
}

std::vector<double> default_alpha_grid() { return alpha_grid(0.005, 0.995, 199); }

BiasCurve bias_contour(double target_bias, const PredictionFrame& frame, Estimand estimand,
                       std::span<const double> grid) {
  const double target = std::abs(target_bias);
  if (!std::isfinite(target) || !(target > 0.0)) {
    throw InputError("target bias must be positive and finite");
  }
  validate_alpha_grid(grid);

  const double mse = mean_squared_residual(frame);
  BiasCurve curve{target, estimand, {}};
  curve.points.reserve(grid.size());
  for (double alpha : grid) {
    const double r2 = contour_r2(target, mean_digamma_bracket(frame, alpha, estimand),
                                 mean_trigamma_variance(frame, alpha), mse);
    const bool feasible = r2 <= 1.0;
    curve.points.push_back({alpha, feasible ? r2 : 1.0, feasible});
  }
  return curve;
}

}  // namespace austen

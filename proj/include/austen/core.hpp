#pragma once

// Bias and partial-R² under the Beta-propensity sensitivity model.
//
// The latent complete propensity is g~ | X ~ Beta(g M, (1 - g) M) with
// M = 1/alpha - 1, and the outcome loads on logit g~ with slope delta. For a
// frame of per-unit predictions the bias of the plug-in effect estimate is
//
//   delta * mean[ psi(gM+1) - psi((1-g)M) - psi(gM) + psi((1-g)M+1) ]
//
// (the mean runs over treated rows only for ATT), and the share of residual
// outcome variance explained by the confounder is
//
//   delta^2 * mean[ psi1(gM+t) + psi1((1-g)M+1-t) ] / mean[(y - q_t)^2].
//
// Bias here is the plug-in effect minus the causal effect, so it carries the
// sign of delta.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace austen {

inline constexpr double kPropensityClip = 1e-6;

enum class Estimand { ATE, ATT };

Estimand parse_estimand(std::string_view text);
std::string to_string(Estimand estimand);

// Clamps g into [kPropensityClip, 1 - kPropensityClip].
double clip_propensity(double g);

/// Per-unit outcome, treatment, propensity and both potential-outcome
/// predictions. Construction validates and clips; the object is immutable.
class PredictionFrame {
 public:
  /// Throws InputError on length mismatch, fewer than two rows, non-finite
  /// values, t outside {0,1}, g outside [0,1] or a missing treatment arm.
  /// g exactly at 0 or 1 is clipped and counted.
  static PredictionFrame from_columns(std::vector<double> y, std::vector<int> t,
                                      std::vector<double> g, std::vector<double> q0,
                                      std::vector<double> q1);

  std::size_t size() const noexcept { return y_.size(); }
  std::size_t clipped_count() const noexcept { return clipped_; }
  std::size_t treated_count() const noexcept { return treated_; }

  std::span<const double> y() const noexcept { return y_; }
  std::span<const int> t() const noexcept { return t_; }
  std::span<const double> g() const noexcept { return g_; }
  std::span<const double> q0() const noexcept { return q0_; }
  std::span<const double> q1() const noexcept { return q1_; }

  /// Prediction at the observed arm, q_{t_i}.
  double q_observed(std::size_t i) const noexcept { return t_[i] == 1 ? q1_[i] : q0_[i]; }
  double residual(std::size_t i) const noexcept { return y_[i] - q_observed(i); }

  /// Frame made of the listed rows (with repetition). Throws
  /// DegenerateDataError when the selection lacks a treatment arm.
  PredictionFrame select(std::span<const std::size_t> rows) const;

 private:
  PredictionFrame() = default;

  std::vector<double> y_;
  std::vector<int> t_;
  std::vector<double> g_;
  std::vector<double> q0_;
  std::vector<double> q1_;
  std::size_t clipped_ = 0;
  std::size_t treated_ = 0;
};

struct Delta {
  double value = 0.0;
};

struct PartialR2 {
  double value = 0.0;
};

/// Hypothetical confounder strength: treatment influence alpha plus either
/// the raw outcome slope or its partial-R² reparameterization.
struct SensitivityParams {
  double alpha = 0.5;
  std::variant<Delta, PartialR2> outcome = Delta{};

  static SensitivityParams with_delta(double alpha, double delta);
  static SensitivityParams with_r2(double alpha, double r2_par);
};

struct CurvePoint {
  double alpha = 0.0;
  double r2 = 0.0;  // clipped to 1 when infeasible
  bool feasible = true;
};

struct BiasCurve {
  double target_bias = 0.0;
  Estimand estimand = Estimand::ATE;
  std::vector<CurvePoint> points;

  std::vector<double> alpha_grid() const;
  bool any_feasible() const;
};

double tau_hat(const PredictionFrame& frame, Estimand estimand);

double digamma_bracket(double g, double alpha);
double trigamma_variance_term(double g, int t, double alpha);

/// Mean digamma bracket over all rows (ATE) or treated rows (ATT).
double mean_digamma_bracket(const PredictionFrame& frame, double alpha, Estimand estimand);
/// Mean of the logit-Beta posterior variance over all rows.
double mean_trigamma_variance(const PredictionFrame& frame, double alpha);
double mean_squared_residual(const PredictionFrame& frame);

double bias(double alpha, double delta, const PredictionFrame& frame, Estimand estimand);
/// Accepts either outcome form; a partial R² is mapped to a nonnegative delta.
double bias(const SensitivityParams& params, const PredictionFrame& frame, Estimand estimand);

double r2_par(double alpha, double delta, const PredictionFrame& frame);
double r2_par(const SensitivityParams& params, const PredictionFrame& frame);

double delta_from_r2(double r2, double alpha, const PredictionFrame& frame);

/// Partial R² that yields `target_bias` from the three frame summaries at one
/// alpha. Not clipped.
double contour_r2(double target_bias, double mean_bracket, double mean_variance,
                  double mean_sq_residual);

double contour_r2(double target_bias, const PredictionFrame& frame, Estimand estimand,
                  double alpha);

/// Evenly spaced, strictly inside (0,1).
std::vector<double> alpha_grid(double start, double stop, std::size_t count);
std::vector<double> default_alpha_grid();
/// Throws InputError unless non-empty, inside (0,1) and strictly increasing.
void validate_alpha_grid(std::span<const double> grid);

/// Contour of (alpha, partial R²) pairs inducing |target_bias|. Points whose
/// solved R² exceeds one are kept, clipped to one and flagged infeasible.
BiasCurve bias_contour(double target_bias, const PredictionFrame& frame, Estimand estimand,
                       std::span<const double> alpha_grid);

}  // namespace austen

#pragma once

// Influence of observed covariate groups, measured on the same (alpha,
// partial R²) scale as the hypothetical confounder. Each group needs the full
// model's predictions and a refit that leaves the group out.

#include <span>
#include <string>
#include <vector>

#include "austen/core.hpp"

namespace austen {

/// Leave-group-out predictions, row-aligned with a PredictionFrame. q_wo is
/// the outcome prediction at each row's observed treatment.
struct LeaveOutPredictions {
  std::string group_name;
  std::vector<double> g_wo;
  std::vector<double> q_wo;

  /// Validates lengths and finiteness and clips g_wo like a frame's g.
  static LeaveOutPredictions make(std::string group_name, std::vector<double> g_wo,
                                  std::vector<double> q_wo);

  LeaveOutPredictions select(std::span<const std::size_t> rows) const;
};

struct CovariateInfluence {
  std::string group_name;
  double alpha_hat = 0.0;
  double r2_hat = 0.0;
  double alpha_raw = 0.0;
  double r2_raw = 0.0;
  bool clipped = false;
};

// 1 - MSE(full) / MSE(leave-out); may be negative when the refit wins by noise.
double r2_observed(const PredictionFrame& frame, const LeaveOutPredictions& lo);

// 1 - mean[g(1-g)] / mean[g_wo(1-g_wo)]
double alpha_observed(const PredictionFrame& frame, const LeaveOutPredictions& lo);

CovariateInfluence covariate_influence(const PredictionFrame& frame, const LeaveOutPredictions& lo);

/// One influence per group, in input order. Duplicate names are rejected.
std::vector<CovariateInfluence> calibrate_groups(const PredictionFrame& frame,
                                                 std::span<const LeaveOutPredictions> groups);

}  // namespace austen

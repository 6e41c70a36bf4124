#pragma once

// Minimal observed-data models: logistic regression (IRLS) for the propensity
// and ridge-regularized linear regression for the outcome, cross-fitted over
// k folds. Leave-group-out refits reuse the same folds so influence estimates
// are not polluted by fold-assignment noise.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "austen/calibration.hpp"
#include "austen/core.hpp"
#include "austen/dataset.hpp"

namespace austen {

struct FitConfig {
  std::size_t k = 5;
  double ridge = 1e-3;           // outcome model, on standardized covariates
  double logistic_ridge = 0.0;   // propensity model
  int logistic_max_iter = 100;
  double logistic_tol = 1e-8;
  std::uint64_t seed = 0;
  int fold_retries = 20;

  void validate() const;
};

/// Named groups of covariate columns, in declaration order.
struct GroupSpec {
  std::vector<std::pair<std::string, std::vector<std::string>>> groups;
  bool allow_overlap = false;

  /// Unknown columns, duplicate group names, empty groups and (unless
  /// allowed) overlapping groups throw InputError.
  void validate(const Dataset& data) const;
};

struct FoldAssignment {
  std::size_t k = 0;
  std::vector<std::size_t> fold_of_row;
};

/// Shuffled, balanced folds. Reshuffles (up to cfg.fold_retries) until every
/// training split holds both treatment arms; throws DegenerateDataError otherwise.
FoldAssignment assign_folds(const Dataset& data, const FitConfig& cfg);

struct CrossFit {
  PredictionFrame frame;
  FoldAssignment folds;
  std::vector<std::string> warnings;
};

/// Out-of-fold g, q0, q1 from models on all covariates.
CrossFit crossfit_predictions(const Dataset& data, const FitConfig& cfg);

/// Out-of-fold predictions from models restricted to `columns`, on given folds.
CrossFit crossfit_on_columns(const Dataset& data, const FitConfig& cfg,
                             const std::vector<std::size_t>& columns, const FoldAssignment& folds);

struct LeaveOutFit {
  std::vector<LeaveOutPredictions> leave_outs;
  std::vector<std::string> warnings;
};

/// For each group, refits both models without the group's columns on the
/// folds of the full fit.
LeaveOutFit leave_group_out_predictions(const Dataset& data, const FitConfig& cfg,
                                        const GroupSpec& groups, const FoldAssignment& folds);
LeaveOutFit leave_group_out_predictions(const Dataset& data, const FitConfig& cfg,
                                        const GroupSpec& groups);

struct ConservatismReport {
  std::string group_name;
  double tau_full = 0.0;
  double tau_without = 0.0;
  double nonparametric_bias = 0.0;  // tau_full - tau_without
  double alpha_hat = 0.0;
  double r2_hat = 0.0;
  double sensitivity_bias = 0.0;    // |bias| implied by (alpha_hat, r2_hat) on the reduced fit
};

/// Compares the bias the sensitivity model predicts for omitting a covariate
/// group against the shift in the plug-in estimate that omitting it causes.
/// `without` must carry both potential-outcome predictions of the reduced fit.
ConservatismReport conservatism_from_frames(const std::string& group_name,
                                            const PredictionFrame& full,
                                            const PredictionFrame& without, Estimand estimand);

struct ConservatismRun {
  ConservatismReport report;
  PredictionFrame full;
  PredictionFrame without;
};

/// `group` must name exactly one group.
ConservatismRun conservatism_experiment(const Dataset& data, const FitConfig& cfg,
                                        const GroupSpec& group, Estimand estimand = Estimand::ATE);

}  // namespace austen

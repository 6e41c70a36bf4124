#include "austen/reference_models.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "austen/errors.hpp"
#include "austen/rng.hpp"

namespace austen {
namespace {

struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;  // 0 marks a constant column, which is zeroed out
};

// Column statistics from training rows only.
Standardizer fit_standardizer(const Dataset& data, const std::vector<std::size_t>& columns,
                              const std::vector<std::size_t>& rows) {
  const auto p = static_cast<Eigen::Index>(columns.size());
  Standardizer s{Eigen::VectorXd::Zero(p), Eigen::VectorXd::Zero(p)};
  const double n = static_cast<double>(rows.size());
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto& col = data.covariates[columns[static_cast<std::size_t>(j)]];
    double sum = 0.0;
    for (std::size_t r : rows) sum += col[r];
    const double mu = sum / n;
    double ss = 0.0;
    for (std::size_t r : rows) ss += (col[r] - mu) * (col[r] - mu);
    const double sd = std::sqrt(ss / n);
    s.mean(j) = mu;
    s.scale(j) = sd > 1e-12 * (1.0 + std::abs(mu)) ? sd : 0.0;
  }
  return s;
}

// Rows x [1, standardized covariates...]
Eigen::MatrixXd design(const Dataset& data, const std::vector<std::size_t>& columns,
                       const std::vector<std::size_t>& rows, const Standardizer& s) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(columns.size());
  Eigen::MatrixXd x(n, p + 1);
  x.col(0).setOnes();
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto& col = data.covariates[columns[static_cast<std::size_t>(j)]];
    const double scale = s.scale(j);
    for (Eigen::Index i = 0; i < n; ++i) {
      x(i, j + 1) = scale > 0.0 ? (col[rows[static_cast<std::size_t>(i)]] - s.mean(j)) / scale : 0.0;
    }
  }
  return x;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Eigen::VectorXd fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& t,
                             const FitConfig& cfg) {
  const Eigen::Index p = x.cols();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(p, cfg.logistic_ridge);
  penalty(0) = 0.0;
  for (int iter = 1; iter <= cfg.logistic_max_iter; ++iter) {
    const Eigen::VectorXd eta = x * beta;
    Eigen::VectorXd prob(eta.size());
    Eigen::VectorXd weight(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      prob(i) = sigmoid(eta(i));
      weight(i) = prob(i) * (1.0 - prob(i));
    }
    const Eigen::VectorXd grad = x.transpose() * (t - prob) - penalty.cwiseProduct(beta);
    Eigen::MatrixXd hessian = x.transpose() * weight.asDiagonal() * x;
    hessian.diagonal() += penalty;
    hessian.diagonal().array() += 1e-12;
    const Eigen::VectorXd step = hessian.ldlt().solve(grad);
    if (!step.allFinite()) {
      throw ConvergenceError("logistic fit broke down after " + std::to_string(iter) +
                                 " iterations (separable data?)",
                             iter);
    }
    beta += step;
    if (step.cwiseAbs().maxCoeff() < cfg.logistic_tol * (1.0 + beta.cwiseAbs().maxCoeff())) {
      return beta;
    }
  }
  throw ConvergenceError("logistic fit did not converge in " +
                             std::to_string(cfg.logistic_max_iter) +
                             " iterations (separable data?)",
                         cfg.logistic_max_iter);
}

// Outcome design is [1, t, covariates...]; the ridge leaves the intercept alone.
Eigen::VectorXd fit_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double ridge) {
  Eigen::MatrixXd gram = x.transpose() * x;
  gram.diagonal().tail(x.cols() - 1).array() += ridge;
  return gram.ldlt().solve(x.transpose() * y);
}

Eigen::MatrixXd with_treatment(const Eigen::MatrixXd& base, const Eigen::VectorXd& t) {
  Eigen::MatrixXd x(base.rows(), base.cols() + 1);
  x.col(0) = base.col(0);
  x.col(1) = t;
  x.rightCols(base.cols() - 1) = base.rightCols(base.cols() - 1);
  return x;
}

}  // namespace

void FitConfig::validate() const {
  if (k < 2) throw InputError("fit: k must be at least 2");
  if (!(ridge >= 0.0) || !(logistic_ridge >= 0.0)) throw InputError("fit: ridge must be nonnegative");
  if (logistic_max_iter < 1) throw InputError("fit: logistic_max_iter must be positive");
  if (!(logistic_tol > 0.0)) throw InputError("fit: logistic_tol must be positive");
  if (fold_retries < 1) throw InputError("fit: fold_retries must be positive");
}

void GroupSpec::validate(const Dataset& data) const {
  std::set<std::string> names;
  std::set<std::string> used;
  for (const auto& [name, columns] : groups) {
    if (name.empty()) throw InputError("group spec: empty group name");
    if (!names.insert(name).second) throw InputError("group spec: duplicate group '" + name + "'");
    if (columns.empty()) throw InputError("group spec: group '" + name + "' lists no columns");
    std::set<std::string> within;
    for (const auto& col : columns) {
      data.column_index(col);
      if (!within.insert(col).second) {
        throw InputError("group spec: column '" + col + "' repeated in group '" + name + "'");
      }
      if (!used.insert(col).second && !allow_overlap) {
        throw InputError("group spec: column '" + col + "' appears in more than one group");
      }
    }
  }
}

FoldAssignment assign_folds(const Dataset& data, const FitConfig& cfg) {
  cfg.validate();
  const std::size_t n = data.size();
  if (n < cfg.k) throw InputError("fit: fewer rows than folds");
  std::size_t treated_total = 0;
  for (int t : data.t) treated_total += static_cast<std::size_t>(t);

  std::vector<std::size_t> order(n);
  for (int attempt = 0; attempt < cfg.fold_retries; ++attempt) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto rng = make_rng(cfg.seed, static_cast<std::uint64_t>(attempt));
    std::shuffle(order.begin(), order.end(), rng);
    FoldAssignment folds{cfg.k, std::vector<std::size_t>(n)};
    std::vector<std::size_t> fold_size(cfg.k, 0);
    std::vector<std::size_t> fold_treated(cfg.k, 0);
    for (std::size_t pos = 0; pos < n; ++pos) {
      const std::size_t f = pos % cfg.k;
      folds.fold_of_row[order[pos]] = f;
      ++fold_size[f];
      fold_treated[f] += static_cast<std::size_t>(data.t[order[pos]]);
    }
    bool ok = true;
    for (std::size_t f = 0; f < cfg.k; ++f) {
      const std::size_t train_n = n - fold_size[f];
      const std::size_t train_treated = treated_total - fold_treated[f];
      if (train_treated == 0 || train_treated == train_n) ok = false;
    }
    if (ok) return folds;
  }
  throw DegenerateDataError("fit: a training split lacks a treatment arm after " +
                            std::to_string(cfg.fold_retries) + " reshuffles");
}

CrossFit crossfit_on_columns(const Dataset& data, const FitConfig& cfg,
                             const std::vector<std::size_t>& columns,
                             const FoldAssignment& folds) {
  const std::size_t n = data.size();
  if (folds.fold_of_row.size() != n) throw InputError("fit: fold assignment does not match data");
  std::vector<double> g(n), q0(n), q1(n);
  std::vector<std::string> warnings;
  if (columns.empty()) warnings.push_back("no covariates: fitting intercept-only models");

  for (std::size_t f = 0; f < folds.k; ++f) {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    for (std::size_t i = 0; i < n; ++i) (folds.fold_of_row[i] == f ? test : train).push_back(i);
    if (test.empty()) continue;

    const Standardizer s = fit_standardizer(data, columns, train);
    const Eigen::MatrixXd x_train = design(data, columns, train, s);
    const Eigen::MatrixXd x_test = design(data, columns, test, s);
    Eigen::VectorXd t_train(static_cast<Eigen::Index>(train.size()));
    Eigen::VectorXd y_train(static_cast<Eigen::Index>(train.size()));
    for (std::size_t i = 0; i < train.size(); ++i) {
      t_train(static_cast<Eigen::Index>(i)) = data.t[train[i]];
      y_train(static_cast<Eigen::Index>(i)) = data.y[train[i]];
    }

    const Eigen::VectorXd beta_g = fit_logistic(x_train, t_train, cfg);
    const Eigen::VectorXd beta_q = fit_ridge(with_treatment(x_train, t_train), y_train, cfg.ridge);
    const Eigen::VectorXd eta = x_test * beta_g;
    // q(t, x) = beta_0 + beta_t * t + beta_x . x
    Eigen::VectorXd beta_x(x_test.cols());
    beta_x(0) = beta_q(0);
    beta_x.tail(x_test.cols() - 1) = beta_q.tail(beta_q.size() - 2);
    const Eigen::VectorXd q_control = x_test * beta_x;

    for (std::size_t i = 0; i < test.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const std::size_t row = test[i];
      g[row] = sigmoid(eta(ii));
      q0[row] = q_control(ii);
      q1[row] = q_control(ii) + beta_q(1);
    }
  }

  std::size_t clipped = 0;
  for (double& v : g) {
    const double c = clip_propensity(v);
    if (c != v) ++clipped;
    v = c;
  }
  if (clipped > 0) {
    warnings.push_back(std::to_string(clipped) + " propensity predictions clipped to [" +
                       std::to_string(kPropensityClip) + ", 1 - " +
                       std::to_string(kPropensityClip) + "]");
  }
  return {PredictionFrame::from_columns(data.y, data.t, std::move(g), std::move(q0), std::move(q1)),
          folds, std::move(warnings)};
}

CrossFit crossfit_predictions(const Dataset& data, const FitConfig& cfg) {
  data.validate();
  const FoldAssignment folds = assign_folds(data, cfg);
  std::vector<std::size_t> all(data.covariate_names.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return crossfit_on_columns(data, cfg, all, folds);
}

LeaveOutFit leave_group_out_predictions(const Dataset& data, const FitConfig& cfg,
                                        const GroupSpec& groups, const FoldAssignment& folds) {
  groups.validate(data);
  LeaveOutFit out;
  for (const auto& [name, columns] : groups.groups) {
    std::set<std::size_t> drop;
    for (const auto& c : columns) drop.insert(data.column_index(c));
    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < data.covariate_names.size(); ++j) {
      if (!drop.contains(j)) keep.push_back(j);
    }
    CrossFit fit = crossfit_on_columns(data, cfg, keep, folds);
    for (auto& w : fit.warnings) out.warnings.push_back("group '" + name + "': " + w);
    std::vector<double> q_wo(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) q_wo[i] = fit.frame.q_observed(i);
    const auto g = fit.frame.g();
    out.leave_outs.push_back(
        LeaveOutPredictions::make(name, std::vector<double>(g.begin(), g.end()), std::move(q_wo)));
  }
  return out;
}

LeaveOutFit leave_group_out_predictions(const Dataset& data, const FitConfig& cfg,
                                        const GroupSpec& groups) {
  data.validate();
  if (groups.groups.empty()) return {};
  return leave_group_out_predictions(data, cfg, groups, assign_folds(data, cfg));
}

ConservatismReport conservatism_from_frames(const std::string& group_name,
                                            const PredictionFrame& full,
                                            const PredictionFrame& without, Estimand estimand) {
  if (full.size() != without.size()) throw InputError("conservatism: frames differ in length");
  std::vector<double> q_wo(without.size());
  for (std::size_t i = 0; i < without.size(); ++i) q_wo[i] = without.q_observed(i);
  const auto g = without.g();
  const auto lo =
      LeaveOutPredictions::make(group_name, std::vector<double>(g.begin(), g.end()), std::move(q_wo));
  const CovariateInfluence influence = covariate_influence(full, lo);

  ConservatismReport r;
  r.group_name = group_name;
  r.tau_full = tau_hat(full, estimand);
  r.tau_without = tau_hat(without, estimand);
  r.nonparametric_bias = r.tau_full - r.tau_without;
  r.alpha_hat = influence.alpha_hat;
  r.r2_hat = std::min(influence.r2_hat, 1.0);
  if (r.alpha_hat > 0.0 && r.alpha_hat < 1.0 && r.r2_hat > 0.0) {
    const double delta = delta_from_r2(r.r2_hat, r.alpha_hat, without);
    r.sensitivity_bias = std::abs(bias(r.alpha_hat, delta, without, estimand));
  }
  return r;
}

ConservatismRun conservatism_experiment(const Dataset& data, const FitConfig& cfg,
                                        const GroupSpec& group, Estimand estimand) {
  if (group.groups.size() != 1) throw InputError("conservatism: exactly one group is required");
  data.validate();
  group.validate(data);
  const FoldAssignment folds = assign_folds(data, cfg);
  std::vector<std::size_t> all(data.covariate_names.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::set<std::size_t> drop;
  for (const auto& c : group.groups.front().second) drop.insert(data.column_index(c));
  std::vector<std::size_t> keep;
  for (std::size_t j : all) {
    if (!drop.contains(j)) keep.push_back(j);
  }
  CrossFit full = crossfit_on_columns(data, cfg, all, folds);
  CrossFit without = crossfit_on_columns(data, cfg, keep, folds);
  ConservatismReport report =
      conservatism_from_frames(group.groups.front().first, full.frame, without.frame, estimand);
  return {std::move(report), std::move(full.frame), std::move(without.frame)};
}

}  // namespace austen

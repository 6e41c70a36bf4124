#include "austen/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "austen/errors.hpp"

namespace austen {
namespace {

void check_aligned(const PredictionFrame& frame, const LeaveOutPredictions& lo) {
  if (lo.g_wo.size() != frame.size() || lo.q_wo.size() != frame.size()) {
    throw InputError("leave-out predictions for group '" + lo.group_name + "' have " +
                     std::to_string(lo.g_wo.size()) + " rows, frame has " +
                     std::to_string(frame.size()));
  }
}

double mean_bernoulli_variance(std::span<const double> g) {
  double sum = 0.0;
  for (double p : g) sum += p * (1.0 - p);
  return sum / static_cast<double>(g.size());
}

}  // namespace

LeaveOutPredictions LeaveOutPredictions::make(std::string group_name, std::vector<double> g_wo,
                                              std::vector<double> q_wo) {
  if (group_name.empty()) throw InputError("leave-out group name is empty");
  if (g_wo.size() != q_wo.size()) {
    throw InputError("leave-out columns differ in length for group '" + group_name + "'");
  }
  for (std::size_t i = 0; i < g_wo.size(); ++i) {
    if (!std::isfinite(g_wo[i]) || !std::isfinite(q_wo[i])) {
      throw InputError("non-finite leave-out value in row " + std::to_string(i) + " of group '" +
                       group_name + "'");
    }
    if (g_wo[i] < 0.0 || g_wo[i] > 1.0) {
      throw InputError("leave-out propensity outside [0,1] in row " + std::to_string(i) +
                       " of group '" + group_name + "'");
    }
    g_wo[i] = clip_propensity(g_wo[i]);
  }
  return {std::move(group_name), std::move(g_wo), std::move(q_wo)};
}

LeaveOutPredictions LeaveOutPredictions::select(std::span<const std::size_t> rows) const {
  LeaveOutPredictions out{group_name, {}, {}};
  out.g_wo.reserve(rows.size());
  out.q_wo.reserve(rows.size());
  for (std::size_t r : rows) {
    out.g_wo.push_back(g_wo.at(r));
    out.q_wo.push_back(q_wo.at(r));
  }
  return out;
}

double r2_observed(const PredictionFrame& frame, const LeaveOutPredictions& lo) {
  check_aligned(frame, lo);
  double sse_wo = 0.0;
  double sse_full = 0.0;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    const double r_wo = frame.y()[i] - lo.q_wo[i];
    const double r_full = frame.residual(i);
    sse_wo += r_wo * r_wo;
    sse_full += r_full * r_full;
  }
  if (!(sse_wo > 0.0)) {
    throw DegenerateDataError("leave-out residuals of group '" + lo.group_name + "' are all zero");
  }
  const double n = static_cast<double>(frame.size());
  const double mse_wo = sse_wo / n;
  return (mse_wo - sse_full / n) / mse_wo;
}

double alpha_observed(const PredictionFrame& frame, const LeaveOutPredictions& lo) {
  check_aligned(frame, lo);
  const double denom = mean_bernoulli_variance(lo.g_wo);
  if (!(denom > 0.0)) {
    throw DegenerateDataError("leave-out propensities of group '" + lo.group_name +
                              "' have zero Bernoulli variance");
  }
  return 1.0 - mean_bernoulli_variance(frame.g()) / denom;
}

CovariateInfluence covariate_influence(const PredictionFrame& frame, const LeaveOutPredictions& lo) {
  CovariateInfluence out;
  out.group_name = lo.group_name;
  out.alpha_raw = alpha_observed(frame, lo);
  out.r2_raw = r2_observed(frame, lo);
  out.alpha_hat = std::max(out.alpha_raw, 0.0);
  out.r2_hat = std::max(out.r2_raw, 0.0);
  out.clipped = out.alpha_raw < 0.0 || out.r2_raw < 0.0;
  return out;
}

std::vector<CovariateInfluence> calibrate_groups(const PredictionFrame& frame,
                                                 std::span<const LeaveOutPredictions> groups) {
  std::set<std::string> seen;
  for (const auto& lo : groups) {
    if (!seen.insert(lo.group_name).second) {
      throw InputError("duplicate covariate group '" + lo.group_name + "'");
    }
  }
  std::vector<CovariateInfluence> out;
  out.reserve(groups.size());
  for (const auto& lo : groups) out.push_back(covariate_influence(frame, lo));
  return out;
}

}  // namespace austen

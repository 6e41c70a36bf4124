#pragma once

// Prediction-level bootstrap: units are resampled with replacement, jointly
// across the prediction frame and every aligned leave-out table, without
// refitting any model. Each replicate draws from its own (seed, replicate)
// stream, so results are identical however the work is scheduled.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "austen/calibration.hpp"
#include "austen/core.hpp"

namespace austen {

struct BootstrapConfig {
  std::size_t replicates = 100;
  double level = 0.95;
  std::uint64_t seed = 0;
  int max_redraws = 100;  // per replicate, for draws missing a treatment arm

  void validate() const;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct DotInterval {
  std::string group_name;
  Interval alpha;
  Interval r2;
};

struct BootstrapBand {
  std::size_t replicates = 0;
  double level = 0.0;
  std::uint64_t seed = 0;
  std::size_t redraws = 0;
  std::vector<double> alpha;
  std::vector<Interval> r2;  // unclipped contour R² at each alpha
  std::vector<DotInterval> dots;
};

/// Linear-interpolation sample quantile (R type 7), q in [0,1].
double quantile(std::vector<double> values, double q);

/// Equal-tailed percentile interval at `level`.
Interval percentile_interval(std::vector<double> values, double level);

/// Draws n row indices with replacement until both arms are present.
/// `redraws` is incremented for every rejected draw.
std::vector<std::size_t> draw_rows(std::span<const int> t, std::uint64_t seed,
                                   std::uint64_t replicate, int max_redraws, std::size_t& redraws);

BootstrapBand bootstrap_band(const PredictionFrame& frame,
                             std::span<const LeaveOutPredictions> leave_outs, double target_bias,
                             Estimand estimand, std::span<const double> alpha_grid,
                             const BootstrapConfig& cfg);

/// Interval for sensitivity |bias| minus nonparametric |bias| when omitting a
/// group; `without` is the reduced fit's frame.
Interval conservatism_gap_interval(const std::string& group_name, const PredictionFrame& full,
                                   const PredictionFrame& without, Estimand estimand,
                                   const BootstrapConfig& cfg);

}  // namespace austen

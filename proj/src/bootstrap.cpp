#include "austen/bootstrap.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <cmath>
#include <random>
#include <thread>

#include "austen/errors.hpp"
#include "austen/reference_models.hpp"
#include "austen/rng.hpp"

namespace austen {
namespace {

// Runs body(i) for i in [0, count) on up to hardware_concurrency threads.
// Each index writes only its own output slot.
template <typename Body>
void parallel_for(std::size_t count, Body body) {
  const std::size_t workers =
      std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

void BootstrapConfig::validate() const {
  if (replicates < 1) throw InputError("bootstrap: replicates must be at least 1");
  if (!(level > 0.0 && level < 1.0)) throw InputError("bootstrap: level must lie in (0,1)");
  if (max_redraws < 1) throw InputError("bootstrap: max_redraws must be positive");
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Interval percentile_interval(std::vector<double> values, double level) {
  const double tail = (1.0 - level) / 2.0;
  return {quantile(values, tail), quantile(std::move(values), 1.0 - tail)};
}

std::vector<std::size_t> draw_rows(std::span<const int> t, std::uint64_t seed,
                                   std::uint64_t replicate, int max_redraws, std::size_t& redraws) {
  const std::size_t n = t.size();
  auto rng = make_rng(seed, replicate);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::size_t> rows(n);
  for (int attempt = 0; attempt <= max_redraws; ++attempt) {
    std::size_t treated = 0;
    for (auto& r : rows) {
      r = pick(rng);
      treated += static_cast<std::size_t>(t[r]);
    }
    if (treated > 0 && treated < n) return rows;
    ++redraws;
  }
  throw DegenerateDataError("bootstrap: could not draw a replicate with both treatment arms");
}

BootstrapBand bootstrap_band(const PredictionFrame& frame,
                             std::span<const LeaveOutPredictions> leave_outs, double target_bias,
                             Estimand estimand, std::span<const double> grid,
                             const BootstrapConfig& cfg) {
  cfg.validate();
  if (!std::isfinite(target_bias) || target_bias == 0.0) {
    throw InputError("target bias must be positive and finite");
  }
  validate_alpha_grid(grid);
  calibrate_groups(frame, leave_outs);

  const std::size_t n = frame.size();
  const std::size_t reps = cfg.replicates;
  BootstrapBand band;
  band.replicates = reps;
  band.level = cfg.level;
  band.seed = cfg.seed;
  band.alpha.assign(grid.begin(), grid.end());

  // multiplicity of each unit in each replicate
  std::vector<std::vector<std::uint32_t>> counts(reps, std::vector<std::uint32_t>(n, 0));
  std::vector<std::vector<std::size_t>> rows(reps);
  std::vector<std::size_t> redraws(reps, 0);
  parallel_for(reps, [&](std::size_t r) {
    rows[r] = draw_rows(frame.t(), cfg.seed, r, cfg.max_redraws, redraws[r]);
    for (std::size_t i : rows[r]) ++counts[r][i];
  });
  for (std::size_t d : redraws) band.redraws += d;

  std::vector<double> mse(reps, 0.0);
  std::vector<double> treated_weight(reps, 0.0);
  for (std::size_t r = 0; r < reps; ++r) {
    double sum = 0.0;
    double tw = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double res = frame.residual(i);
      sum += counts[r][i] * res * res;
      tw += counts[r][i] * static_cast<double>(frame.t()[i]);
    }
    mse[r] = sum / static_cast<double>(n);
    treated_weight[r] = tw;
  }

  band.r2.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t a) {
    const double alpha = grid[a];
    std::vector<double> bracket(n);
    std::vector<double> variance(n);
    for (std::size_t i = 0; i < n; ++i) {
      bracket[i] = digamma_bracket(frame.g()[i], alpha);
      variance[i] = trigamma_variance_term(frame.g()[i], frame.t()[i], alpha);
    }
    std::vector<double> values(reps);
    for (std::size_t r = 0; r < reps; ++r) {
      double b_sum = 0.0;
      double v_sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double c = counts[r][i];
        if (estimand == Estimand::ATE || frame.t()[i] == 1) b_sum += c * bracket[i];
        v_sum += c * variance[i];
      }
      const double b_weight =
          estimand == Estimand::ATE ? static_cast<double>(n) : treated_weight[r];
      values[r] = contour_r2(target_bias, b_sum / b_weight, v_sum / static_cast<double>(n), mse[r]);
    }
    band.r2[a] = percentile_interval(std::move(values), cfg.level);
  });

  band.dots.resize(leave_outs.size());
  parallel_for(leave_outs.size(), [&](std::size_t gidx) {
    const auto& lo = leave_outs[gidx];
    std::vector<double> alphas(reps);
    std::vector<double> r2s(reps);
    for (std::size_t r = 0; r < reps; ++r) {
      const auto inf = covariate_influence(frame.select(rows[r]), lo.select(rows[r]));
      alphas[r] = inf.alpha_hat;
      r2s[r] = inf.r2_hat;
    }
    band.dots[gidx] = {lo.group_name, percentile_interval(std::move(alphas), cfg.level),
                       percentile_interval(std::move(r2s), cfg.level)};
  });
  return band;
}

Interval conservatism_gap_interval(const std::string& group_name, const PredictionFrame& full,
                                   const PredictionFrame& without, Estimand estimand,
                                   const BootstrapConfig& cfg) {
  cfg.validate();
  std::vector<double> gaps(cfg.replicates);
  std::vector<std::size_t> redraws(cfg.replicates, 0);
  parallel_for(cfg.replicates, [&](std::size_t r) {
    const auto rows = draw_rows(full.t(), cfg.seed, r, cfg.max_redraws, redraws[r]);
    const auto report =
        conservatism_from_frames(group_name, full.select(rows), without.select(rows), estimand);
    gaps[r] = report.sensitivity_bias - std::abs(report.nonparametric_bias);
  });
  return percentile_interval(std::move(gaps), cfg.level);
}

}  // namespace austen

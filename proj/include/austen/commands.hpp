#pragma once

// Command implementations behind the `austen` executable. Each command is a
// plain function of its options so tests can call it without a process.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "austen/bootstrap.hpp"
#include "austen/calibration.hpp"
#include "austen/core.hpp"
#include "austen/io.hpp"
#include "austen/plot.hpp"
#include "austen/reference_models.hpp"
#include "austen/simulator.hpp"

namespace austen::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumeric = 3;

struct PlotOptions {
  fs::path predictions;
  std::vector<io::LeaveOutSource> leave_outs;
  std::optional<double> target_bias;  // default |tau_hat|
  Estimand estimand = Estimand::ATE;
  io::AlphaGridSpec grid;
  std::size_t bootstrap = 0;  // 0 = no band
  double level = 0.95;
  std::uint64_t seed = 0;
  fs::path out = "austen_out";
  std::optional<std::string> title;
};

/// Config values replace the corresponding options.
void apply_config(PlotOptions& opts, const io::RunConfig& cfg);

struct PlotResult {
  double tau_hat = 0.0;
  double target_bias = 0.0;
  PlotData data;
  std::optional<BootstrapBand> band;
  std::vector<std::string> warnings;
};

/// Writes plot_data.json, austen_plot.svg and, with a bootstrap, band.json
/// under opts.out.
PlotResult cmd_plot(const PlotOptions& opts);

struct BiasOptions {
  fs::path predictions;
  double alpha = 0.0;
  std::optional<double> r2;
  std::optional<double> delta;
  Estimand estimand = Estimand::ATE;
};

/// Exactly one of r2 and delta must be set.
double cmd_bias(const BiasOptions& opts);

struct CalibrateOptions {
  fs::path predictions;
  std::vector<io::LeaveOutSource> leave_outs;
  std::optional<fs::path> out;  // JSON document
};

std::vector<CovariateInfluence> cmd_calibrate(const CalibrateOptions& opts);

/// Text table of dots, one line per group.
std::string format_dots(const std::vector<CovariateInfluence>& dots);

struct SimulateOptions {
  std::optional<fs::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n;
  fs::path out = "sim_out";
};

/// Writes dataset.csv, predictions.csv (oracle values) and ground_truth.json.
SimSample cmd_simulate(const SimulateOptions& opts);

struct FitOptions {
  fs::path dataset;
  std::optional<fs::path> config;
  std::optional<fs::path> groups;
  std::optional<std::uint64_t> seed;
  fs::path out = "fit_out";
};

struct FitResult {
  CrossFit full;
  LeaveOutFit leave;
};

/// Writes predictions.csv and leave_out/<group>.csv.
FitResult cmd_fit(const FitOptions& opts);

struct ConservatismOptions {
  fs::path dataset;
  std::optional<fs::path> config;
  fs::path groups;  // must name exactly one group
  Estimand estimand = Estimand::ATE;
  std::size_t bootstrap = 0;
  double level = 0.95;
  std::uint64_t seed = 0;
  std::optional<fs::path> out;
};

struct ConservatismResult {
  ConservatismReport report;
  std::optional<Interval> gap;  // sensitivity |bias| - nonparametric |bias|
};

ConservatismResult cmd_conservatism(const ConservatismOptions& opts);

/// Parses arguments, runs one command and maps failures to exit codes:
/// 0 success, 2 input or schema error, 3 numerical or degenerate data.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace austen::cli

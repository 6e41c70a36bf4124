#pragma once

// File formats.
//
// Tables are comma-separated with an exact header row:
//   predictions   y,t,g,q0,q1
//   leave-out     y,t,g_wo,q_wo        (group name comes from the caller)
//   dataset       y,t,<covariate names...>
// Cells are strict decimal numbers; t is the integer 0 or 1. NaN and inf are
// rejected. Errors name the file, line and column.
//
// Structured documents (group spec, configs, plot data, bootstrap band,
// calibration dots, simulation ground truth) are JSON objects carrying
// "schema_version": 1 and written in a fixed key order.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "austen/bootstrap.hpp"
#include "austen/calibration.hpp"
#include "austen/core.hpp"
#include "austen/dataset.hpp"
#include "austen/plot.hpp"
#include "austen/reference_models.hpp"
#include "austen/simulator.hpp"

namespace austen::io {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Shortest text that parses back to the same double.
std::string format_number(double value);

PredictionFrame read_predictions(const std::filesystem::path& path);
void write_predictions(const std::filesystem::path& path, const PredictionFrame& frame);

/// Reads a leave-out table. When `frame` is given, row count and the y and t
/// columns must match it exactly.
LeaveOutPredictions read_leave_out(const std::filesystem::path& path, const std::string& group_name,
                                   const PredictionFrame* frame = nullptr);
void write_leave_out(const std::filesystem::path& path, const PredictionFrame& frame,
                     const LeaveOutPredictions& lo);

Dataset read_dataset(const std::filesystem::path& path);
void write_dataset(const std::filesystem::path& path, const Dataset& data);

struct AlphaGridSpec {
  double start = 0.005;
  double stop = 0.995;
  std::size_t count = 199;
};

/// Parses "start,stop,count".
AlphaGridSpec parse_alpha_grid(const std::string& text);

struct LeaveOutSource {
  std::string group;
  std::filesystem::path path;
};

/// Parses "group=path", or a bare path whose file stem becomes the group name.
LeaveOutSource parse_leave_out_source(const std::string& text);

/// Run configuration for the plot command. Every field is optional; present
/// fields override command-line flags. Relative paths resolve against the
/// config file's directory.
struct RunConfig {
  std::optional<std::filesystem::path> predictions;
  std::optional<std::vector<LeaveOutSource>> leave_outs;
  std::optional<double> target_bias;
  std::optional<Estimand> estimand;
  std::optional<AlphaGridSpec> alpha_grid;
  std::optional<std::size_t> bootstrap;
  std::optional<double> level;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<std::string> title;
};

RunConfig parse_run_config(const Json& doc, const std::filesystem::path& base_dir = {});
RunConfig read_config(const std::filesystem::path& path);

FitConfig parse_fit_config(const Json& doc);
FitConfig read_fit_config(const std::filesystem::path& path);
Json to_json(const FitConfig& cfg);

SimConfig parse_sim_config(const Json& doc);
SimConfig read_sim_config(const std::filesystem::path& path);
Json to_json(const SimConfig& cfg);

GroupSpec parse_group_spec(const Json& doc);
GroupSpec read_group_spec(const std::filesystem::path& path);
Json to_json(const GroupSpec& spec);

Json to_json(const GroundTruth& truth);
GroundTruth parse_ground_truth(const Json& doc);

Json to_json(const std::vector<CovariateInfluence>& dots);
std::vector<CovariateInfluence> parse_dots(const Json& doc);

Json to_json(const BootstrapBand& band);
BootstrapBand parse_band(const Json& doc);

Json to_json(const PlotData& data);
PlotData parse_plot_data(const Json& doc);

Json to_json(const ConservatismReport& report);

Json read_json(const std::filesystem::path& path);
/// Canonical text: two-space indent, trailing newline.
std::string dump(const Json& doc);
void write_json(const std::filesystem::path& path, const Json& doc);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace austen::io

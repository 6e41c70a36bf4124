#include "austen/commands.hpp"

#include <charconv>
#include <cmath>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"

#include "austen/errors.hpp"

namespace austen::cli {
namespace {

std::string short_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 6);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

std::vector<LeaveOutPredictions> read_leave_outs(const std::vector<io::LeaveOutSource>& sources,
                                                 const PredictionFrame& frame) {
  std::vector<LeaveOutPredictions> out;
  out.reserve(sources.size());
  for (const auto& s : sources) out.push_back(io::read_leave_out(s.path, s.group, &frame));
  return out;
}

void check_file_safe(const std::string& group) {
  const bool ok = !group.empty() && group != "." && group != ".." &&
                  group.find_first_not_of("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz"
                                          "0123456789_.-") == std::string::npos;
  if (!ok) {
    throw InputError("group name '" + group +
                     "' cannot be used as a file name (letters, digits, '_', '.', '-')");
  }
}

FitConfig load_fit_config(const std::optional<fs::path>& path, std::optional<std::uint64_t> seed) {
  FitConfig cfg = path ? io::read_fit_config(*path) : FitConfig{};
  if (seed) cfg.seed = *seed;
  cfg.validate();
  return cfg;
}

}  // namespace

void apply_config(PlotOptions& opts, const io::RunConfig& cfg) {
  if (cfg.predictions) opts.predictions = *cfg.predictions;
  if (cfg.leave_outs) opts.leave_outs = *cfg.leave_outs;
  if (cfg.target_bias) opts.target_bias = *cfg.target_bias;
  if (cfg.estimand) opts.estimand = *cfg.estimand;
  if (cfg.alpha_grid) opts.grid = *cfg.alpha_grid;
  if (cfg.bootstrap) opts.bootstrap = *cfg.bootstrap;
  if (cfg.level) opts.level = *cfg.level;
  if (cfg.seed) opts.seed = *cfg.seed;
  if (cfg.out) opts.out = *cfg.out;
  if (cfg.title) opts.title = *cfg.title;
}

PlotResult cmd_plot(const PlotOptions& opts) {
  if (opts.predictions.empty()) throw InputError("plot: no predictions file given");
  if (opts.target_bias && !(*opts.target_bias > 0.0 && std::isfinite(*opts.target_bias))) {
    throw InputError("target bias must be positive, got " + short_number(*opts.target_bias));
  }
  const auto frame = io::read_predictions(opts.predictions);
  const auto leave_outs = read_leave_outs(opts.leave_outs, frame);

  PlotResult result;
  if (frame.clipped_count() > 0) {
    result.warnings.push_back(std::to_string(frame.clipped_count()) +
                              " propensities clipped to [1e-6, 1-1e-6]");
  }
  result.tau_hat = tau_hat(frame, opts.estimand);
  if (opts.target_bias) {
    result.target_bias = *opts.target_bias;
  } else {
    result.target_bias = std::abs(result.tau_hat);
    if (!(result.target_bias > 0.0)) {
      throw DegenerateDataError("estimated effect is 0; pass --target-bias explicitly");
    }
  }

  const auto grid = alpha_grid(opts.grid.start, opts.grid.stop, opts.grid.count);
  auto curve = bias_contour(result.target_bias, frame, opts.estimand, grid);
  auto dots = calibrate_groups(frame, leave_outs);
  for (const auto& d : dots) {
    if (d.clipped) {
      result.warnings.push_back("group '" + d.group_name + "': negative raw estimate clipped to 0");
    }
  }

  std::optional<std::vector<Interval>> band_intervals;
  if (opts.bootstrap > 0) {
    BootstrapConfig bcfg;
    bcfg.replicates = opts.bootstrap;
    bcfg.level = opts.level;
    bcfg.seed = opts.seed;
    result.band = bootstrap_band(frame, leave_outs, result.target_bias, opts.estimand, grid, bcfg);
    band_intervals = result.band->r2;
    if (result.band->redraws > 0) {
      result.warnings.push_back(std::to_string(result.band->redraws) +
                                " bootstrap replicates redrawn for lacking a treatment arm");
    }
  }

  PlotLabels labels;
  if (opts.title) labels.title = *opts.title;
  labels.annotation = "bias = " + short_number(result.target_bias);
  result.data = build_plot_data(std::move(curve), std::move(dots), std::move(band_intervals),
                                std::move(labels));
  if (result.data.feasible_region_empty()) {
    result.warnings.push_back("target bias is unattainable for every alpha on the grid");
  }

  io::write_json(opts.out / "plot_data.json", io::to_json(result.data));
  io::write_text(opts.out / "austen_plot.svg", render_svg(result.data));
  if (result.band) io::write_json(opts.out / "band.json", io::to_json(*result.band));
  return result;
}

double cmd_bias(const BiasOptions& opts) {
  if (opts.r2.has_value() == opts.delta.has_value()) {
    throw InputError("bias: give exactly one of --r2 and --delta");
  }
  const auto frame = io::read_predictions(opts.predictions);
  try {
    const auto params = opts.r2 ? SensitivityParams::with_r2(opts.alpha, *opts.r2)
                                : SensitivityParams::with_delta(opts.alpha, *opts.delta);
    return bias(params, frame, opts.estimand);
  } catch (const std::domain_error& e) {
    throw InputError(std::string("bias: ") + e.what());
  }
}

std::vector<CovariateInfluence> cmd_calibrate(const CalibrateOptions& opts) {
  const auto frame = io::read_predictions(opts.predictions);
  const auto leave_outs = read_leave_outs(opts.leave_outs, frame);
  auto dots = calibrate_groups(frame, leave_outs);
  if (opts.out) io::write_json(*opts.out, io::to_json(dots));
  return dots;
}

std::string format_dots(const std::vector<CovariateInfluence>& dots) {
  std::ostringstream out;
  out << "group\talpha_hat\tr2_hat\talpha_raw\tr2_raw\tclipped\n";
  for (const auto& d : dots) {
    out << d.group_name << '\t' << io::format_number(d.alpha_hat) << '\t'
        << io::format_number(d.r2_hat) << '\t' << io::format_number(d.alpha_raw) << '\t'
        << io::format_number(d.r2_raw) << '\t' << (d.clipped ? "yes" : "no") << '\n';
  }
  return out.str();
}

SimSample cmd_simulate(const SimulateOptions& opts) {
  SimConfig cfg = opts.config ? io::read_sim_config(*opts.config) : SimConfig{};
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.n) cfg.n = *opts.n;
  cfg.validate();
  auto sample = simulate(cfg);
  io::write_dataset(opts.out / "dataset.csv", sample.dataset());
  io::write_predictions(opts.out / "predictions.csv", sample.oracle_frame());
  io::write_json(opts.out / "ground_truth.json", io::to_json(sample.truth));
  io::write_json(opts.out / "sim_config.json", io::to_json(cfg));
  return sample;
}

FitResult cmd_fit(const FitOptions& opts) {
  const auto data = io::read_dataset(opts.dataset);
  const auto cfg = load_fit_config(opts.config, opts.seed);
  GroupSpec spec;
  if (opts.groups) {
    spec = io::read_group_spec(*opts.groups);
    spec.validate(data);
    for (const auto& [name, cols] : spec.groups) check_file_safe(name);
  }
  FitResult result{crossfit_predictions(data, cfg), {}};
  if (!spec.groups.empty()) {
    result.leave = leave_group_out_predictions(data, cfg, spec, result.full.folds);
  }
  io::write_predictions(opts.out / "predictions.csv", result.full.frame);
  for (const auto& lo : result.leave.leave_outs) {
    io::write_leave_out(opts.out / "leave_out" / (lo.group_name + ".csv"), result.full.frame, lo);
  }
  return result;
}

ConservatismResult cmd_conservatism(const ConservatismOptions& opts) {
  const auto data = io::read_dataset(opts.dataset);
  const auto cfg = load_fit_config(opts.config, std::nullopt);
  const auto spec = io::read_group_spec(opts.groups);
  if (spec.groups.size() != 1) throw InputError("conservatism: group spec must name exactly one group");
  spec.validate(data);
  const auto run = conservatism_experiment(data, cfg, spec, opts.estimand);
  ConservatismResult result{run.report, std::nullopt};
  if (opts.bootstrap > 0) {
    BootstrapConfig bcfg;
    bcfg.replicates = opts.bootstrap;
    bcfg.level = opts.level;
    bcfg.seed = opts.seed;
    result.gap = conservatism_gap_interval(run.report.group_name, run.full, run.without,
                                           opts.estimand, bcfg);
  }
  if (opts.out) {
    auto doc = io::to_json(result.report);
    if (result.gap) doc["gap_interval"] = io::Json{{"lo", result.gap->lo}, {"hi", result.gap->hi}};
    io::write_json(*opts.out, doc);
  }
  return result;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Austen plots: sensitivity analysis for unobserved confounding", "austen"};
  app.require_subcommand(1);

  auto estimand_option = [](CLI::App* sub, std::string& target) {
    return sub->add_option("--estimand", target, "ate or att")->default_str("ate");
  };

  // plot
  PlotOptions plot;
  std::vector<std::string> plot_paths;
  std::string plot_predictions;
  std::vector<std::string> plot_leave_outs;
  std::string plot_estimand = "ate";
  std::string plot_grid;
  std::string plot_config;
  double plot_target = 0.0;
  auto* plot_cmd = app.add_subcommand("plot", "Bias contour, calibration dots and SVG");
  plot_cmd->add_option("paths", plot_paths, "predictions file, then leave-out files");
  plot_cmd->add_option("--predictions", plot_predictions, "predictions table (y,t,g,q0,q1)");
  plot_cmd->add_option("--leave-out", plot_leave_outs, "leave-out table, 'group=path' or path");
  auto* target_opt = plot_cmd->add_option("--target-bias", plot_target, "target bias (> 0)");
  estimand_option(plot_cmd, plot_estimand);
  plot_cmd->add_option("--alpha-grid", plot_grid, "start,stop,count");
  plot_cmd->add_option("--bootstrap", plot.bootstrap, "bootstrap replicates (0 = none)");
  plot_cmd->add_option("--level", plot.level, "band confidence level");
  plot_cmd->add_option("--seed", plot.seed, "bootstrap seed");
  plot_cmd->add_option("--out", plot.out, "output directory");
  plot_cmd->add_option("--config", plot_config, "run config JSON; its values override flags");

  // bias
  BiasOptions bias_opts;
  std::string bias_estimand = "ate";
  double bias_r2 = 0.0;
  double bias_delta = 0.0;
  auto* bias_cmd = app.add_subcommand("bias", "Bias induced by a confounder of given strength");
  bias_cmd->add_option("predictions", bias_opts.predictions, "predictions table")->required();
  bias_cmd->add_option("--alpha", bias_opts.alpha, "treatment influence in (0,1)")->required();
  auto* r2_opt = bias_cmd->add_option("--r2", bias_r2, "partial R² in [0,1)");
  auto* delta_opt = bias_cmd->add_option("--delta", bias_delta, "outcome coefficient");
  r2_opt->excludes(delta_opt);
  estimand_option(bias_cmd, bias_estimand);

  // calibrate
  CalibrateOptions cal;
  std::vector<std::string> cal_paths;
  std::string cal_predictions;
  std::vector<std::string> cal_leave_outs;
  std::string cal_out;
  auto* cal_cmd = app.add_subcommand("calibrate", "Calibration dots for covariate groups");
  cal_cmd->add_option("paths", cal_paths, "predictions file, then leave-out files");
  cal_cmd->add_option("--predictions", cal_predictions, "predictions table");
  cal_cmd->add_option("--leave-out", cal_leave_outs, "leave-out table, 'group=path' or path");
  cal_cmd->add_option("--out", cal_out, "write dots as JSON");

  // simulate
  SimulateOptions sim;
  std::string sim_config;
  std::uint64_t sim_seed = 0;
  std::size_t sim_n = 0;
  auto* sim_cmd = app.add_subcommand("simulate", "Draw data from the sensitivity model");
  sim_cmd->add_option("--config", sim_config, "simulation config JSON");
  auto* sim_seed_opt = sim_cmd->add_option("--seed", sim_seed, "random seed");
  auto* sim_n_opt = sim_cmd->add_option("--n", sim_n, "number of units");
  sim_cmd->add_option("--out", sim.out, "output directory");

  // fit
  FitOptions fit;
  std::string fit_config;
  std::string fit_groups;
  std::uint64_t fit_seed = 0;
  auto* fit_cmd = app.add_subcommand("fit", "Cross-fitted reference models and leave-out refits");
  fit_cmd->add_option("dataset", fit.dataset, "dataset table (y,t,covariates...)")->required();
  fit_cmd->add_option("--config", fit_config, "fit config JSON");
  fit_cmd->add_option("--groups", fit_groups, "group spec JSON");
  auto* fit_seed_opt = fit_cmd->add_option("--seed", fit_seed, "fold seed");
  fit_cmd->add_option("--out", fit.out, "output directory");

  // conservatism
  ConservatismOptions cons;
  std::string cons_estimand = "ate";
  std::string cons_config;
  std::string cons_out;
  auto* cons_cmd =
      app.add_subcommand("conservatism", "Compare sensitivity bias with the leave-out bias");
  cons_cmd->add_option("dataset", cons.dataset, "dataset table")->required();
  cons_cmd->add_option("--groups", cons.groups, "group spec JSON with one group")->required();
  cons_cmd->add_option("--config", cons_config, "fit config JSON");
  estimand_option(cons_cmd, cons_estimand);
  cons_cmd->add_option("--bootstrap", cons.bootstrap, "bootstrap replicates for the gap interval");
  cons_cmd->add_option("--level", cons.level, "interval level");
  cons_cmd->add_option("--seed", cons.seed, "bootstrap seed");
  cons_cmd->add_option("--out", cons_out, "write the report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  auto split_paths = [](const std::vector<std::string>& positional, const std::string& flag,
                        const std::vector<std::string>& leave_flags, fs::path& predictions,
                        std::vector<io::LeaveOutSource>& leave_outs) {
    std::vector<std::string> rest = positional;
    if (!flag.empty()) {
      predictions = flag;
    } else if (!rest.empty()) {
      predictions = rest.front();
      rest.erase(rest.begin());
    }
    for (const auto& s : rest) leave_outs.push_back(io::parse_leave_out_source(s));
    for (const auto& s : leave_flags) leave_outs.push_back(io::parse_leave_out_source(s));
  };

  try {
    if (plot_cmd->parsed()) {
      split_paths(plot_paths, plot_predictions, plot_leave_outs, plot.predictions, plot.leave_outs);
      plot.estimand = parse_estimand(plot_estimand);
      if (target_opt->count() > 0) plot.target_bias = plot_target;
      if (!plot_grid.empty()) plot.grid = io::parse_alpha_grid(plot_grid);
      if (!plot_config.empty()) apply_config(plot, io::read_config(plot_config));
      const auto result = cmd_plot(plot);
      err << "tau_hat (" << to_string(plot.estimand) << "): " << io::format_number(result.tau_hat)
          << '\n';
      err << "target bias: " << io::format_number(result.target_bias) << '\n';
      for (const auto& w : result.warnings) err << "warning: " << w << '\n';
      out << (plot.out / "austen_plot.svg").string() << '\n';
    } else if (bias_cmd->parsed()) {
      bias_opts.estimand = parse_estimand(bias_estimand);
      if (r2_opt->count() > 0) bias_opts.r2 = bias_r2;
      if (delta_opt->count() > 0) bias_opts.delta = bias_delta;
      out << io::format_number(cmd_bias(bias_opts)) << '\n';
    } else if (cal_cmd->parsed()) {
      split_paths(cal_paths, cal_predictions, cal_leave_outs, cal.predictions, cal.leave_outs);
      if (cal.predictions.empty()) throw InputError("calibrate: no predictions file given");
      if (!cal_out.empty()) cal.out = cal_out;
      out << format_dots(cmd_calibrate(cal));
    } else if (sim_cmd->parsed()) {
      if (!sim_config.empty()) sim.config = sim_config;
      if (sim_seed_opt->count() > 0) sim.seed = sim_seed;
      if (sim_n_opt->count() > 0) sim.n = sim_n;
      const auto sample = cmd_simulate(sim);
      err << "simulated " << sample.y.size() << " units, ATE " << io::format_number(sample.truth.ate)
          << ", bias " << io::format_number(sample.truth.bias) << '\n';
    } else if (fit_cmd->parsed()) {
      if (!fit_config.empty()) fit.config = fit_config;
      if (!fit_groups.empty()) fit.groups = fit_groups;
      if (fit_seed_opt->count() > 0) fit.seed = fit_seed;
      const auto result = cmd_fit(fit);
      for (const auto& w : result.full.warnings) err << "warning: " << w << '\n';
      for (const auto& w : result.leave.warnings) err << "warning: " << w << '\n';
    } else if (cons_cmd->parsed()) {
      cons.estimand = parse_estimand(cons_estimand);
      if (!cons_config.empty()) cons.config = cons_config;
      if (!cons_out.empty()) cons.out = cons_out;
      const auto result = cmd_conservatism(cons);
      const auto& r = result.report;
      out << "group " << r.group_name << ": nonparametric bias "
          << io::format_number(r.nonparametric_bias) << ", sensitivity bias "
          << io::format_number(r.sensitivity_bias) << '\n';
      if (result.gap) {
        out << "gap interval [" << io::format_number(result.gap->lo) << ", "
            << io::format_number(result.gap->hi) << "]\n";
      }
    }
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const DegenerateDataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitOk;
}

int run(int argc, const char* const* argv) { return run(argc, argv, std::cout, std::cerr); }

}  // namespace austen::cli

#include "austen/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include "austen/errors.hpp"

namespace austen::io {
namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path.string() + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += sep;
    out += items[i];
  }
  return out;
}

// Lines of a CSV file, CR stripped, a single trailing newline tolerated.
struct CsvFile {
  fs::path path;
  std::string text;
  std::vector<std::string_view> lines;

  explicit CsvFile(const fs::path& p) : path(p), text(read_file(p)) {
    std::string_view view(text);
    if (!view.empty() && view.back() == '\n') view.remove_suffix(1);
    if (view.empty()) throw InputError(path.string() + ": file is empty");
    for (auto line : split(view, '\n')) {
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.push_back(line);
    }
  }

  std::string where(std::size_t line_index, std::string_view column) const {
    return path.string() + ":" + std::to_string(line_index + 1) + ": column '" +
           std::string(column) + "'";
  }

  std::vector<std::string> header() const {
    std::vector<std::string> out;
    for (auto cell : split(lines.front(), ',')) out.emplace_back(cell);
    return out;
  }

  // Cells of data line i (i >= 1) checked against the header width.
  std::vector<std::string_view> row(std::size_t i, std::size_t width) const {
    if (lines[i].empty()) {
      throw InputError(path.string() + ":" + std::to_string(i + 1) + ": empty line");
    }
    auto cells = split(lines[i], ',');
    if (cells.size() != width) {
      throw InputError(path.string() + ":" + std::to_string(i + 1) + ": expected " +
                       std::to_string(width) + " cells, found " + std::to_string(cells.size()));
    }
    return cells;
  }

  double number(std::string_view cell, std::size_t i, std::string_view column) const {
    double value = 0.0;
    const char* end = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
    if (cell.empty() || ec != std::errc() || ptr != end) {
      throw InputError(where(i, column) + ": not a number: '" + std::string(cell) + "'");
    }
    if (!std::isfinite(value)) {
      throw InputError(where(i, column) + ": non-finite value '" + std::string(cell) + "'");
    }
    return value;
  }

  int treatment(std::string_view cell, std::size_t i, std::string_view column) const {
    if (cell == "0") return 0;
    if (cell == "1") return 1;
    throw InputError(where(i, column) + ": treatment must be 0 or 1, got '" + std::string(cell) +
                     "'");
  }
};

void require_header(const CsvFile& csv, const std::vector<std::string>& expected) {
  const auto header = csv.header();
  if (header == expected) return;
  std::vector<std::string> missing;
  std::vector<std::string> extra;
  for (const auto& e : expected) {
    if (std::find(header.begin(), header.end(), e) == header.end()) missing.push_back(e);
  }
  for (const auto& h : header) {
    if (std::find(expected.begin(), expected.end(), h) == expected.end()) extra.push_back(h);
  }
  std::string msg = csv.path.string() + ":1: header must be exactly '" + join(expected, ",") + "'";
  if (!missing.empty()) msg += "; missing columns: " + join(missing, ", ");
  if (!extra.empty()) msg += "; unexpected columns: " + join(extra, ", ");
  throw InputError(msg);
}

std::ofstream open_for_write(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError(path.string() + ": cannot open for writing");
  return out;
}

// --- JSON helpers -------------------------------------------------------

void check_keys(const Json& doc, const std::vector<std::string>& accepted, const std::string& what) {
  if (!doc.is_object()) throw InputError(what + ": expected a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (std::find(accepted.begin(), accepted.end(), key) == accepted.end()) {
      throw InputError(what + ": unknown key '" + key + "'; accepted keys: " + join(accepted, ", "));
    }
  }
}

void check_version(const Json& doc, const std::string& what) {
  if (!doc.contains("schema_version")) throw InputError(what + ": missing schema_version");
  const auto& v = doc.at("schema_version");
  if (!v.is_number_integer() || v.get<int>() != kSchemaVersion) {
    throw InputError(what + ": unsupported schema_version (expected " +
                     std::to_string(kSchemaVersion) + ")");
  }
}

const Json& field(const Json& doc, const std::string& key, const std::string& what) {
  if (!doc.contains(key)) throw InputError(what + ": missing key '" + key + "'");
  return doc.at(key);
}

double as_number(const Json& v, const std::string& key, const std::string& what) {
  if (!v.is_number()) throw InputError(what + ": '" + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw InputError(what + ": '" + key + "' must be finite");
  return d;
}

std::uint64_t as_unsigned(const Json& v, const std::string& key, const std::string& what) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw InputError(what + ": '" + key + "' must be a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

std::string as_string(const Json& v, const std::string& key, const std::string& what) {
  if (!v.is_string()) throw InputError(what + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

bool as_bool(const Json& v, const std::string& key, const std::string& what) {
  if (!v.is_boolean()) throw InputError(what + ": '" + key + "' must be a boolean");
  return v.get<bool>();
}

std::vector<double> as_numbers(const Json& v, const std::string& key, const std::string& what) {
  if (!v.is_array()) throw InputError(what + ": '" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(as_number(e, key, what));
  return out;
}

Json numbers(const std::vector<double>& values) {
  Json arr = Json::array();
  for (double v : values) arr.push_back(v);
  return arr;
}

fs::path resolve(const fs::path& base, const fs::path& p) {
  if (p.is_absolute() || base.empty()) return p;
  return base / p;
}

Json interval_json(const Interval& iv) { return Json{{"lo", iv.lo}, {"hi", iv.hi}}; }

}  // namespace

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

// --- tables -------------------------------------------------------------

PredictionFrame read_predictions(const fs::path& path) {
  const CsvFile csv(path);
  static const std::vector<std::string> kHeader{"y", "t", "g", "q0", "q1"};
  require_header(csv, kHeader);
  const std::size_t n = csv.lines.size() - 1;
  std::vector<double> y(n), g(n), q0(n), q1(n);
  std::vector<int> t(n);
  for (std::size_t i = 1; i <= n; ++i) {
    const auto cells = csv.row(i, kHeader.size());
    y[i - 1] = csv.number(cells[0], i, "y");
    t[i - 1] = csv.treatment(cells[1], i, "t");
    g[i - 1] = csv.number(cells[2], i, "g");
    if (g[i - 1] < 0.0 || g[i - 1] > 1.0) {
      throw InputError(csv.where(i, "g") + ": propensity outside [0,1]");
    }
    q0[i - 1] = csv.number(cells[3], i, "q0");
    q1[i - 1] = csv.number(cells[4], i, "q1");
  }
  try {
    return PredictionFrame::from_columns(std::move(y), std::move(t), std::move(g), std::move(q0),
                                         std::move(q1));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_predictions(const fs::path& path, const PredictionFrame& frame) {
  auto out = open_for_write(path);
  out << "y,t,g,q0,q1\n";
  for (std::size_t i = 0; i < frame.size(); ++i) {
    out << format_number(frame.y()[i]) << ',' << frame.t()[i] << ',' << format_number(frame.g()[i])
        << ',' << format_number(frame.q0()[i]) << ',' << format_number(frame.q1()[i]) << '\n';
  }
}

LeaveOutPredictions read_leave_out(const fs::path& path, const std::string& group_name,
                                   const PredictionFrame* frame) {
  const CsvFile csv(path);
  static const std::vector<std::string> kHeader{"y", "t", "g_wo", "q_wo"};
  require_header(csv, kHeader);
  const std::size_t n = csv.lines.size() - 1;
  if (frame != nullptr && frame->size() != n) {
    throw InputError(path.string() + ": has " + std::to_string(n) +
                     " rows but the predictions have " + std::to_string(frame->size()));
  }
  std::vector<double> g(n), q(n);
  for (std::size_t i = 1; i <= n; ++i) {
    const auto cells = csv.row(i, kHeader.size());
    const double y = csv.number(cells[0], i, "y");
    const int t = csv.treatment(cells[1], i, "t");
    if (frame != nullptr && (y != frame->y()[i - 1] || t != frame->t()[i - 1])) {
      throw InputError(csv.where(i, "y") + ": row does not match the predictions file (y,t differ)");
    }
    g[i - 1] = csv.number(cells[2], i, "g_wo");
    if (g[i - 1] < 0.0 || g[i - 1] > 1.0) {
      throw InputError(csv.where(i, "g_wo") + ": propensity outside [0,1]");
    }
    q[i - 1] = csv.number(cells[3], i, "q_wo");
  }
  return LeaveOutPredictions::make(group_name, std::move(g), std::move(q));
}

void write_leave_out(const fs::path& path, const PredictionFrame& frame,
                     const LeaveOutPredictions& lo) {
  if (lo.g_wo.size() != frame.size()) throw InputError("leave-out rows do not match frame");
  auto out = open_for_write(path);
  out << "y,t,g_wo,q_wo\n";
  for (std::size_t i = 0; i < frame.size(); ++i) {
    out << format_number(frame.y()[i]) << ',' << frame.t()[i] << ',' << format_number(lo.g_wo[i])
        << ',' << format_number(lo.q_wo[i]) << '\n';
  }
}

Dataset read_dataset(const fs::path& path) {
  const CsvFile csv(path);
  const auto header = csv.header();
  if (header.size() < 2 || header[0] != "y" || header[1] != "t") {
    throw InputError(path.string() + ":1: header must start with 'y,t'");
  }
  Dataset d;
  d.covariate_names.assign(header.begin() + 2, header.end());
  std::set<std::string> seen;
  for (const auto& name : d.covariate_names) {
    if (name.empty()) throw InputError(path.string() + ":1: empty column name");
    if (name == "y" || name == "t" || !seen.insert(name).second) {
      throw InputError(path.string() + ":1: duplicate column name '" + name + "'");
    }
  }
  const std::size_t n = csv.lines.size() - 1;
  d.y.resize(n);
  d.t.resize(n);
  d.covariates.assign(d.covariate_names.size(), std::vector<double>(n));
  for (std::size_t i = 1; i <= n; ++i) {
    const auto cells = csv.row(i, header.size());
    d.y[i - 1] = csv.number(cells[0], i, "y");
    d.t[i - 1] = csv.treatment(cells[1], i, "t");
    for (std::size_t j = 0; j < d.covariate_names.size(); ++j) {
      d.covariates[j][i - 1] = csv.number(cells[j + 2], i, d.covariate_names[j]);
    }
  }
  return d;
}

void write_dataset(const fs::path& path, const Dataset& data) {
  data.validate();
  auto out = open_for_write(path);
  out << "y,t";
  for (const auto& name : data.covariate_names) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << format_number(data.y[i]) << ',' << data.t[i];
    for (const auto& col : data.covariates) out << ',' << format_number(col[i]);
    out << '\n';
  }
}

// --- command-line value syntaxes -----------------------------------------

AlphaGridSpec parse_alpha_grid(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 3) throw InputError("alpha grid must be 'start,stop,count', got '" + text + "'");
  AlphaGridSpec spec;
  auto parse = [&](std::string_view s, double& out) {
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
      throw InputError("alpha grid: not a number: '" + std::string(s) + "'");
    }
  };
  parse(parts[0], spec.start);
  parse(parts[1], spec.stop);
  std::size_t count = 0;
  const auto [ptr, ec] = std::from_chars(parts[2].data(), parts[2].data() + parts[2].size(), count);
  if (parts[2].empty() || ec != std::errc() || ptr != parts[2].data() + parts[2].size()) {
    throw InputError("alpha grid: count must be a positive integer");
  }
  spec.count = count;
  alpha_grid(spec.start, spec.stop, spec.count);  // validates
  return spec;
}

LeaveOutSource parse_leave_out_source(const std::string& text) {
  const auto eq = text.find('=');
  if (eq != std::string::npos) {
    if (eq == 0 || eq + 1 == text.size()) {
      throw InputError("leave-out must be 'group=path' or a path, got '" + text + "'");
    }
    return {text.substr(0, eq), text.substr(eq + 1)};
  }
  fs::path p(text);
  const std::string stem = p.stem().string();
  if (stem.empty()) throw InputError("cannot derive a group name from '" + text + "'");
  return {stem, p};
}

// --- configs ------------------------------------------------------------

RunConfig parse_run_config(const Json& doc, const fs::path& base_dir) {
  const std::string what = "run config";
  check_keys(doc,
             {"schema_version", "predictions", "leave_out", "target_bias", "estimand", "alpha_grid",
              "bootstrap", "level", "seed", "out", "title"},
             what);
  check_version(doc, what);
  RunConfig cfg;
  if (doc.contains("predictions")) {
    cfg.predictions = resolve(base_dir, as_string(doc["predictions"], "predictions", what));
  }
  if (doc.contains("leave_out")) {
    const auto& arr = doc["leave_out"];
    if (!arr.is_array()) throw InputError(what + ": 'leave_out' must be an array");
    std::vector<LeaveOutSource> sources;
    for (const auto& e : arr) {
      check_keys(e, {"group", "path"}, what + " leave_out entry");
      sources.push_back({as_string(field(e, "group", what), "group", what),
                         resolve(base_dir, as_string(field(e, "path", what), "path", what))});
    }
    cfg.leave_outs = std::move(sources);
  }
  if (doc.contains("target_bias")) {
    const double target = as_number(doc["target_bias"], "target_bias", what);
    if (!(target > 0.0)) throw InputError(what + ": target_bias must be positive");
    cfg.target_bias = target;
  }
  if (doc.contains("estimand")) {
    cfg.estimand = parse_estimand(as_string(doc["estimand"], "estimand", what));
  }
  if (doc.contains("alpha_grid")) {
    const auto& g = doc["alpha_grid"];
    check_keys(g, {"start", "stop", "count"}, what + " alpha_grid");
    AlphaGridSpec spec{as_number(field(g, "start", what), "start", what),
                       as_number(field(g, "stop", what), "stop", what),
                       static_cast<std::size_t>(as_unsigned(field(g, "count", what), "count", what))};
    alpha_grid(spec.start, spec.stop, spec.count);
    cfg.alpha_grid = spec;
  }
  if (doc.contains("bootstrap")) {
    const auto b = as_unsigned(doc["bootstrap"], "bootstrap", what);
    cfg.bootstrap = static_cast<std::size_t>(b);
  }
  if (doc.contains("level")) {
    const double level = as_number(doc["level"], "level", what);
    if (!(level > 0.0 && level < 1.0)) throw InputError(what + ": level must lie in (0,1)");
    cfg.level = level;
  }
  if (doc.contains("seed")) cfg.seed = as_unsigned(doc["seed"], "seed", what);
  if (doc.contains("out")) cfg.out = resolve(base_dir, as_string(doc["out"], "out", what));
  if (doc.contains("title")) cfg.title = as_string(doc["title"], "title", what);
  return cfg;
}

RunConfig read_config(const fs::path& path) {
  return parse_run_config(read_json(path), path.parent_path());
}

FitConfig parse_fit_config(const Json& doc) {
  const std::string what = "fit config";
  check_keys(doc,
             {"schema_version", "k", "ridge", "logistic_ridge", "logistic_max_iter", "logistic_tol",
              "seed", "fold_retries"},
             what);
  check_version(doc, what);
  FitConfig cfg;
  if (doc.contains("k")) cfg.k = static_cast<std::size_t>(as_unsigned(doc["k"], "k", what));
  if (doc.contains("ridge")) cfg.ridge = as_number(doc["ridge"], "ridge", what);
  if (doc.contains("logistic_ridge")) {
    cfg.logistic_ridge = as_number(doc["logistic_ridge"], "logistic_ridge", what);
  }
  if (doc.contains("logistic_max_iter")) {
    cfg.logistic_max_iter =
        static_cast<int>(as_unsigned(doc["logistic_max_iter"], "logistic_max_iter", what));
  }
  if (doc.contains("logistic_tol")) cfg.logistic_tol = as_number(doc["logistic_tol"], "logistic_tol", what);
  if (doc.contains("seed")) cfg.seed = as_unsigned(doc["seed"], "seed", what);
  if (doc.contains("fold_retries")) {
    cfg.fold_retries = static_cast<int>(as_unsigned(doc["fold_retries"], "fold_retries", what));
  }
  cfg.validate();
  return cfg;
}

FitConfig read_fit_config(const fs::path& path) { return parse_fit_config(read_json(path)); }

Json to_json(const FitConfig& cfg) {
  return Json{{"schema_version", kSchemaVersion}, {"k", cfg.k},
              {"ridge", cfg.ridge},               {"logistic_ridge", cfg.logistic_ridge},
              {"logistic_max_iter", cfg.logistic_max_iter},
              {"logistic_tol", cfg.logistic_tol}, {"seed", cfg.seed},
              {"fold_retries", cfg.fold_retries}};
}

SimConfig parse_sim_config(const Json& doc) {
  const std::string what = "simulation config";
  check_keys(doc,
             {"schema_version", "n", "alpha", "delta", "noise_sd", "seed", "scenario",
              "propensity_intercept", "propensity_coefs", "outcome_intercept", "effect",
              "outcome_coefs", "noise_covariates", "confounder_treatment", "confounder_center",
              "confounder_outcome"},
             what);
  check_version(doc, what);
  SimConfig cfg;
  if (doc.contains("n")) cfg.n = static_cast<std::size_t>(as_unsigned(doc["n"], "n", what));
  if (doc.contains("alpha")) cfg.alpha = as_number(doc["alpha"], "alpha", what);
  if (doc.contains("delta")) cfg.delta = as_number(doc["delta"], "delta", what);
  if (doc.contains("noise_sd")) cfg.noise_sd = as_number(doc["noise_sd"], "noise_sd", what);
  if (doc.contains("seed")) cfg.seed = as_unsigned(doc["seed"], "seed", what);
  if (doc.contains("scenario")) cfg.scenario = parse_scenario(as_string(doc["scenario"], "scenario", what));
  if (doc.contains("propensity_intercept")) {
    cfg.propensity_intercept = as_number(doc["propensity_intercept"], "propensity_intercept", what);
  }
  if (doc.contains("propensity_coefs")) {
    cfg.propensity_coefs = as_numbers(doc["propensity_coefs"], "propensity_coefs", what);
  }
  if (doc.contains("outcome_intercept")) {
    cfg.outcome_intercept = as_number(doc["outcome_intercept"], "outcome_intercept", what);
  }
  if (doc.contains("effect")) cfg.effect = as_number(doc["effect"], "effect", what);
  if (doc.contains("outcome_coefs")) cfg.outcome_coefs = as_numbers(doc["outcome_coefs"], "outcome_coefs", what);
  if (doc.contains("noise_covariates")) {
    cfg.noise_covariates =
        static_cast<std::size_t>(as_unsigned(doc["noise_covariates"], "noise_covariates", what));
  }
  if (doc.contains("confounder_treatment")) {
    cfg.confounder_treatment = as_number(doc["confounder_treatment"], "confounder_treatment", what);
  }
  if (doc.contains("confounder_center")) {
    cfg.confounder_center = as_number(doc["confounder_center"], "confounder_center", what);
  }
  if (doc.contains("confounder_outcome")) {
    cfg.confounder_outcome = as_number(doc["confounder_outcome"], "confounder_outcome", what);
  }
  cfg.validate();
  return cfg;
}

SimConfig read_sim_config(const fs::path& path) { return parse_sim_config(read_json(path)); }

Json to_json(const SimConfig& cfg) {
  return Json{{"schema_version", kSchemaVersion},
              {"n", cfg.n},
              {"alpha", cfg.alpha},
              {"delta", cfg.delta},
              {"noise_sd", cfg.noise_sd},
              {"seed", cfg.seed},
              {"scenario", to_string(cfg.scenario)},
              {"propensity_intercept", cfg.propensity_intercept},
              {"propensity_coefs", numbers(cfg.propensity_coefs)},
              {"outcome_intercept", cfg.outcome_intercept},
              {"effect", cfg.effect},
              {"outcome_coefs", numbers(cfg.outcome_coefs)},
              {"noise_covariates", cfg.noise_covariates},
              {"confounder_treatment", cfg.confounder_treatment},
              {"confounder_center", cfg.confounder_center},
              {"confounder_outcome", cfg.confounder_outcome}};
}

GroupSpec parse_group_spec(const Json& doc) {
  const std::string what = "group spec";
  check_keys(doc, {"schema_version", "groups", "allow_overlap"}, what);
  check_version(doc, what);
  const auto& groups = field(doc, "groups", what);
  if (!groups.is_object()) throw InputError(what + ": 'groups' must map names to column lists");
  GroupSpec spec;
  for (const auto& [name, cols] : groups.items()) {
    if (!cols.is_array()) throw InputError(what + ": group '" + name + "' must list column names");
    std::vector<std::string> columns;
    for (const auto& c : cols) columns.push_back(as_string(c, name, what));
    spec.groups.emplace_back(name, std::move(columns));
  }
  if (doc.contains("allow_overlap")) spec.allow_overlap = as_bool(doc["allow_overlap"], "allow_overlap", what);
  return spec;
}

GroupSpec read_group_spec(const fs::path& path) { return parse_group_spec(read_json(path)); }

Json to_json(const GroupSpec& spec) {
  Json groups = Json::object();
  for (const auto& [name, cols] : spec.groups) groups[name] = cols;
  return Json{{"schema_version", kSchemaVersion}, {"groups", groups},
              {"allow_overlap", spec.allow_overlap}};
}

// --- result documents ---------------------------------------------------

Json to_json(const GroundTruth& truth) {
  return Json{{"schema_version", kSchemaVersion},
              {"scenario", to_string(truth.scenario)},
              {"alpha", truth.alpha},
              {"delta", truth.delta},
              {"ate", truth.ate},
              {"att", truth.att},
              {"bias", truth.bias},
              {"bias_att", truth.bias_att},
              {"partial_r2", truth.partial_r2}};
}

GroundTruth parse_ground_truth(const Json& doc) {
  const std::string what = "ground truth";
  check_keys(doc,
             {"schema_version", "scenario", "alpha", "delta", "ate", "att", "bias", "bias_att",
              "partial_r2"},
             what);
  check_version(doc, what);
  GroundTruth t;
  t.scenario = parse_scenario(as_string(field(doc, "scenario", what), "scenario", what));
  t.alpha = as_number(field(doc, "alpha", what), "alpha", what);
  t.delta = as_number(field(doc, "delta", what), "delta", what);
  t.ate = as_number(field(doc, "ate", what), "ate", what);
  t.att = as_number(field(doc, "att", what), "att", what);
  t.bias = as_number(field(doc, "bias", what), "bias", what);
  t.bias_att = as_number(field(doc, "bias_att", what), "bias_att", what);
  t.partial_r2 = as_number(field(doc, "partial_r2", what), "partial_r2", what);
  return t;
}

namespace {

Json dot_json(const CovariateInfluence& d) {
  return Json{{"group", d.group_name},   {"alpha_hat", d.alpha_hat}, {"r2_hat", d.r2_hat},
              {"alpha_raw", d.alpha_raw}, {"r2_raw", d.r2_raw},       {"clipped", d.clipped}};
}

CovariateInfluence parse_dot(const Json& e, const std::string& what) {
  check_keys(e, {"group", "alpha_hat", "r2_hat", "alpha_raw", "r2_raw", "clipped"}, what + " dot");
  CovariateInfluence d;
  d.group_name = as_string(field(e, "group", what), "group", what);
  d.alpha_hat = as_number(field(e, "alpha_hat", what), "alpha_hat", what);
  d.r2_hat = as_number(field(e, "r2_hat", what), "r2_hat", what);
  d.alpha_raw = as_number(field(e, "alpha_raw", what), "alpha_raw", what);
  d.r2_raw = as_number(field(e, "r2_raw", what), "r2_raw", what);
  d.clipped = as_bool(field(e, "clipped", what), "clipped", what);
  return d;
}

}  // namespace

Json to_json(const std::vector<CovariateInfluence>& dots) {
  Json arr = Json::array();
  for (const auto& d : dots) arr.push_back(dot_json(d));
  return Json{{"schema_version", kSchemaVersion}, {"dots", arr}};
}

std::vector<CovariateInfluence> parse_dots(const Json& doc) {
  const std::string what = "calibration";
  check_keys(doc, {"schema_version", "dots"}, what);
  check_version(doc, what);
  std::vector<CovariateInfluence> out;
  const auto& arr = field(doc, "dots", what);
  if (!arr.is_array()) throw InputError(what + ": 'dots' must be an array");
  for (const auto& e : arr) out.push_back(parse_dot(e, what));
  return out;
}

Json to_json(const BootstrapBand& band) {
  std::vector<double> lo, hi;
  for (const auto& iv : band.r2) {
    lo.push_back(iv.lo);
    hi.push_back(iv.hi);
  }
  Json dots = Json::array();
  for (const auto& d : band.dots) {
    dots.push_back(Json{{"group", d.group_name},
                        {"alpha", interval_json(d.alpha)},
                        {"r2", interval_json(d.r2)}});
  }
  return Json{{"schema_version", kSchemaVersion},
              {"replicates", band.replicates},
              {"level", band.level},
              {"seed", band.seed},
              {"redraws", band.redraws},
              {"alpha", numbers(band.alpha)},
              {"r2_lo", numbers(lo)},
              {"r2_hi", numbers(hi)},
              {"dots", dots}};
}

BootstrapBand parse_band(const Json& doc) {
  const std::string what = "bootstrap band";
  check_keys(doc,
             {"schema_version", "replicates", "level", "seed", "redraws", "alpha", "r2_lo", "r2_hi",
              "dots"},
             what);
  check_version(doc, what);
  BootstrapBand band;
  band.replicates = as_unsigned(field(doc, "replicates", what), "replicates", what);
  band.level = as_number(field(doc, "level", what), "level", what);
  band.seed = as_unsigned(field(doc, "seed", what), "seed", what);
  band.redraws = as_unsigned(field(doc, "redraws", what), "redraws", what);
  band.alpha = as_numbers(field(doc, "alpha", what), "alpha", what);
  const auto lo = as_numbers(field(doc, "r2_lo", what), "r2_lo", what);
  const auto hi = as_numbers(field(doc, "r2_hi", what), "r2_hi", what);
  if (lo.size() != band.alpha.size() || hi.size() != band.alpha.size()) {
    throw InputError(what + ": r2_lo/r2_hi must align with alpha");
  }
  for (std::size_t i = 0; i < lo.size(); ++i) band.r2.push_back({lo[i], hi[i]});
  for (const auto& e : field(doc, "dots", what)) {
    check_keys(e, {"group", "alpha", "r2"}, what + " dot");
    auto iv = [&](const Json& j, const std::string& key) {
      check_keys(j, {"lo", "hi"}, what + " interval");
      return Interval{as_number(field(j, "lo", what), key, what), as_number(field(j, "hi", what), key, what)};
    };
    band.dots.push_back({as_string(field(e, "group", what), "group", what),
                         iv(field(e, "alpha", what), "alpha"), iv(field(e, "r2", what), "r2")});
  }
  return band;
}

Json to_json(const PlotData& data) {
  std::vector<double> alpha, r2;
  Json feasible = Json::array();
  for (const auto& p : data.curve.points) {
    alpha.push_back(p.alpha);
    r2.push_back(p.r2);
    feasible.push_back(p.feasible);
  }
  Json dots = Json::array();
  for (const auto& d : data.dots) dots.push_back(dot_json(d));
  Json band = nullptr;
  if (data.band) {
    std::vector<double> lo, hi;
    for (const auto& iv : *data.band) {
      lo.push_back(iv.lo);
      hi.push_back(iv.hi);
    }
    band = Json{{"r2_lo", numbers(lo)}, {"r2_hi", numbers(hi)}};
  }
  const auto& s = data.style;
  return Json{
      {"schema_version", kSchemaVersion},
      {"target_bias", data.curve.target_bias},
      {"estimand", to_string(data.curve.estimand)},
      {"feasible_region_empty", data.feasible_region_empty()},
      {"curve", Json{{"alpha", numbers(alpha)}, {"r2", numbers(r2)}, {"feasible", feasible}}},
      {"dots", dots},
      {"band", band},
      {"labels", Json{{"title", data.labels.title},
                      {"x_label", data.labels.x_label},
                      {"y_label", data.labels.y_label},
                      {"annotation", data.labels.annotation}}},
      {"style", Json{{"width", s.width},
                     {"height", s.height},
                     {"margin_left", s.margin_left},
                     {"margin_right", s.margin_right},
                     {"margin_top", s.margin_top},
                     {"margin_bottom", s.margin_bottom},
                     {"font_size", s.font_size},
                     {"dot_radius", s.dot_radius},
                     {"curve_color", s.curve_color},
                     {"band_color", s.band_color},
                     {"infeasible_color", s.infeasible_color},
                     {"dot_colors", s.dot_colors}}}};
}

PlotData parse_plot_data(const Json& doc) {
  const std::string what = "plot data";
  check_keys(doc,
             {"schema_version", "target_bias", "estimand", "feasible_region_empty", "curve", "dots",
              "band", "labels", "style"},
             what);
  check_version(doc, what);

  BiasCurve curve;
  curve.target_bias = as_number(field(doc, "target_bias", what), "target_bias", what);
  curve.estimand = parse_estimand(as_string(field(doc, "estimand", what), "estimand", what));
  const auto& c = field(doc, "curve", what);
  check_keys(c, {"alpha", "r2", "feasible"}, what + " curve");
  const auto alpha = as_numbers(field(c, "alpha", what), "alpha", what);
  const auto r2 = as_numbers(field(c, "r2", what), "r2", what);
  const auto& feasible = field(c, "feasible", what);
  if (r2.size() != alpha.size() || !feasible.is_array() || feasible.size() != alpha.size()) {
    throw InputError(what + ": curve arrays differ in length");
  }
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    curve.points.push_back({alpha[i], r2[i], as_bool(feasible[i], "feasible", what)});
  }

  std::vector<CovariateInfluence> dots;
  for (const auto& e : field(doc, "dots", what)) dots.push_back(parse_dot(e, what));

  std::optional<std::vector<Interval>> band;
  const auto& b = field(doc, "band", what);
  if (!b.is_null()) {
    check_keys(b, {"r2_lo", "r2_hi"}, what + " band");
    const auto lo = as_numbers(field(b, "r2_lo", what), "r2_lo", what);
    const auto hi = as_numbers(field(b, "r2_hi", what), "r2_hi", what);
    if (lo.size() != hi.size()) throw InputError(what + ": band arrays differ in length");
    std::vector<Interval> ivs;
    for (std::size_t i = 0; i < lo.size(); ++i) ivs.push_back({lo[i], hi[i]});
    band = std::move(ivs);
  }

  PlotLabels labels;
  const auto& l = field(doc, "labels", what);
  check_keys(l, {"title", "x_label", "y_label", "annotation"}, what + " labels");
  labels.title = as_string(field(l, "title", what), "title", what);
  labels.x_label = as_string(field(l, "x_label", what), "x_label", what);
  labels.y_label = as_string(field(l, "y_label", what), "y_label", what);
  labels.annotation = as_string(field(l, "annotation", what), "annotation", what);

  PlotStyle style;
  const auto& s = field(doc, "style", what);
  check_keys(s,
             {"width", "height", "margin_left", "margin_right", "margin_top", "margin_bottom",
              "font_size", "dot_radius", "curve_color", "band_color", "infeasible_color",
              "dot_colors"},
             what + " style");
  auto integer = [&](const char* key) {
    return static_cast<int>(as_unsigned(field(s, key, what), key, what));
  };
  style.width = integer("width");
  style.height = integer("height");
  style.margin_left = integer("margin_left");
  style.margin_right = integer("margin_right");
  style.margin_top = integer("margin_top");
  style.margin_bottom = integer("margin_bottom");
  style.font_size = integer("font_size");
  style.dot_radius = as_number(field(s, "dot_radius", what), "dot_radius", what);
  style.curve_color = as_string(field(s, "curve_color", what), "curve_color", what);
  style.band_color = as_string(field(s, "band_color", what), "band_color", what);
  style.infeasible_color = as_string(field(s, "infeasible_color", what), "infeasible_color", what);
  style.dot_colors.clear();
  for (const auto& e : field(s, "dot_colors", what)) {
    style.dot_colors.push_back(as_string(e, "dot_colors", what));
  }

  PlotData data = build_plot_data(std::move(curve), std::move(dots), std::move(band),
                                  std::move(labels), std::move(style));
  if (as_bool(field(doc, "feasible_region_empty", what), "feasible_region_empty", what) !=
      data.feasible_region_empty()) {
    throw InputError(what + ": feasible_region_empty disagrees with the curve");
  }
  return data;
}

Json to_json(const ConservatismReport& r) {
  return Json{{"schema_version", kSchemaVersion},
              {"group", r.group_name},
              {"tau_full", r.tau_full},
              {"tau_without", r.tau_without},
              {"nonparametric_bias", r.nonparametric_bias},
              {"alpha_hat", r.alpha_hat},
              {"r2_hat", r.r2_hat},
              {"sensitivity_bias", r.sensitivity_bias}};
}

// --- raw JSON -----------------------------------------------------------

Json read_json(const fs::path& path) {
  const std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": invalid JSON: " + e.what());
  }
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

void write_json(const fs::path& path, const Json& doc) { write_text(path, dump(doc)); }

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_for_write(path);
  out << text;
}

}  // namespace austen::io

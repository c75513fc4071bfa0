#pragma once

// Flat `key = value` run configuration. Parsing collects every problem in
// the input rather than stopping at the first, and serialization writes
// every key so that a serialized config (or an output file's metadata
// header) reproduces the run exactly.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "experiments.hpp"

namespace sche {

enum class Command { simulate, converge_time, converge_space, ergodic, verify };

inline std::string to_string(Command c) {
  switch (c) {
    case Command::simulate: return "simulate";
    case Command::converge_time: return "converge-time";
    case Command::converge_space: return "converge-space";
    case Command::ergodic: return "ergodic";
    case Command::verify: return "verify";
  }
  return "?";
}

inline std::optional<Command> command_from_string(std::string_view s) {
  for (Command c : {Command::simulate, Command::converge_time, Command::converge_space, Command::ergodic,
                    Command::verify})
    if (s == to_string(c)) return c;
  return std::nullopt;
}

inline constexpr std::uint64_t kDefaultSeed = 20251016;

struct RunConfig {
  Command command = Command::simulate;

  // scheme
  int n_modes = 64;
  double tau = 5e-3;
  double sigma = 1.0;
  DriftSpec drift = kExampleDrift;
  bool validation = false;
  CosineSeries u0{{1.0 / 3.0, 1.0 / 3.0}};
  double lf_check_radius = 2.0;

  // run identity
  std::uint64_t seed = kDefaultSeed;
  std::uint64_t trajectory_id = 0;
  double t_final = 1.0;

  // convergence studies
  std::int64_t trajectories = 100;
  std::vector<int> tau_exponents{4, 5, 6, 7, 8};
  int tau_ref_exponent = 12;
  int n_ref = 64;
  std::vector<int> n_ladder{8, 16, 32, 64};
  std::int64_t thinning = 1;

  // ergodic studies
  std::vector<CosineSeries> initial_data{{{1.0 / 3.0}}, {{1.0 / 3.0, 1.0 / 3.0}}};
  std::vector<TestFunctionDesc> test_functions{{WeightProfile::exp_pos, 1.0, 2.0}};
  std::vector<Estimator> estimators{Estimator::single};
  double t_final_ensemble = 50.0;
  std::int64_t ensemble_size = 50;
  std::int64_t burn_in = 0;
  std::int64_t history_stride = 100;

  // simulate
  std::int64_t snapshot_interval = 20;
  std::string resume;  // checkpoint path, empty for a fresh start

  bool deterministic = false;

  bool operator==(const RunConfig&) const = default;
};

/// Desk-scale defaults for each command.
inline RunConfig defaults_for(Command c) {
  RunConfig cfg;
  cfg.command = c;
  switch (c) {
    case Command::converge_space:
      cfg.n_ref = 256;
      break;
    case Command::ergodic:
      cfg.t_final = 500.0;
      break;
    default:
      break;
  }
  return cfg;
}

namespace config_detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

/// Decimal number or a fraction p/q.
inline double parse_number(const std::string& s) {
  const auto slash = s.find('/');
  if (slash != std::string::npos)
    return parse_number(trim(s.substr(0, slash))) / parse_number(trim(s.substr(slash + 1)));
  if (s.empty()) throw std::invalid_argument("empty number");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

template <class Int>
Int parse_integer(const std::string& s) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw std::invalid_argument("not an integer: '" + s + "'");
  return v;
}

inline bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("not a boolean: '" + s + "'");
}

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline CosineSeries parse_series(const std::string& s) {
  CosineSeries out;
  for (const auto& part : split(s, ',')) out.coeffs.push_back(parse_number(part));
  return out;
}

inline std::string format_series(const CosineSeries& c) {
  std::string out;
  for (std::size_t k = 0; k < c.coeffs.size(); ++k) out += (k ? ", " : "") + format_number(c.coeffs[k]);
  return out;
}

template <class T, class F>
std::string join(const std::vector<T>& items, const char* sep, F&& fmt) {
  std::string out;
  for (std::size_t k = 0; k < items.size(); ++k) out += (k ? sep : "") + fmt(items[k]);
  return out;
}

}  // namespace config_detail

/// Every key the parser accepts, in serialization order.
inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "command",       "n_modes",        "tau",          "sigma",           "a0",
      "a1",            "a2",             "a3",           "validation",      "u0",
      "lf_check_radius", "seed",         "trajectory_id", "t_final",        "trajectories",
      "tau_exponents", "tau_ref_exponent", "n_ref",       "n_ladder",        "thinning",
      "initial_data",  "test_functions", "estimators",   "t_final_ensemble", "ensemble_size",
      "burn_in",       "history_stride", "snapshot_interval", "resume",     "deterministic"};
  return keys;
}

/// Aggregated parse/validation failure.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> errors)
      : std::invalid_argument(join_errors(errors)), errors_(std::move(errors)) {}
  const std::vector<std::string>& errors() const noexcept { return errors_; }

 private:
  static std::string join_errors(const std::vector<std::string>& e) {
    std::string s = "invalid configuration:";
    for (const auto& x : e) s += "\n  " + x;
    return s;
  }
  std::vector<std::string> errors_;
};

namespace config_detail {

/// Assigns one key; throws std::invalid_argument with a message on failure.
inline void assign(RunConfig& c, const std::string& key, const std::string& v) {
  if (key == "command") {
    auto cmd = command_from_string(v);
    if (!cmd) throw std::invalid_argument("unknown command '" + v + "'");
    c.command = *cmd;
  } else if (key == "n_modes") c.n_modes = parse_integer<int>(v);
  else if (key == "tau") c.tau = parse_number(v);
  else if (key == "sigma") c.sigma = parse_number(v);
  else if (key == "a0") c.drift.a0 = parse_number(v);
  else if (key == "a1") c.drift.a1 = parse_number(v);
  else if (key == "a2") c.drift.a2 = parse_number(v);
  else if (key == "a3") c.drift.a3 = parse_number(v);
  else if (key == "validation") c.validation = parse_bool(v);
  else if (key == "u0") c.u0 = parse_series(v);
  else if (key == "lf_check_radius") c.lf_check_radius = parse_number(v);
  else if (key == "seed") c.seed = parse_integer<std::uint64_t>(v);
  else if (key == "trajectory_id") c.trajectory_id = parse_integer<std::uint64_t>(v);
  else if (key == "t_final") c.t_final = parse_number(v);
  else if (key == "trajectories") c.trajectories = parse_integer<std::int64_t>(v);
  else if (key == "tau_exponents") {
    c.tau_exponents.clear();
    for (const auto& p : split(v, ',')) c.tau_exponents.push_back(parse_integer<int>(p));
  } else if (key == "tau_ref_exponent") c.tau_ref_exponent = parse_integer<int>(v);
  else if (key == "n_ref") c.n_ref = parse_integer<int>(v);
  else if (key == "n_ladder") {
    c.n_ladder.clear();
    for (const auto& p : split(v, ',')) c.n_ladder.push_back(parse_integer<int>(p));
  } else if (key == "thinning") c.thinning = parse_integer<std::int64_t>(v);
  else if (key == "initial_data") {
    c.initial_data.clear();
    for (const auto& p : split(v, ';')) c.initial_data.push_back(parse_series(p));
  } else if (key == "test_functions") {
    c.test_functions.clear();
    for (const auto& p : split(v, ';')) {
      const auto f = split(p, ':');
      if (f.size() != 3) throw std::invalid_argument("test function '" + p + "' is not profile:alpha1:alpha2");
      c.test_functions.push_back({weight_profile_from_string(f[0]), parse_number(f[1]), parse_number(f[2])});
    }
  } else if (key == "estimators") {
    c.estimators.clear();
    for (const auto& p : split(v, ',')) {
      if (p == "I") c.estimators.push_back(Estimator::ensemble);
      else if (p == "II") c.estimators.push_back(Estimator::single);
      else throw std::invalid_argument("estimator '" + p + "' is not I or II");
    }
  } else if (key == "t_final_ensemble") c.t_final_ensemble = parse_number(v);
  else if (key == "ensemble_size") c.ensemble_size = parse_integer<std::int64_t>(v);
  else if (key == "burn_in") c.burn_in = parse_integer<std::int64_t>(v);
  else if (key == "history_stride") c.history_stride = parse_integer<std::int64_t>(v);
  else if (key == "snapshot_interval") c.snapshot_interval = parse_integer<std::int64_t>(v);
  else if (key == "resume") c.resume = v;
  else if (key == "deterministic") c.deterministic = parse_bool(v);
  else throw std::invalid_argument("unknown key '" + key + "'");
}

}  // namespace config_detail

/// Domain checks; returns every violation.
inline std::vector<std::string> validation_errors(const RunConfig& c) {
  std::vector<std::string> e;
  auto is_power_of_two = [](int n) { return n > 0 && (n & (n - 1)) == 0; };
  if (c.n_modes < 2) e.emplace_back("n_modes must be >= 2 (noise mode j=1 required)");
  if (!(c.tau > 0.0 && c.tau < 1.0)) e.emplace_back("tau must lie in (0,1)");
  if (!(c.sigma >= 0.0)) e.emplace_back("sigma must be >= 0");
  if (c.drift.a0 < 0.0) e.emplace_back("a0 must be >= 0");
  if (c.drift.a0 == 0.0 && !c.validation) e.emplace_back("a0 must be > 0 unless validation = true");
  if (c.u0.coeffs.empty()) e.emplace_back("u0 needs at least one coefficient");
  if (!(c.lf_check_radius > 0.0)) e.emplace_back("lf_check_radius must be > 0");
  if (c.trajectory_id > 0xffffffffULL) e.emplace_back("trajectory_id must fit in 32 bits");
  if (!(c.t_final > 0.0)) e.emplace_back("t_final must be > 0");
  if (c.trajectories < 1) e.emplace_back("trajectories must be >= 1");
  if (c.command == Command::converge_time) {
    if (c.tau_exponents.empty()) e.emplace_back("tau_exponents must not be empty");
    for (int k : c.tau_exponents)
      if (k < 0 || k > c.tau_ref_exponent) e.emplace_back("tau_exponents must lie in [0, tau_ref_exponent]");
  }
  if (c.tau_ref_exponent < 0 || c.tau_ref_exponent > 40) e.emplace_back("tau_ref_exponent must lie in [0, 40]");
  if (c.n_ref < 2) e.emplace_back("n_ref must be >= 2");
  if (c.command == Command::converge_space && c.n_ladder.empty()) e.emplace_back("n_ladder must not be empty");
  if (c.command == Command::converge_space)
    for (int n : c.n_ladder) {
      if (n < 2 || n > c.n_ref) e.emplace_back("n_ladder entries must lie in [2, n_ref]");
      if (!is_power_of_two(n) || !is_power_of_two(c.n_ref))
        e.emplace_back("n_ladder entries and n_ref must be powers of two");
    }
  if (c.thinning < 1) e.emplace_back("thinning must be >= 1");
  if (c.initial_data.empty()) e.emplace_back("initial_data must not be empty");
  if (c.test_functions.empty()) e.emplace_back("test_functions must not be empty");
  for (const auto& t : c.test_functions)
    if (t.alpha2 == 0.0) e.emplace_back("test function alpha2 must be nonzero");
  if (c.estimators.empty()) e.emplace_back("estimators must not be empty");
  if (!(c.t_final_ensemble > 0.0)) e.emplace_back("t_final_ensemble must be > 0");
  if (c.ensemble_size < 1) e.emplace_back("ensemble_size must be >= 1");
  if (c.burn_in < 0) e.emplace_back("burn_in must be >= 0");
  if (c.history_stride < 0) e.emplace_back("history_stride must be >= 0");
  if (c.snapshot_interval < 0) e.emplace_back("snapshot_interval must be >= 0");
  // deduplicate while keeping order
  std::vector<std::string> out;
  for (auto& s : e)
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(std::move(s));
  return out;
}

/// Parses `key = value` lines ('#' starts a comment). Keys missing from the
/// text take the defaults of the command, which must be given either in the
/// text or as `default_command`. Throws ConfigError listing all problems.
inline RunConfig parse_config(std::string_view text, std::optional<Command> default_command = std::nullopt,
                              const std::map<std::string, std::string>& overrides = {}) {
  std::vector<std::string> errors;
  std::vector<std::pair<std::string, std::string>> entries;
  std::map<std::string, int> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    const std::string body = config_detail::trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(lineno) + ": expected 'key = value'");
      continue;
    }
    std::string key = config_detail::trim(body.substr(0, eq));
    std::string value = config_detail::trim(body.substr(eq + 1));
    if (++seen[key] > 1) errors.push_back("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    entries.emplace_back(std::move(key), std::move(value));
  }
  for (const auto& [k, v] : overrides) {
    std::erase_if(entries, [&](const auto& kv) { return kv.first == k; });
    entries.emplace_back(k, v);
  }

  std::optional<Command> cmd = default_command;
  for (const auto& [k, v] : entries)
    if (k == "command") {
      cmd = command_from_string(v);
      if (!cmd) errors.push_back("command: unknown command '" + v + "'");
    }
  if (!cmd) {
    errors.emplace_back("missing required key 'command'");
    throw ConfigError(errors);
  }
  if (default_command && *cmd != *default_command)
    errors.push_back("command: config says '" + to_string(*cmd) + "' but '" + to_string(*default_command) +
                     "' was requested");

  RunConfig cfg = defaults_for(*cmd);
  for (const auto& [k, v] : entries) {
    try {
      config_detail::assign(cfg, k, v);
    } catch (const std::exception& ex) {
      errors.push_back(k + ": " + ex.what());
    }
  }
  for (auto& e : validation_errors(cfg)) errors.push_back(std::move(e));
  if (!errors.empty()) throw ConfigError(errors);
  return cfg;
}

/// Canonical text form: every key in config_keys() order.
inline std::string serialize_config(const RunConfig& c) {
  using namespace config_detail;
  auto num = [](double v) { return format_number(v); };
  auto integer = [](auto v) { return std::to_string(v); };
  auto boolean = [](bool b) { return std::string(b ? "true" : "false"); };
  std::map<std::string, std::string> v;
  v["command"] = to_string(c.command);
  v["n_modes"] = integer(c.n_modes);
  v["tau"] = num(c.tau);
  v["sigma"] = num(c.sigma);
  v["a0"] = num(c.drift.a0);
  v["a1"] = num(c.drift.a1);
  v["a2"] = num(c.drift.a2);
  v["a3"] = num(c.drift.a3);
  v["validation"] = boolean(c.validation);
  v["u0"] = format_series(c.u0);
  v["lf_check_radius"] = num(c.lf_check_radius);
  v["seed"] = integer(c.seed);
  v["trajectory_id"] = integer(c.trajectory_id);
  v["t_final"] = num(c.t_final);
  v["trajectories"] = integer(c.trajectories);
  v["tau_exponents"] = join(c.tau_exponents, ", ", integer);
  v["tau_ref_exponent"] = integer(c.tau_ref_exponent);
  v["n_ref"] = integer(c.n_ref);
  v["n_ladder"] = join(c.n_ladder, ", ", integer);
  v["thinning"] = integer(c.thinning);
  v["initial_data"] = join(c.initial_data, "; ", format_series);
  v["test_functions"] = join(c.test_functions, "; ", [&](const TestFunctionDesc& t) {
    return to_string(t.profile) + ":" + num(t.alpha1) + ":" + num(t.alpha2);
  });
  v["estimators"] = join(c.estimators, ", ", [](Estimator e) { return to_string(e); });
  v["t_final_ensemble"] = num(c.t_final_ensemble);
  v["ensemble_size"] = integer(c.ensemble_size);
  v["burn_in"] = integer(c.burn_in);
  v["history_stride"] = integer(c.history_stride);
  v["snapshot_interval"] = integer(c.snapshot_interval);
  v["resume"] = c.resume;
  v["deterministic"] = boolean(c.deterministic);
  std::string out;
  for (const auto& k : config_keys()) out += k + " = " + v.at(k) + "\n";
  return out;
}

/// Keys written in output headers that are not configuration.
inline bool is_metadata_key(std::string_view key) {
  return key == "format" || key == "file" || key == "config_hash";
}

inline constexpr std::string_view kOutputMarker = "# format = sche-csv 1";

/// True if `text` is an output file produced by this tool.
inline bool is_output_file(std::string_view text) { return text.starts_with(kOutputMarker); }

/// Recovers the config text from an output file's leading '#' lines.
inline std::string config_text_from_header(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line, out;
  while (std::getline(in, line)) {
    if (!line.starts_with("# ")) break;
    const std::string body = line.substr(2);
    const auto eq = body.find('=');
    if (eq == std::string::npos) continue;
    if (is_metadata_key(config_detail::trim(body.substr(0, eq)))) continue;
    out += body + "\n";
  }
  return out;
}

/// Environment overrides: SCHE_<KEY> (key upper-cased), e.g. SCHE_TAU=0.01.
inline std::map<std::string, std::string> env_overrides(
    const std::function<const char*(const char*)>& getenv_fn = [](const char* n) { return std::getenv(n); }) {
  std::map<std::string, std::string> out;
  for (const auto& key : config_keys()) {
    std::string var = "SCHE_";
    for (char ch : key) var += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    if (const char* val = getenv_fn(var.c_str())) out[key] = val;
  }
  return out;
}

}  // namespace sche

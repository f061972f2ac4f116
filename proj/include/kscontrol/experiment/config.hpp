#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "kscontrol/adam.hpp"
#include "kscontrol/errors.hpp"
#include "kscontrol/problem.hpp"

namespace kscontrol::experiment {

/// Closed interval [a, b]; `std::nullopt` stands for "no region".
struct Interval {
  double a = -1.0;
  double b = 1.0;
  bool operator==(const Interval&) const = default;
};

/// Everything needed to build a problem, an optimizer and a run directory.
/// Defaults are the physical, discrete and Adam parameters of the reference
/// experiments.
struct ExperimentSpec {
  std::string preset = "custom";

  double L = 1.0;
  long long J = 100;
  double T = 0.05;
  long long N = 100;

  PhysicalParams phys{};
  CostWeights weights{};

  std::optional<Interval> control_region = Interval{-1.0, 1.0};
  Interval observation_region{-1.0, 1.0};
  BoundaryControlKind boundary_kind = BoundaryControlKind::none;
  BoundaryMask boundary_endpoints{true, true};

  // Profile selectors: one_plus_cos, three_plus_cos, one_minus_cos,
  // constant:<c>, file:<path>. Targets: constant:<c>, manufactured, file:<path>.
  std::string u0 = "one_plus_cos";
  std::string v0 = "three_plus_cos";
  std::string target = "constant:1";

  AdamConfig adam{};
  bool optimize = true;
  std::vector<double> scan_amplitudes{-0.1, -0.05, -0.01, 0.0, 0.01, 0.05, 0.1};
  std::string output_dir;
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::string unquote(std::string s) {
  s = trim(s);
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

/// Removes a trailing `# comment` that is not inside quotes.
inline std::string strip_comment(std::string_view line) {
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_quotes = !in_quotes;
    if (line[i] == '#' && !in_quotes) return std::string(line.substr(0, i));
  }
  return std::string(line);
}

inline double parse_real(const std::string& key, std::string v) {
  v = unquote(v);
  double out = 0.0;
  const char* first = v.data();
  const char* last = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || v.empty())
    throw ValidationError(ErrorCode::config_parse, "key '" + key + "': expected a real number, got '" + v + "'");
  return out;
}

inline long long parse_integer(const std::string& key, std::string v) {
  v = unquote(v);
  // accept 1e5-style integers as well as plain digits
  const double d = parse_real(key, v);
  if (d != static_cast<double>(static_cast<long long>(d)))
    throw ValidationError(ErrorCode::config_parse, "key '" + key + "': expected an integer, got '" + v + "'");
  return static_cast<long long>(d);
}

inline bool parse_bool(const std::string& key, std::string v) {
  v = unquote(v);
  if (v == "true") return true;
  if (v == "false") return false;
  throw ValidationError(ErrorCode::config_parse, "key '" + key + "': expected true or false, got '" + v + "'");
}

inline std::vector<std::string> split_list(std::string v) {
  v = unquote(v);
  if (!v.empty() && v.front() == '[') v.erase(0, 1);
  if (!v.empty() && v.back() == ']') v.pop_back();
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::optional<Interval> parse_region(const std::string& key, const std::string& v) {
  if (unquote(v) == "none") return std::nullopt;
  const auto parts = split_list(v);
  if (parts.size() != 2)
    throw ValidationError(ErrorCode::config_parse, "key '" + key + "': expected [a, b] or none, got '" + v + "'");
  Interval iv{parse_real(key, parts[0]), parse_real(key, parts[1])};
  if (!(iv.a < iv.b)) throw ValidationError(ErrorCode::config_parse, "key '" + key + "': needs a < b");
  return iv;
}

inline BoundaryMask parse_endpoints(const std::string& key, std::string v) {
  v = unquote(v);
  if (v == "both") return {true, true};
  if (v == "left") return {true, false};
  if (v == "right") return {false, true};
  if (v == "none") return {false, false};
  throw ValidationError(ErrorCode::config_parse, "key '" + key + "': expected both, left, right or none");
}

inline std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string format_region(const std::optional<Interval>& r) {
  if (!r) return "\"none\"";
  return "[" + format_real(r->a) + ", " + format_real(r->b) + "]";
}

inline std::string format_endpoints(const BoundaryMask& m) {
  if (m.left && m.right) return "both";
  if (m.left) return "left";
  if (m.right) return "right";
  return "none";
}

}  // namespace detail

/// Sets one key from its textual value. Unknown keys are rejected.
inline void apply_setting(ExperimentSpec& s, const std::string& key, const std::string& value) {
  using namespace detail;
  if (key == "preset") s.preset = unquote(value);
  else if (key == "L") s.L = parse_real(key, value);
  else if (key == "J") s.J = parse_integer(key, value);
  else if (key == "T") s.T = parse_real(key, value);
  else if (key == "N") s.N = parse_integer(key, value);
  else if (key == "Du") s.phys.Du = parse_real(key, value);
  else if (key == "chi") s.phys.chi = parse_real(key, value);
  else if (key == "Dv") s.phys.Dv = parse_real(key, value);
  else if (key == "lambda") s.phys.lambda = parse_real(key, value);
  else if (key == "mu") s.phys.mu = parse_real(key, value);
  else if (key == "sigma") s.phys.sigma = parse_real(key, value);
  else if (key == "alpha_f") s.weights.alpha_f = parse_real(key, value);
  else if (key == "alpha_g") s.weights.alpha_g = parse_real(key, value);
  else if (key == "control_region") s.control_region = parse_region(key, value);
  else if (key == "observation_region") {
    auto r = parse_region(key, value);
    if (!r) throw ValidationError(ErrorCode::config_parse, "observation_region cannot be none");
    s.observation_region = *r;
  } else if (key == "boundary_kind") s.boundary_kind = parse_boundary_kind(unquote(value));
  else if (key == "boundary_endpoints") s.boundary_endpoints = parse_endpoints(key, value);
  else if (key == "u0") s.u0 = unquote(value);
  else if (key == "v0") s.v0 = unquote(value);
  else if (key == "target") s.target = unquote(value);
  else if (key == "alpha") s.adam.alpha = parse_real(key, value);
  else if (key == "beta1") s.adam.beta1 = parse_real(key, value);
  else if (key == "beta2") s.adam.beta2 = parse_real(key, value);
  else if (key == "eps") s.adam.eps = parse_real(key, value);
  else if (key == "tol") s.adam.tol = parse_real(key, value);
  else if (key == "max_iter") s.adam.max_iter = parse_integer(key, value);
  else if (key == "optimize") s.optimize = parse_bool(key, value);
  else if (key == "scan_amplitudes") {
    std::vector<double> a;
    for (const auto& item : split_list(value)) a.push_back(parse_real(key, item));
    s.scan_amplitudes = std::move(a);
  } else if (key == "output_dir") s.output_dir = unquote(value);
  else throw ValidationError(ErrorCode::unknown_key, "unknown configuration key '" + key + "'");
}

/// Applies a `key=value` override string.
inline void apply_override(ExperimentSpec& s, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ValidationError(ErrorCode::config_parse, "override '" + assignment + "' is not of the form key=value");
  apply_setting(s, detail::trim(assignment.substr(0, eq)), detail::trim(assignment.substr(eq + 1)));
}

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"manufactured", "bdc_case0", "bdc_case1", "bdc_case2",
                                              "bdc_case3",    "bdc_case4", "bdc_case5", "bbc_full",
                                              "bbc_half",     "rbc_full",  "rbc_half"};
  return names;
}

/// Reference experiment `name` with all defaults resolved.
inline ExperimentSpec preset_spec(const std::string& name) {
  ExperimentSpec s;
  s.preset = name;
  auto distributed = [&](Interval control, Interval observation) {
    s.control_region = control;
    s.observation_region = observation;
  };
  auto boundary = [&](BoundaryControlKind kind, Interval observation) {
    s.control_region = std::nullopt;
    s.observation_region = observation;
    s.boundary_kind = kind;
    s.boundary_endpoints = {true, true};
    s.u0 = "one_minus_cos";
    s.v0 = "one_minus_cos";
    s.phys.sigma = 1.0;
  };

  if (name == "manufactured") {
    distributed({-1, 1}, {-1, 1});
    s.target = "manufactured";
  } else if (name == "bdc_case0") {
    s.control_region = std::nullopt;
    s.optimize = false;
  } else if (name == "bdc_case1") distributed({-1, 1}, {-1, 1});
  else if (name == "bdc_case2") distributed({-0.5, 0.5}, {-1, 1});
  else if (name == "bdc_case3") distributed({-1, 1}, {-0.5, 0.5});
  else if (name == "bdc_case4") distributed({-1, 0.2}, {-0.2, 1});
  else if (name == "bdc_case5") distributed({-1, -0.2}, {0.2, 1});
  else if (name == "bbc_full") boundary(BoundaryControlKind::bilinear, {-1, 1});
  else if (name == "bbc_half") boundary(BoundaryControlKind::bilinear, {-0.5, 0.5});
  else if (name == "rbc_full") boundary(BoundaryControlKind::robin, {-1, 1});
  else if (name == "rbc_half") boundary(BoundaryControlKind::robin, {-0.5, 0.5});
  else if (name == "custom") {
  } else
    throw ValidationError(ErrorCode::unknown_preset, "unknown preset '" + name + "'");
  return s;
}

/// Parses a key=value configuration text on top of `base`. Errors carry
/// `origin:line`.
inline ExperimentSpec parse_config(std::istream& in, ExperimentSpec base, const std::string& origin = "<config>") {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = detail::trim(detail::strip_comment(line));
    if (body.empty()) continue;
    if (body.front() == '[') {
      throw ValidationError(ErrorCode::config_parse,
                            origin + ":" + std::to_string(lineno) + ": tables are not supported in the flat format");
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ValidationError(ErrorCode::config_parse,
                            origin + ":" + std::to_string(lineno) + ": expected key = value, got '" + body + "'");
    const std::string key = detail::trim(body.substr(0, eq));
    const std::string value = detail::trim(body.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ValidationError(ErrorCode::config_parse, origin + ":" + std::to_string(lineno) + ": empty key or value");
    try {
      if (key == "preset" && detail::unquote(value) != base.preset)
        throw ValidationError(ErrorCode::config_parse, "config names preset '" + detail::unquote(value) +
                                                           "' but '" + base.preset + "' was requested");
      apply_setting(base, key, value);
    } catch (const ValidationError& e) {
      throw ValidationError(e.code(), origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

/// Loads a configuration file on top of the preset defaults.
inline ExperimentSpec load_config(const std::string& path, const std::string& preset) {
  std::ifstream in(path);
  if (!in) throw ValidationError(ErrorCode::config_parse, "cannot open configuration file '" + path + "'");
  return parse_config(in, preset_spec(preset), path);
}

/// Resolved configuration, readable back by `parse_config`.
inline std::string to_config_text(const ExperimentSpec& s) {
  using detail::format_real;
  std::ostringstream o;
  auto q = [](const std::string& v) { return "\"" + v + "\""; };
  o << "preset = " << q(s.preset) << "\n"
    << "L = " << format_real(s.L) << "\n"
    << "J = " << s.J << "\n"
    << "T = " << format_real(s.T) << "\n"
    << "N = " << s.N << "\n"
    << "Du = " << format_real(s.phys.Du) << "\n"
    << "chi = " << format_real(s.phys.chi) << "\n"
    << "Dv = " << format_real(s.phys.Dv) << "\n"
    << "lambda = " << format_real(s.phys.lambda) << "\n"
    << "mu = " << format_real(s.phys.mu) << "\n"
    << "sigma = " << format_real(s.phys.sigma) << "\n"
    << "alpha_f = " << format_real(s.weights.alpha_f) << "\n"
    << "alpha_g = " << format_real(s.weights.alpha_g) << "\n"
    << "control_region = " << detail::format_region(s.control_region) << "\n"
    << "observation_region = " << detail::format_region(s.observation_region) << "\n"
    << "boundary_kind = " << q(std::string(to_string(s.boundary_kind))) << "\n"
    << "boundary_endpoints = " << q(detail::format_endpoints(s.boundary_endpoints)) << "\n"
    << "u0 = " << q(s.u0) << "\n"
    << "v0 = " << q(s.v0) << "\n"
    << "target = " << q(s.target) << "\n"
    << "alpha = " << format_real(s.adam.alpha) << "\n"
    << "beta1 = " << format_real(s.adam.beta1) << "\n"
    << "beta2 = " << format_real(s.adam.beta2) << "\n"
    << "eps = " << format_real(s.adam.eps) << "\n"
    << "tol = " << format_real(s.adam.tol) << "\n"
    << "max_iter = " << s.adam.max_iter << "\n"
    << "optimize = " << (s.optimize ? "true" : "false") << "\n";
  o << "scan_amplitudes = [";
  for (std::size_t i = 0; i < s.scan_amplitudes.size(); ++i)
    o << (i ? ", " : "") << format_real(s.scan_amplitudes[i]);
  o << "]\n";
  return o.str();
}

}  // namespace kscontrol::experiment

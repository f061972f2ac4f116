#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "kscontrol/adam.hpp"
#include "kscontrol/cost_gradient.hpp"
#include "kscontrol/experiment/config.hpp"
#include "kscontrol/experiment/csv.hpp"
#include "kscontrol/state_solver.hpp"

#ifndef KSCONTROL_VERSION
#define KSCONTROL_VERSION "0.1.0"
#endif

namespace kscontrol::experiment {

/// The distributed control used to generate the manufactured target,
/// f(x, t) = cos(3 pi x) cos(20 pi t), sampled at cell centers and step midpoints.
inline SpaceTimeField manufactured_control(const SpatialGrid& sg, const TimeGrid& tg) {
  using std::numbers::pi;
  SpaceTimeField f(tg.steps(), sg.cells());
  for (std::size_t r = 0; r < tg.steps(); ++r) {
    const double t = tg.dt() * (static_cast<double>(r) + 0.5);
    for (std::size_t j = 0; j < sg.cells(); ++j) f(r, j) = std::cos(3.0 * pi * sg.center(j)) * std::cos(20.0 * pi * t);
  }
  return f;
}

namespace detail {

inline bool starts_with(const std::string& s, std::string_view p) { return s.rfind(p, 0) == 0; }

inline CellField resolve_profile(const std::string& name, const SpatialGrid& sg) {
  using std::numbers::pi;
  if (name == "one_plus_cos") return cell_averages([](double x) { return 1.0 + std::cos(pi * x); }, sg);
  if (name == "three_plus_cos") return cell_averages([](double x) { return 3.0 + std::cos(pi * x); }, sg);
  if (name == "one_minus_cos") return cell_averages([](double x) { return 1.0 - std::cos(pi * x); }, sg);
  if (starts_with(name, "constant:")) {
    const double c = parse_real("profile", name.substr(9));
    return cell_averages([c](double) { return c; }, sg);
  }
  if (starts_with(name, "file:")) {
    const SpaceTimeField f = read_field_csv(name.substr(5));
    if (f.rows() < 1 || f.cols() != sg.cells())
      throw ValidationError(ErrorCode::shape_mismatch, "profile file '" + name.substr(5) + "' must have J columns");
    const auto r = f.row(0);
    return CellField(r.begin(), r.end());
  }
  throw ValidationError(ErrorCode::config_parse, "unknown initial profile '" + name + "'");
}

}  // namespace detail

/// A spec turned into solver inputs.
struct BuiltProblem {
  ProblemSetup setup;
  AdamConfig adam;
  ControlPair initial;
  std::optional<SpaceTimeField> manufactured_f;
};

inline BuiltProblem build_problem(const ExperimentSpec& spec) {
  BuiltProblem b;
  ProblemSetup& s = b.setup;
  std::tie(s.sg, s.tg) = build_grids(spec.L, spec.J, spec.T, spec.N);
  s.phys = spec.phys;
  s.weights = spec.weights;
  s.omega_c = spec.control_region ? interval_to_mask(spec.control_region->a, spec.control_region->b, s.sg)
                                  : RegionMask::none(s.sg);
  s.omega_o = interval_to_mask(spec.observation_region.a, spec.observation_region.b, s.sg);
  s.bkind = spec.boundary_kind;
  s.bmask = spec.boundary_kind == BoundaryControlKind::none ? BoundaryMask{} : spec.boundary_endpoints;
  s.u0 = detail::resolve_profile(spec.u0, s.sg);
  s.v0 = detail::resolve_profile(spec.v0, s.sg);
  s.u_d = SpaceTimeField(s.tg.steps(), s.sg.cells());

  const std::string& target = spec.target;
  if (detail::starts_with(target, "constant:")) {
    const double c = detail::parse_real("target", target.substr(9));
    for (double& x : s.u_d.values()) x = c;
  } else if (target == "manufactured") {
    validate(s);
    ControlPair generating = ControlPair::zeros(s);
    generating.f = manufactured_control(s.sg, s.tg);
    generating.restrict_to(s);
    const StateTrajectory st = solve_forward(s, generating);
    for (std::size_t n = 1; n <= s.tg.steps(); ++n)
      for (std::size_t j = 0; j < s.sg.cells(); ++j) s.u_d(n - 1, j) = st.u(n, j);
    b.manufactured_f = generating.f;
  } else if (detail::starts_with(target, "file:")) {
    const SpaceTimeField f = read_field_csv(target.substr(5));
    const std::size_t N = s.tg.steps();
    if (f.cols() != s.sg.cells() || (f.rows() != N && f.rows() != N + 1))
      throw ValidationError(ErrorCode::shape_mismatch, "target file must have N or N+1 rows of J values");
    const std::size_t skip = f.rows() - N;
    for (std::size_t r = 0; r < N; ++r)
      for (std::size_t j = 0; j < s.sg.cells(); ++j) s.u_d(r, j) = f(r + skip, j);
  } else {
    throw ValidationError(ErrorCode::config_parse, "unknown target '" + target + "'");
  }

  validate(s);
  b.adam = spec.adam;
  validate(b.adam);
  b.initial = ControlPair::zeros(s);
  return b;
}

/// Everything produced by one run, before serialization.
struct RunData {
  ExperimentSpec spec;
  BuiltProblem problem;
  std::optional<OptimizationResult> optimization;
  ControlPair controls;  // reported controls (best iterate, or the initial ones)
  Evaluation final;      // states, adjoints and gradient at `controls`
  CostBreakdown final_cost;
  std::vector<std::pair<double, double>> scan;
  double wall_ms = 0.0;
};

inline RunData run_spec(const ExperimentSpec& spec) {
  const auto start = std::chrono::steady_clock::now();
  RunData d;
  d.spec = spec;
  d.problem = build_problem(spec);
  const ProblemSetup& s = d.problem.setup;
  if (spec.optimize) {
    d.optimization = optimize(s, d.problem.adam, d.problem.initial);
    d.controls = d.optimization->best;
    d.final = evaluate(s, d.controls);
    d.scan = perturbation_scan(s, d.controls, constant_direction(s), spec.scan_amplitudes);
  } else {
    d.controls = d.problem.initial;
    d.final.states = solve_forward(s, d.controls);
    d.final.cost = evaluate_cost(d.final.states, d.controls, s);
  }
  d.final_cost = evaluate_cost_terms(d.final.states, d.controls, s);
  d.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return d;
}

/// Written file names by role.
struct RunArtifacts {
  std::filesystem::path directory;
  std::map<std::string, std::filesystem::path> files;
};

inline void write_trace_csv(const std::filesystem::path& path, const OptimizationTrace* trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SolverError("cannot open '" + path.string() + "' for writing");
  out << "iter,cost,grad_norm_l2,grad_norm_max\n";
  if (trace)
    for (std::size_t i = 0; i < trace->iterations(); ++i)
      out << (i + 1) << ',' << format_value(trace->cost[i]) << ',' << format_value(trace->grad_norm_l2[i]) << ','
          << format_value(trace->grad_norm_max[i]) << '\n';
  if (!out) throw SolverError("write failed for '" + path.string() + "'");
}

inline void write_scan_csv(const std::filesystem::path& path, const std::vector<std::pair<double, double>>& scan) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SolverError("cannot open '" + path.string() + "' for writing");
  out << "amplitude,cost\n";
  for (const auto& [a, c] : scan) out << format_value(a) << ',' << format_value(c) << '\n';
  if (!out) throw SolverError("write failed for '" + path.string() + "'");
}

inline double max_mass_drift(const StateTrajectory& st, const SpatialGrid& sg) {
  const double m0 = total_mass(st.u.row(0), sg);
  double worst = 0.0;
  for (std::size_t n = 0; n < st.u.rows(); ++n)
    worst = std::max(worst, std::abs(total_mass(st.u.row(n), sg) - m0) / m0);
  return worst;
}

/// Writes the CSVs, the resolved configuration, metadata.json and timing.json.
/// Everything except timing.json depends only on the spec.
inline RunArtifacts write_outputs(const std::filesystem::path& dir, const RunData& d) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw SolverError("cannot create run directory '" + dir.string() + "': " + ec.message());

  const ProblemSetup& s = d.problem.setup;
  RunArtifacts a;
  a.directory = dir;
  auto file = [&](const std::string& role, const std::string& name) {
    a.files[role] = dir / name;
    return dir / name;
  };

  write_field_csv(file("state_u", "state_u.csv"), d.final.states.u, s.tg, s.sg, 0);
  write_field_csv(file("state_v", "state_v.csv"), d.final.states.v, s.tg, s.sg, 0);
  write_field_csv(file("control_f", "control_f.csv"), d.controls.f, s.tg, s.sg, 1);
  write_boundary_csv(file("control_g", "control_g.csv"), d.controls.g, s.tg);
  write_field_csv(file("target_u", "target_u.csv"), s.u_d, s.tg, s.sg, 1);
  write_trace_csv(file("trace", "trace.csv"), d.optimization ? &d.optimization->trace : nullptr);
  if (d.optimization) {
    const auto& opt = *d.optimization;
    SpaceTimeField phi(s.tg.steps(), s.sg.cells()), psi(s.tg.steps(), s.sg.cells());
    for (std::size_t n = 1; n <= s.tg.steps(); ++n)
      for (std::size_t j = 0; j < s.sg.cells(); ++j) {
        phi(n - 1, j) = d.final.adjoints.phi_at(n)[j];
        psi(n - 1, j) = d.final.adjoints.psi_at(n)[j];
      }
    write_field_csv(file("adjoint_phi", "adjoint_phi.csv"), phi, s.tg, s.sg, 1);
    write_field_csv(file("adjoint_psi", "adjoint_psi.csv"), psi, s.tg, s.sg, 1);
    write_field_csv(file("control_f_last", "control_f_last.csv"), opt.last.f, s.tg, s.sg, 1);
    write_boundary_csv(file("control_g_last", "control_g_last.csv"), opt.last.g, s.tg);
    write_scan_csv(file("perturbation", "perturbation.csv"), d.scan);
  }
  if (d.problem.manufactured_f)
    write_field_csv(file("manufactured_f", "manufactured_f.csv"), *d.problem.manufactured_f, s.tg, s.sg, 1);

  {
    std::ofstream out(file("config", "resolved_config.toml"), std::ios::binary);
    out << to_config_text(d.spec);
    if (!out) throw SolverError("write failed for resolved_config.toml");
  }

  nlohmann::ordered_json meta;
  meta["code_version"] = KSCONTROL_VERSION;
  meta["preset"] = d.spec.preset;
  meta["config"] = to_config_text(d.spec);
  meta["grid"] = {{"L", s.sg.half_length()}, {"J", s.sg.cells()}, {"dx", s.sg.dx()},
                  {"T", s.tg.horizon()},     {"N", s.tg.steps()}, {"dt", s.tg.dt()}};
  meta["control_cells"] = s.omega_c.count();
  meta["observation_cells"] = s.omega_o.count();
  meta["optimized"] = d.optimization.has_value();
  if (d.optimization) {
    const auto& tr = d.optimization->trace;
    meta["termination"] = std::string(to_string(tr.termination));
    meta["iterations"] = tr.iterations();
    meta["best_iter"] = tr.best_iter;
    meta["cost_initial"] = tr.cost.front();
    meta["cost_last"] = tr.cost.back();
    meta["grad_norm_l2_initial"] = tr.grad_norm_l2.front();
    meta["grad_norm_l2_final"] = tr.grad_norm_l2.back();
    meta["grad_norm_max_final"] = tr.grad_norm_max.back();
    meta["grad_norm_l2_best_iterate"] = gradient_norm(d.final.gradient, s.tg, s.sg, s.bmask);
    meta["kink_entries_final"] = tr.kink_entries.back();
    meta["kink_entries_best_iterate"] = count_kinks(d.controls, s);
  } else {
    meta["termination"] = "not_optimized";
    meta["iterations"] = 0;
  }
  meta["cost_reported"] = d.final_cost.total();
  meta["cost_terms"] = {{"tracking", d.final_cost.tracking},
                        {"distributed", d.final_cost.distributed},
                        {"boundary", d.final_cost.boundary}};
  if (d.optimization) {
    const CostBreakdown zero = evaluate_cost_terms(solve_forward(s, d.problem.initial), d.problem.initial, s);
    meta["tracking_initial"] = zero.tracking;
  }
  double min_u = d.final.states.u.values()[0], min_v = d.final.states.v.values()[0];
  for (double x : d.final.states.u.values()) min_u = std::min(min_u, x);
  for (double x : d.final.states.v.values()) min_v = std::min(min_v, x);
  meta["diagnostics"] = {{"max_relative_mass_drift", max_mass_drift(d.final.states, s.sg)},
                         {"min_u", min_u},
                         {"min_v", min_v}};
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const auto& [role, path] : a.files) files.push_back(path.filename().string());
  files.push_back("metadata.json");
  files.push_back("timing.json");
  meta["files"] = files;
  {
    std::ofstream out(file("metadata", "metadata.json"), std::ios::binary);
    out << meta.dump(2) << '\n';
    if (!out) throw SolverError("write failed for metadata.json");
  }

  nlohmann::ordered_json timing;
  timing["total_wall_ms"] = d.wall_ms;
  if (d.optimization) timing["iteration_wall_ms"] = d.optimization->trace.wall_ms;
  {
    std::ofstream out(file("timing", "timing.json"), std::ios::binary);
    out << timing.dump(2) << '\n';
  }
  return a;
}

/// Resolves preset + optional config file + key=value overrides.
inline ExperimentSpec resolve_spec(const std::string& preset, const std::optional<std::string>& config_path,
                                   const std::vector<std::string>& overrides) {
  ExperimentSpec spec = config_path ? load_config(*config_path, preset) : preset_spec(preset);
  for (const auto& o : overrides) apply_override(spec, o);
  return spec;
}

inline RunArtifacts run_preset(const std::string& name, const std::vector<std::string>& overrides,
                               const std::optional<std::string>& config_path = std::nullopt,
                               const std::optional<std::filesystem::path>& out_dir = std::nullopt) {
  const ExperimentSpec spec = resolve_spec(name, config_path, overrides);
  std::filesystem::path dir = out_dir ? *out_dir
                              : !spec.output_dir.empty() ? std::filesystem::path(spec.output_dir)
                                                         : std::filesystem::path("runs") / spec.preset;
  return write_outputs(dir, run_spec(spec));
}

/// Loads the resolved configuration stored in a run directory.
inline ExperimentSpec load_run_spec(const std::filesystem::path& run_dir) {
  const auto path = run_dir / "resolved_config.toml";
  std::ifstream in(path);
  if (!in) throw ValidationError(ErrorCode::config_parse, "no resolved_config.toml in '" + run_dir.string() + "'");
  std::string preset = "custom";
  std::string line;
  std::stringstream all;
  while (std::getline(in, line)) {
    all << line << '\n';
    const auto body = detail::trim(detail::strip_comment(line));
    if (detail::starts_with(body, "preset")) {
      const auto eq = body.find('=');
      if (eq != std::string::npos) preset = detail::unquote(body.substr(eq + 1));
    }
  }
  return parse_config(all, preset_spec(preset), path.string());
}

/// Reduced cost along the reported controls of a run plus s times the
/// constant direction; writes scan_constant.csv into the run directory.
inline std::vector<std::pair<double, double>> scan_run(const std::filesystem::path& run_dir,
                                                       const std::vector<double>& amplitudes) {
  const ExperimentSpec spec = load_run_spec(run_dir);
  const BuiltProblem b = build_problem(spec);
  ControlPair c = ControlPair::zeros(b.setup);
  c.f = read_field_csv(run_dir / "control_f.csv");
  c.g = read_boundary_csv(run_dir / "control_g.csv");
  check_controls(b.setup, c);
  auto scan = perturbation_scan(b.setup, c, constant_direction(b.setup), amplitudes);
  write_scan_csv(run_dir / "scan_constant.csv", scan);
  return scan;
}

}  // namespace kscontrol::experiment

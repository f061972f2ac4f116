#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kscontrol/errors.hpp"
#include "kscontrol/experiment/config.hpp"
#include "kscontrol/experiment/runner.hpp"
#include "kscontrol/verification.hpp"

namespace {

namespace ex = kscontrol::experiment;
namespace kv = kscontrol::verification;

int run_command(const std::string& preset, const std::string& config, const std::string& out,
                const std::vector<std::string>& sets) {
  const auto artifacts =
      ex::run_preset(preset, sets, config.empty() ? std::nullopt : std::optional<std::string>(config),
                     out.empty() ? std::nullopt : std::optional<std::filesystem::path>(out));
  std::cout << "wrote " << artifacts.files.size() << " files to " << artifacts.directory.string() << "\n";
  return 0;
}

bool report(const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << "  " << detail << "\n";
  return ok;
}

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

int verify_command() {
  bool ok = true;
  const auto inv = kv::invariant_sweep(20240601, 40);
  ok &= report("mass", inv.max_mass_drift <= 1e-12, "max drift " + sci(inv.max_mass_drift));
  ok &= report("positivity", inv.min_value >= -1e-13, "min value " + sci(inv.min_value));
  ok &= report("chemical_balance", inv.max_balance_residual <= 1e-10, "max residual " + sci(inv.max_balance_residual));

  std::uint64_t seed = 7;
  for (auto kind : {kscontrol::BoundaryControlKind::bilinear, kscontrol::BoundaryControlKind::robin})
    for (double a : {0.0, 1.0}) {
      const auto g = kv::gradient_check(seed++, kind, a, a, {1e-5});
      ok &= report("gradient_fd/" + std::string(kscontrol::to_string(kind)) + "/alpha=" + sci(a),
                   g.relative_errors[0] <= 1e-5, "rel err " + sci(g.relative_errors[0]));
    }
  const double gap = kv::duality_gap(99, 20);
  ok &= report("sensitivity_adjoint_duality", gap <= 1e-10, "max rel gap " + sci(gap));
  return ok ? 0 : 2;
}

std::vector<double> parse_amplitudes(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : ex::detail::split_list(text)) out.push_back(ex::detail::parse_real("amplitudes", item));
  if (out.empty()) throw kscontrol::ValidationError(kscontrol::ErrorCode::config_parse, "no amplitudes given");
  return out;
}

int scan_command(const std::string& run_dir, const std::string& direction, const std::string& amplitudes) {
  if (direction != "constant")
    throw kscontrol::ValidationError(kscontrol::ErrorCode::config_parse,
                                     "unsupported scan direction '" + direction + "'");
  const auto scan = ex::scan_run(run_dir, parse_amplitudes(amplitudes));
  std::cout << "amplitude,cost\n";
  for (const auto& [a, c] : scan) std::cout << ex::format_value(a) << ',' << ex::format_value(c) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal control of a discrete Keller-Segel chemotaxis model"};
  app.set_version_flag("--version", KSCONTROL_VERSION);
  app.require_subcommand(1);

  std::string preset, config, out, run_dir, direction = "constant", amplitudes;
  std::vector<std::string> sets;

  auto* run = app.add_subcommand("run", "run a preset and write its artifacts");
  run->add_option("--preset", preset, "preset name")->required();
  run->add_option("--config", config, "key = value configuration file");
  run->add_option("--out", out, "output directory");
  run->add_option("--set", sets, "key=value override (repeatable)")->take_all();

  auto* verify = app.add_subcommand("verify", "run the invariant and gradient checks");

  auto* scan = app.add_subcommand("scan", "cost along a direction around a run's controls");
  scan->add_option("--run", run_dir, "run directory")->required();
  scan->add_option("--direction", direction, "direction (constant)");
  scan->add_option("--amplitudes", amplitudes, "comma-separated amplitudes")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) return run_command(preset, config, out, sets);
    if (*verify) return verify_command();
    if (*scan) return scan_command(run_dir, direction, amplitudes);
  } catch (const kscontrol::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kscontrol/cost_gradient.hpp"
#include "kscontrol/problem.hpp"

namespace kscontrol {

struct AdamConfig {
  double alpha = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double tol = 1e-4;
  long long max_iter = 100000;
};

inline void validate(const AdamConfig& c) {
  if (!(c.alpha > 0.0)) throw ValidationError(ErrorCode::invalid_adam_config, "adam step size must be positive");
  if (!(c.beta1 >= 0.0 && c.beta1 < 1.0) || !(c.beta2 >= 0.0 && c.beta2 < 1.0))
    throw ValidationError(ErrorCode::invalid_adam_config, "adam decay rates must lie in [0, 1)");
  if (!(c.eps > 0.0)) throw ValidationError(ErrorCode::invalid_adam_config, "adam epsilon must be positive");
  if (!(c.tol > 0.0)) throw ValidationError(ErrorCode::invalid_adam_config, "tolerance must be positive");
  if (c.max_iter < 1) throw ValidationError(ErrorCode::invalid_adam_config, "max_iter must be at least 1");
}

/// First and second moment accumulators after `k` updates.
struct AdamState {
  ControlGradient m;
  ControlGradient z;
  long long k = 0;

  static AdamState zeros(const ProblemSetup& s) {
    const std::size_t N = s.tg.steps(), J = s.sg.cells();
    return {{SpaceTimeField(N, J), BoundarySignal(N)}, {SpaceTimeField(N, J), BoundarySignal(N)}, 0};
  }
};

namespace detail {

inline void adam_update_block(std::span<double> m, std::span<double> z, std::span<const double> g,
                              std::span<double> x, const AdamConfig& cfg, double bias1, double bias2) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
    z[i] = cfg.beta2 * z[i] + (1.0 - cfg.beta2) * g[i] * g[i];
    const double m_hat = m[i] / bias1;
    const double z_hat = z[i] / bias2;
    x[i] -= cfg.alpha * m_hat / std::sqrt(z_hat + cfg.eps);
  }
}

}  // namespace detail

/// In-place Adam update of the moments and the controls. Robin controls are
/// projected onto g >= 0 after the step.
inline void adam_update(AdamState& state, const ControlGradient& grad, ControlPair& controls, const AdamConfig& cfg,
                        BoundaryControlKind bkind) {
  const long long k = state.k + 1;
  const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(k));
  const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(k));
  detail::adam_update_block(state.m.wrt_f.values(), state.z.wrt_f.values(), grad.wrt_f.values(),
                            controls.f.values(), cfg, bias1, bias2);
  detail::adam_update_block(state.m.wrt_g.table().values(), state.z.wrt_g.table().values(),
                            grad.wrt_g.table().values(), controls.g.table().values(), cfg, bias1, bias2);
  if (bkind == BoundaryControlKind::robin)
    for (double& g : controls.g.table().values()) g = positive_part(g);
  state.k = k;
}

inline std::pair<AdamState, ControlPair> adam_step(AdamState state, const ControlGradient& grad,
                                                   ControlPair controls, const AdamConfig& cfg,
                                                   BoundaryControlKind bkind) {
  adam_update(state, grad, controls, cfg, bkind);
  return {std::move(state), std::move(controls)};
}

enum class Termination { tolerance, max_iter };

inline std::string_view to_string(Termination t) { return t == Termination::tolerance ? "tolerance" : "max_iter"; }

/// One row per evaluated iterate.
struct OptimizationTrace {
  std::vector<double> cost;
  std::vector<double> grad_norm_l2;
  std::vector<double> grad_norm_max;
  std::vector<double> wall_ms;
  /// Active control entries sitting exactly on a kink (f = 0 or g = 0).
  std::vector<std::size_t> kink_entries;
  Termination termination = Termination::max_iter;
  std::size_t best_iter = 0;  // 1-based row of the lowest cost

  std::size_t iterations() const { return cost.size(); }
};

struct OptimizationResult {
  ControlPair best;  // controls of the lowest recorded cost
  ControlPair last;  // last evaluated iterate
  OptimizationTrace trace;
};

inline std::size_t count_kinks(const ControlPair& c, const ProblemSetup& s) {
  std::size_t n = 0;
  for (std::size_t r = 0; r < c.f.rows(); ++r) {
    for (std::size_t j = 0; j < c.f.cols(); ++j)
      if (s.omega_c.member[j] && c.f(r, j) == 0.0) ++n;
    for (Side side : {Side::left, Side::right})
      if (s.boundary_active(side) && c.g.at(r, side) == 0.0) ++n;
  }
  return n;
}

/// Adam descent on the reduced cost. Each iteration solves forward and
/// backward, records cost and gradient norms, stops on the L2 gradient norm
/// before updating, and otherwise applies one Adam update.
inline OptimizationResult optimize(const ProblemSetup& setup, const AdamConfig& cfg, const ControlPair& initial) {
  validate(cfg);
  check_controls(setup, initial);
  using clock = std::chrono::steady_clock;

  OptimizationResult res;
  ControlPair controls = initial;
  controls.restrict_to(setup);
  AdamState state = AdamState::zeros(setup);
  double best_cost = std::numeric_limits<double>::infinity();
  const BoundaryMask active{setup.boundary_active(Side::left), setup.boundary_active(Side::right)};
  const auto start = clock::now();

  for (long long k = 1; k <= cfg.max_iter; ++k) {
    Evaluation e;
    try {
      e = evaluate(setup, controls);
    } catch (const SolverError& err) {
      throw SolverError("optimizer iteration " + std::to_string(k) + ": " + err.what());
    }
    if (!std::isfinite(e.cost)) throw SolverError("optimizer iteration " + std::to_string(k) + ": non-finite cost");
    const double l2 = gradient_norm(e.gradient, setup.tg, setup.sg, active);
    auto& tr = res.trace;
    tr.cost.push_back(e.cost);
    tr.grad_norm_l2.push_back(l2);
    tr.grad_norm_max.push_back(gradient_max_norm(e.gradient));
    tr.wall_ms.push_back(std::chrono::duration<double, std::milli>(clock::now() - start).count());
    tr.kink_entries.push_back(count_kinks(controls, setup));
    if (e.cost < best_cost) {
      best_cost = e.cost;
      res.best = controls;
      tr.best_iter = static_cast<std::size_t>(k);
    }
    if (l2 <= cfg.tol) {
      tr.termination = Termination::tolerance;
      break;
    }
    if (k == cfg.max_iter) {
      tr.termination = Termination::max_iter;
      break;
    }
    adam_update(state, e.gradient, controls, cfg, setup.bkind);
  }
  res.last = std::move(controls);
  return res;
}

}  // namespace kscontrol

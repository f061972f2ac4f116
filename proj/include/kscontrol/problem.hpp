#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "kscontrol/discretization.hpp"
#include "kscontrol/errors.hpp"

namespace kscontrol {

/// Coefficients of
///   u_t + div(-Du grad u + chi u grad v) = 0
///   v_t + div(-Dv grad v) + lambda v - mu u = f v 1_{Omega_c}
/// and the Robin permeability sigma.
struct PhysicalParams {
  double Du = 0.1;
  double chi = 1.0;
  double Dv = 0.1;
  double lambda = 0.1;
  double mu = 1.0;
  double sigma = 1.0;
};

struct CostWeights {
  double alpha_f = 0.0;
  double alpha_g = 0.0;
};

enum class BoundaryControlKind { none, robin, bilinear };

inline std::string_view to_string(BoundaryControlKind k) {
  switch (k) {
    case BoundaryControlKind::none: return "none";
    case BoundaryControlKind::robin: return "robin";
    case BoundaryControlKind::bilinear: return "bilinear";
  }
  return "none";
}

inline BoundaryControlKind parse_boundary_kind(std::string_view s) {
  if (s == "none") return BoundaryControlKind::none;
  if (s == "robin") return BoundaryControlKind::robin;
  if (s == "bilinear") return BoundaryControlKind::bilinear;
  throw ValidationError(ErrorCode::config_parse, "unknown boundary control kind '" + std::string(s) + "'");
}

/// Everything a forward/backward solve needs besides the controls.
///
/// An empty `omega_c` means no distributed control; `bkind == none` means
/// homogeneous Neumann data for v at both endpoints.
struct ProblemSetup {
  SpatialGrid sg;
  TimeGrid tg;
  PhysicalParams phys;
  CostWeights weights;
  RegionMask omega_c;
  RegionMask omega_o;
  BoundaryMask bmask;
  BoundaryControlKind bkind = BoundaryControlKind::none;
  CellField u0;
  CellField v0;
  SpaceTimeField u_d;  // N x J, row n-1 is the target on I_n

  /// Whether endpoint `s` carries an active boundary control.
  bool boundary_active(Side s) const { return bkind != BoundaryControlKind::none && bmask.contains(s); }
};

/// Distributed control f (N x J) and boundary control g (N x 2). Row n-1
/// holds step n.
struct ControlPair {
  SpaceTimeField f;
  BoundarySignal g;

  static ControlPair zeros(const ProblemSetup& s) {
    return {SpaceTimeField(s.tg.steps(), s.sg.cells()), BoundarySignal(s.tg.steps())};
  }

  /// Zeroes entries outside the control masks.
  void restrict_to(const ProblemSetup& s) {
    for (std::size_t r = 0; r < f.rows(); ++r)
      for (std::size_t j = 0; j < f.cols(); ++j)
        if (!s.omega_c.member[j]) f(r, j) = 0.0;
    for (std::size_t r = 0; r < g.steps(); ++r) {
      if (!s.boundary_active(Side::left)) g.at(r, Side::left) = 0.0;
      if (!s.boundary_active(Side::right)) g.at(r, Side::right) = 0.0;
    }
  }

  bool operator==(const ControlPair&) const = default;
};

/// Checks every setup invariant; returns the setup unchanged when valid.
inline const ProblemSetup& validate(const ProblemSetup& s) {
  const std::size_t J = s.sg.cells();
  const std::size_t N = s.tg.steps();
  if (!(s.sg.dx() > 0.0) || !(s.tg.dt() > 0.0) || J < 2 || N < 1)
    throw ValidationError(ErrorCode::invalid_grid, "grid has non-positive spacing");

  const auto& p = s.phys;
  for (double c : {p.Du, p.chi, p.Dv, p.lambda, p.mu, p.sigma})
    if (!std::isfinite(c)) throw ValidationError(ErrorCode::non_finite_value, "physical parameter is not finite");
  if (!(p.Du > 0.0)) throw ValidationError(ErrorCode::non_positive_diffusion, "cell diffusion Du must be positive");
  if (!(p.Dv > 0.0))
    throw ValidationError(ErrorCode::non_positive_diffusion, "chemical diffusion Dv must be positive");
  if (p.lambda < 0.0) throw ValidationError(ErrorCode::negative_reaction_rate, "degradation rate lambda must be >= 0");
  if (p.mu < 0.0) throw ValidationError(ErrorCode::negative_reaction_rate, "production rate mu must be >= 0");
  if (s.bkind == BoundaryControlKind::robin && !(p.sigma > 0.0))
    throw ValidationError(ErrorCode::non_positive_permeability, "permeability must be positive");

  if (!(s.weights.alpha_f >= 0.0) || !(s.weights.alpha_g >= 0.0))
    throw ValidationError(ErrorCode::negative_weight, "control weights must be nonnegative");

  if (s.omega_c.member.size() != J || s.omega_o.member.size() != J)
    throw ValidationError(ErrorCode::shape_mismatch, "region mask length differs from cell count");
  if (s.omega_o.empty() || !(s.omega_o.measure > 0.0))
    throw ValidationError(ErrorCode::empty_observation_region, "observation region is empty");
  if (s.bkind != BoundaryControlKind::none && s.bmask.count() < 1)
    throw ValidationError(ErrorCode::missing_boundary_endpoint, "boundary control needs at least one endpoint");

  if (s.u0.size() != J || s.v0.size() != J)
    throw ValidationError(ErrorCode::shape_mismatch, "initial data length differs from cell count");
  for (std::size_t j = 0; j < J; ++j) {
    if (!std::isfinite(s.u0[j]) || !std::isfinite(s.v0[j]))
      throw ValidationError(ErrorCode::non_finite_value, "initial data not finite in cell " + std::to_string(j + 1));
    if (s.u0[j] < 0.0) throw ValidationError(ErrorCode::negative_initial_cells, "negative initial cell density");
    if (s.v0[j] < 0.0)
      throw ValidationError(ErrorCode::negative_initial_chemical, "negative initial chemical concentration");
  }

  if (s.u_d.rows() != N || s.u_d.cols() != J)
    throw ValidationError(ErrorCode::shape_mismatch, "target u_d must be N x J");
  for (std::size_t r = 0; r < N; ++r)
    for (std::size_t j = 0; j < J; ++j)
      if (s.omega_o.member[j] && !std::isfinite(s.u_d(r, j)))
        throw ValidationError(ErrorCode::non_finite_value, "target u_d not finite on the observation region");
  return s;
}

/// Checks that a control pair matches the grids.
inline void check_controls(const ProblemSetup& s, const ControlPair& c) {
  if (c.f.rows() != s.tg.steps() || c.f.cols() != s.sg.cells())
    throw ValidationError(ErrorCode::shape_mismatch, "distributed control must be N x J");
  if (c.g.steps() != s.tg.steps())
    throw ValidationError(ErrorCode::shape_mismatch, "boundary control must have N rows");
  if (!c.f.all_finite() || !c.g.table().all_finite())
    throw ValidationError(ErrorCode::non_finite_value, "control contains non-finite values");
}

}  // namespace kscontrol

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kscontrol {

enum class ErrorCode {
  invalid_grid,
  shape_mismatch,
  non_finite_value,
  empty_region,
  negative_initial_cells,
  negative_initial_chemical,
  non_positive_diffusion,
  negative_reaction_rate,
  non_positive_permeability,
  negative_weight,
  empty_observation_region,
  missing_boundary_endpoint,
  invalid_adam_config,
  config_parse,
  unknown_key,
  unknown_preset,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::invalid_grid: return "invalid_grid";
    case ErrorCode::shape_mismatch: return "shape_mismatch";
    case ErrorCode::non_finite_value: return "non_finite_value";
    case ErrorCode::empty_region: return "empty_region";
    case ErrorCode::negative_initial_cells: return "negative_initial_cells";
    case ErrorCode::negative_initial_chemical: return "negative_initial_chemical";
    case ErrorCode::non_positive_diffusion: return "non_positive_diffusion";
    case ErrorCode::negative_reaction_rate: return "negative_reaction_rate";
    case ErrorCode::non_positive_permeability: return "non_positive_permeability";
    case ErrorCode::negative_weight: return "negative_weight";
    case ErrorCode::empty_observation_region: return "empty_observation_region";
    case ErrorCode::missing_boundary_endpoint: return "missing_boundary_endpoint";
    case ErrorCode::invalid_adam_config: return "invalid_adam_config";
    case ErrorCode::config_parse: return "config_parse";
    case ErrorCode::unknown_key: return "unknown_key";
    case ErrorCode::unknown_preset: return "unknown_preset";
  }
  return "unknown";
}

/// Rejected input: bad grid, setup, configuration or shape.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(ErrorCode code, const std::string& what)
      : std::invalid_argument(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

/// Numerical failure inside a solve. `step` is the time level that failed
/// (0 when not tied to a step).
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what, std::size_t step = 0)
      : std::runtime_error(step ? what + " (time step " + std::to_string(step) + ")" : what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

}  // namespace kscontrol

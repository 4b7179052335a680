#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "iapi/model.hpp"

namespace iapi {

enum class RegionMode { kStandard, kEnlarge, kFrozen };

/// One pass of evaluate -> improve -> region update -> convergence test.
struct IterationRecord {
  std::size_t index = 0;
  ValueFunctionEstimate value;              // V^{mu_i}
  std::optional<double> radius;             // c_i^* (alpha_i^* when enlarging); none when frozen
  std::shared_ptr<const Region> region;     // Omega_{i+1}
  double policy_distance = 0.0;             // sup over Omega_{i+1} of |mu_{i+1} - mu_i|
  double hjb_rms = 0.0;                     // HJB residual of V^{mu_i} on the grid of Omega_i
  double lsq_rms = 0.0;                     // Lyapunov-equation fit residual
  std::size_t grid_points = 0;              // |grid of Omega_i|
  std::size_t next_grid_points = 0;         // |grid of Omega_{i+1}|

  // Diagnostics.
  bool positive_definite = true;            // V^{mu_i} > 0 at nonzero grid points of Omega_i
  double lyapunov_slack = 0.0;              // max of (dV^{mu_i}/dt + r)/max(1,r) under mu_{i+1}
  std::optional<double> monotone_slack;     // max of (V_i - V_{i-1})/max(1,V_{i-1}) on Omega_{i+1}
  bool radius_monotone = true;              // c_i^* <= c_{i-1}^*
};

struct PIHistory {
  RegionMode mode = RegionMode::kStandard;
  std::shared_ptr<const Region> omega0;
  std::vector<IterationRecord> iterations;
  bool converged = false;

  const IterationRecord& final() const { return iterations.back(); }
};

}  // namespace iapi

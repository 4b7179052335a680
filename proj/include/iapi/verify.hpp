#pragma once

// Simulation-based checks of admissibility, invariance, Lyapunov decrease,
// monotone value estimates and value/cost agreement.

#include <cstddef>
#include <string>
#include <vector>

#include "iapi/history.hpp"
#include "iapi/model.hpp"
#include "iapi/numerics.hpp"
#include "iapi/region.hpp"

namespace iapi {

struct Tolerances {
  double tau_inv = 1e-3;
  double tau_lyap = 1e-6;
  double tau_mono = 1e-6;
  double tau_val = 1e-2;
  double tau_hjb = 1e-6;
  double tail_rel = 1e-6;
  double tail_abs = 1e-7;
};

struct VerifySettings {
  IntegratorSettings integrator;
  Tolerances tolerances;
  BoundarySettings boundary;
  /// Interior lattice points per axis used by check_admissible.
  std::size_t interior_per_axis = 5;
};

/// Worst case seen by a check: the state, the measured quantity and the
/// threshold it is compared against (pass iff measured <= threshold).
struct Witness {
  StateVector state;
  double measured = 0.0;
  double threshold = 0.0;
  std::string note;
};

struct CheckReport {
  std::string name;
  bool passed = true;
  std::size_t tested = 0;
  std::size_t failures = 0;
  Witness worst;
};

/// Simulates from the boundary samples (boundary_count(region) with
/// `n_samples` rays) and an interior lattice of `region`. Per trajectory the
/// measured quantity is max(|x_end|_inf / delta_origin, tail / tail budget);
/// leaving the domain or diverging counts as +inf.
CheckReport check_admissible(const DynamicsModel& model, const CostSpec& cost, const Policy& mu,
                             const Region& region, std::size_t n_samples,
                             const VerifySettings& settings = {});

/// Simulates from `n_trajectories` boundary samples of a sublevel set {v <= c}
/// and measures max_t v(x(t)) / c; also requires every trajectory to reach the
/// origin ball.
CheckReport check_invariance(const DynamicsModel& model, const Policy& mu, const Region& region,
                             std::size_t n_trajectories, const VerifySettings& settings = {});

/// Measures (grad v . (f + g mu) + r(x, mu)) / max(1, r) over the grid
/// against tau_lyap.
CheckReport check_lyapunov_decrease(const DynamicsModel& model, const CostSpec& cost,
                                    const ValueFunctionEstimate& v, const Policy& mu_next,
                                    const SampleGrid& grid, const Tolerances& tol = {});

/// Relative error between v(x0) and the simulated closed-loop cost.
CheckReport check_value_against_cost(const DynamicsModel& model, const CostSpec& cost,
                                     const ValueFunctionEstimate& v, const Policy& mu,
                                     const std::vector<StateVector>& probes,
                                     const VerifySettings& settings = {});

/// V_{i+1} <= V_i + tau_mono max(1, V_i) and V_{i+1} > 0 away from the origin,
/// for every consecutive pair of the history, on `grid`.
CheckReport check_monotone_values(const PIHistory& history, const SampleGrid& grid,
                                  const Tolerances& tol = {});

/// Recorded radii are nonincreasing (standard region mode).
CheckReport check_monotone_radii(const PIHistory& history);

}  // namespace iapi

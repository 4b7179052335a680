#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <optional>

#include "iapi/history.hpp"
#include "iapi/model.hpp"
#include "iapi/numerics.hpp"
#include "iapi/region.hpp"
#include "iapi/verify.hpp"

namespace iapi {

struct AdmissibilityGate {
  bool enabled = true;
  std::size_t boundary_samples = 80;
  std::size_t interior_per_axis = 5;
};

struct PIConfig {
  std::shared_ptr<const DynamicsModel> model;
  std::shared_ptr<const CostSpec> cost;
  std::shared_ptr<const BasisSet> basis;
  std::shared_ptr<const Policy> mu0;
  std::shared_ptr<const Region> omega0;

  double epsilon = 1e-4;
  std::size_t max_iterations = 50;
  double spacing = 0.01;
  RegionMode mode = RegionMode::kStandard;
  std::shared_ptr<const Region> upsilon;  // kEnlarge only

  IntegratorSettings integrator;
  BoundarySettings boundary;
  Tolerances tolerances;
  AdmissibilityGate gate;
};

struct PolicyEvaluation {
  ValueFunctionEstimate value;
  double rms_residual = 0.0;
  bool positive_definite = true;
  std::optional<StateVector> non_positive_at;  // first nonzero grid point with V <= 0
};

/// Least-squares collocation of grad V . (f + g mu) = -r(x, mu(x)) over the
/// grid, V in the span of `basis`.
PolicyEvaluation evaluate_policy_lsq(const DynamicsModel& model, const CostSpec& cost,
                                     std::shared_ptr<const BasisSet> basis, const Policy& mu,
                                     const SampleGrid& grid);

/// mu+(x) = -1/2 R^-1 g(x)' grad V(x).
Policy improve_policy(std::shared_ptr<const DynamicsModel> model, const CostSpec& cost,
                      const ValueFunctionEstimate& v);

/// max over the grid of |mu_a(x) - mu_b(x)|_2.
double policy_distance(const Policy& mu_a, const Policy& mu_b, const SampleGrid& grid);

/// H(x, u, p) = r(x, u) + p'(f(x) + g(x) u).
double hamiltonian(const DynamicsModel& model, const CostSpec& cost, const StateVector& x,
                   const InputVector& u, const StateVector& p);

/// Q(x) + grad V' f - 1/4 grad V' g R^-1 g' grad V.
double hjb_residual(const DynamicsModel& model, const CostSpec& cost,
                    const ValueFunctionEstimate& v, const StateVector& x);

/// Root-mean-square HJB residual over the grid.
double hjb_rms(const DynamicsModel& model, const CostSpec& cost, const ValueFunctionEstimate& v,
               const SampleGrid& grid);

/// Runs invariantly admissible policy iteration. Throws
/// AdmissibilityCheckFailed when mu0 fails the gate on omega0.
PIHistory run_pi(const PIConfig& config);

}  // namespace iapi

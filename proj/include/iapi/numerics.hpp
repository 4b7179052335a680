#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "iapi/model.hpp"

namespace iapi {

// ---------------------------------------------------------------------------
// Least squares

struct LeastSquaresResult {
  Eigen::VectorXd weights;
  double residual_norm = 0.0;
};

/// Minimizes |A w - b|_2 through a Householder QR factorization. Throws
/// RankDeficient when sigma_min / sigma_max of A falls below `rank_tol`.
LeastSquaresResult solve_least_squares(const Matrix& a, const Eigen::VectorXd& b,
                                       double rank_tol = 1e-10);

// ---------------------------------------------------------------------------
// Fixed-step RK4

enum class Termination { kReachedOrigin, kMaxTime, kLeftDomain, kDiverged };

std::string to_string(Termination t);

struct IntegratorSettings {
  double h = 1e-3;
  double t_max = 50.0;
  double delta_origin = 1e-4;
  double divergence_bound = 1e6;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
  std::vector<InputVector> inputs;  // empty for plain vector fields
  Termination termination = Termination::kMaxTime;

  std::size_t size() const noexcept { return times.size(); }
};

/// Integrates xdot = field(x) with the classical RK4 scheme and stops at the
/// first of: |x|_inf <= delta_origin, t >= t_max, x outside `domain`,
/// |x|_inf > divergence_bound. Throws NonFiniteState on NaN/Inf.
Trajectory rk4_integrate(const VectorField& field, const StateVector& x0,
                         const IntegratorSettings& settings,
                         const Region* domain = nullptr);

/// Closed-loop simulation of (model, policy); records inputs alongside states
/// and uses the model's domain.
Trajectory simulate(const DynamicsModel& model, const Policy& policy, const StateVector& x0,
                    const IntegratorSettings& settings);

// ---------------------------------------------------------------------------
// Quadrature of the running cost

struct TailSettings {
  double relative = 1e-6;   // tail accepted when tail <= relative * J ...
  double absolute = 1e-7;   // ... or tail <= absolute
  /// Cost-to-go estimate used for the tail once the origin ball is reached.
  const ValueFunctionEstimate* value = nullptr;
};

struct QuadratureResult {
  double value = 0.0;     // integral + tail
  double integral = 0.0;  // trapezoidal part
  double tail = 0.0;
  bool tail_negligible = true;
};

using RunningCost = std::function<double(const StateVector&, const InputVector&)>;

/// Composite trapezoidal rule over the stored samples plus a tail estimate.
/// Throws TailNotNegligible if the trajectory left the domain, diverged, or
/// stopped at t_max with a final integrand above `tail.absolute`.
QuadratureResult trajectory_quadrature(const Trajectory& traj, const RunningCost& integrand,
                                       const TailSettings& tail = {});

// ---------------------------------------------------------------------------
// Scalar bisection

/// Finds r in [lo, hi] with |scalar(r) - target| <= tol, given a sign change
/// of scalar - target over the bracket. The returned point lies on the same
/// side of the crossing as `lo`. Uses at most ceil(log2((hi-lo)/tol)) + 2
/// halvings. Throws NoBracket when the end values do not straddle `target`.
double bisect_level_crossing(const std::function<double(double)>& scalar, double lo, double hi,
                             double target, double tol);

// ---------------------------------------------------------------------------
// Sample grids

struct SampleGrid {
  std::vector<StateVector> points;
  Eigen::VectorXd spacing;
  std::shared_ptr<const Region> source;

  std::size_t size() const noexcept { return points.size(); }
};

/// Lattice {k * spacing} (anchored at the origin) over the region's bounding
/// box, filtered by membership, in lexicographic order with the last axis
/// running fastest. Throws EmptyGrid if nothing survives the filter.
SampleGrid grid_sample(std::shared_ptr<const Region> region, const Eigen::VectorXd& spacing);
SampleGrid grid_sample(std::shared_ptr<const Region> region, double spacing);

}  // namespace iapi

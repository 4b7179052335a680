#include "iapi/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "iapi/parallel.hpp"

namespace iapi {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  double measured = 0.0;
  std::string note;
};

// Folds per-sample outcomes, in sample order, into a report.
CheckReport fold(std::string name, const std::vector<StateVector>& states,
                 const std::vector<Outcome>& outcomes, double threshold) {
  CheckReport report;
  report.name = std::move(name);
  report.tested = states.size();
  report.worst.threshold = threshold;
  report.worst.measured = -kInf;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const Outcome& o = outcomes[i];
    const bool failed = !(o.measured <= threshold);
    if (failed) ++report.failures;
    const bool worse = std::isnan(o.measured) ? !std::isnan(report.worst.measured)
                                              : o.measured > report.worst.measured;
    if (i == 0 || worse) {
      report.worst.state = states[i];
      report.worst.measured = o.measured;
      report.worst.note = o.note;
    }
  }
  if (states.empty()) report.worst.measured = 0.0;
  report.passed = report.failures == 0;
  return report;
}

RunningCost running_cost(const CostSpec& cost) {
  return [&cost](const StateVector& x, const InputVector& u) { return stage_cost(cost, x, u); };
}

}  // namespace

CheckReport check_admissible(const DynamicsModel& model, const CostSpec& cost, const Policy& mu,
                             const Region& region, std::size_t n_samples,
                             const VerifySettings& settings) {
  if (n_samples < 1) throw ModelError("check_admissible needs n_samples >= 1");
  BoundarySettings bs = settings.boundary;
  bs.rays = n_samples;
  std::vector<StateVector> starts = boundary_samples(region, boundary_count(region, bs), bs).points;

  const Box bbox = region.bounding_box();
  const std::size_t per_axis = std::max<std::size_t>(settings.interior_per_axis, 2);
  const Eigen::VectorXd spacing =
      ((bbox.upper - bbox.lower) / static_cast<double>(per_axis - 1)).cwiseMax(1e-12);
  auto shared = std::make_shared<const Region>(region);
  for (auto& p : grid_sample(shared, spacing).points) starts.push_back(std::move(p));

  const IntegratorSettings& is = settings.integrator;
  const TailSettings tail{.relative = settings.tolerances.tail_rel, .absolute = settings.tolerances.tail_abs};
  std::vector<Outcome> outcomes(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    Outcome& o = outcomes[i];
    try {
      const Trajectory traj = simulate(model, mu, starts[i], is);
      if (traj.termination != Termination::kReachedOrigin) {
        o.measured = traj.termination == Termination::kMaxTime
                         ? traj.states.back().lpNorm<Eigen::Infinity>() / is.delta_origin
                         : kInf;
        o.note = "trajectory " + to_string(traj.termination) + " at t = " + std::to_string(traj.times.back());
        return;
      }
      const QuadratureResult q = trajectory_quadrature(traj, running_cost(cost), tail);
      const double budget = std::max(tail.relative * q.value, tail.absolute);
      o.measured = std::max(traj.states.back().lpNorm<Eigen::Infinity>() / is.delta_origin,
                            q.tail / budget);
      if (!q.tail_negligible) o.note = "cost tail " + std::to_string(q.tail) + " not negligible";
    } catch (const Error& e) {
      o.measured = kInf;
      o.note = e.kind() + ": " + e.what();
    }
  }, 1);
  return fold("admissible", starts, outcomes, 1.0);
}

CheckReport check_invariance(const DynamicsModel& model, const Policy& mu, const Region& region,
                             std::size_t n_trajectories, const VerifySettings& settings) {
  const SublevelSet* set = region.sublevel();
  if (!set) throw ModelError("invariance is checked on sublevel sets");
  const std::vector<StateVector> starts = boundary_samples(region, n_trajectories, settings.boundary).points;
  std::vector<Outcome> outcomes(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    Outcome& o = outcomes[i];
    try {
      const Trajectory traj = simulate(model, mu, starts[i], settings.integrator);
      double peak = 0.0;
      for (const auto& x : traj.states) peak = std::max(peak, set->value(x));
      o.measured = peak / set->level;
      if (traj.termination != Termination::kReachedOrigin) {
        o.note = "trajectory " + to_string(traj.termination) + " at t = " + std::to_string(traj.times.back());
        o.note += ", peak level ratio " + std::to_string(o.measured);
        o.measured = kInf;
      }
    } catch (const Error& e) {
      o.measured = kInf;
      o.note = e.kind() + ": " + e.what();
    }
  }, 1);
  return fold("invariance", starts, outcomes, 1.0 + settings.tolerances.tau_inv);
}

CheckReport check_lyapunov_decrease(const DynamicsModel& model, const CostSpec& cost,
                                    const ValueFunctionEstimate& v, const Policy& mu_next,
                                    const SampleGrid& grid, const Tolerances& tol) {
  std::vector<Outcome> outcomes(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const StateVector& x = grid.points[i];
    const InputVector u = mu_next(x);
    const double r = stage_cost(cost, x, u);
    outcomes[i].measured = (v.gradient(x).dot(model.field(x, u)) + r) / std::max(1.0, r);
  }, 1024);
  return fold("lyapunov_decrease", grid.points, outcomes, tol.tau_lyap);
}

CheckReport check_value_against_cost(const DynamicsModel& model, const CostSpec& cost,
                                     const ValueFunctionEstimate& v, const Policy& mu,
                                     const std::vector<StateVector>& probes,
                                     const VerifySettings& settings) {
  const TailSettings tail{.relative = settings.tolerances.tail_rel,
                          .absolute = settings.tolerances.tail_abs,
                          .value = &v};
  std::vector<Outcome> outcomes(probes.size());
  parallel_for(probes.size(), [&](std::size_t i) {
    Outcome& o = outcomes[i];
    const StateVector& x0 = probes[i];
    const double predicted = v(x0);
    if (x0.isZero(0.0)) {
      o.measured = std::abs(predicted);
      return;
    }
    try {
      const Trajectory traj = simulate(model, mu, x0, settings.integrator);
      const QuadratureResult q = trajectory_quadrature(traj, running_cost(cost), tail);
      o.measured = std::abs(predicted - q.value) / std::abs(q.value);
      std::ostringstream os;
      os << "V = " << predicted << ", simulated cost = " << q.value;
      o.note = os.str();
      if (!q.tail_negligible) {
        o.measured = kInf;
        o.note += ", tail " + std::to_string(q.tail) + " not negligible";
      }
    } catch (const Error& e) {
      o.measured = kInf;
      o.note = e.kind() + ": " + e.what();
    }
  }, 1);
  return fold("value_against_cost", probes, outcomes, settings.tolerances.tau_val);
}

CheckReport check_monotone_values(const PIHistory& history, const SampleGrid& grid,
                                  const Tolerances& tol) {
  std::vector<StateVector> states;
  std::vector<Outcome> outcomes;
  for (std::size_t i = 0; i + 1 < history.iterations.size(); ++i) {
    const ValueFunctionEstimate& prev = history.iterations[i].value;
    const ValueFunctionEstimate& next = history.iterations[i + 1].value;
    std::vector<Outcome> step(grid.size());
    parallel_for(grid.size(), [&](std::size_t k) {
      const StateVector& x = grid.points[k];
      const double vp = prev(x);
      const double vn = next(x);
      Outcome& o = step[k];
      o.measured = (vn - vp) / std::max(1.0, vp);
      if (!x.isZero(0.0) && !(vn > 0.0)) {
        o.measured = kInf;
        o.note = "V_" + std::to_string(i + 1) + " not positive";
      } else {
        o.note = "iterations " + std::to_string(i) + " -> " + std::to_string(i + 1);
      }
    }, 1024);
    states.insert(states.end(), grid.points.begin(), grid.points.end());
    outcomes.insert(outcomes.end(), step.begin(), step.end());
  }
  CheckReport report = fold("monotone_values", states, outcomes, tol.tau_mono);
  if (states.empty()) report.worst.state = StateVector::Zero(grid.points.empty() ? 0 : grid.points[0].size());
  return report;
}

CheckReport check_monotone_radii(const PIHistory& history) {
  std::vector<StateVector> states;
  std::vector<Outcome> outcomes;
  for (std::size_t i = 0; i + 1 < history.iterations.size(); ++i) {
    const auto& a = history.iterations[i].radius;
    const auto& b = history.iterations[i + 1].radius;
    if (!a || !b) continue;
    states.push_back(StateVector::Constant(1, static_cast<double>(i + 1)));
    outcomes.push_back(Outcome{.measured = *b - *a,
                               .note = "c*_" + std::to_string(i + 1) + " - c*_" + std::to_string(i)});
  }
  CheckReport report = fold("monotone_radii", states, outcomes, 0.0);
  if (states.empty()) report.worst.state = StateVector::Zero(1);
  return report;
}

}  // namespace iapi

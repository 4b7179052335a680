#include "iapi/policy_iteration.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "iapi/parallel.hpp"

namespace iapi {
namespace {

constexpr std::size_t kRowChunk = 1024;

// Sum of per-point values in fixed chunks, chunks added in order.
double ordered_sum(const std::vector<double>& values) {
  double total = 0.0;
  for (std::size_t begin = 0; begin < values.size(); begin += kRowChunk) {
    const std::size_t end = std::min(values.size(), begin + kRowChunk);
    double partial = 0.0;
    for (std::size_t i = begin; i < end; ++i) partial += values[i];
    total += partial;
  }
  return total;
}

double max_of(const std::vector<double>& values) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values) m = std::max(m, v);
  return m;
}

}  // namespace

PolicyEvaluation evaluate_policy_lsq(const DynamicsModel& model, const CostSpec& cost,
                                     std::shared_ptr<const BasisSet> basis, const Policy& mu,
                                     const SampleGrid& grid) {
  if (!basis) throw ModelError("policy evaluation without a basis");
  if (grid.points.empty()) throw EmptyGrid("policy evaluation on an empty grid");
  const std::size_t rows = grid.size();
  const auto k = static_cast<Eigen::Index>(basis->size());
  Matrix a(static_cast<Eigen::Index>(rows), k);
  Eigen::VectorXd b(static_cast<Eigen::Index>(rows));
  parallel_chunks(rows, kRowChunk, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const StateVector& x = grid.points[i];
      const InputVector u = mu(x);
      const Eigen::VectorXd f = model.field(x, u);
      a.row(static_cast<Eigen::Index>(i)) = (basis->gradients(x).transpose() * f).transpose();
      b[static_cast<Eigen::Index>(i)] = -stage_cost(cost, x, u);
    }
  });
  const LeastSquaresResult ls = solve_least_squares(a, b);
  PolicyEvaluation out{.value = ValueFunctionEstimate(basis, ls.weights),
                       .rms_residual = ls.residual_norm / std::sqrt(static_cast<double>(rows))};
  for (const auto& x : grid.points) {
    if (x.isZero(0.0)) continue;
    if (!(out.value(x) > 0.0)) {
      out.positive_definite = false;
      out.non_positive_at = x;
      break;
    }
  }
  return out;
}

Policy improve_policy(std::shared_ptr<const DynamicsModel> model, const CostSpec& cost,
                      const ValueFunctionEstimate& v) {
  return Policy(ImprovedPolicy{std::move(model), cost.input_weight_inverse(), v});
}

double policy_distance(const Policy& mu_a, const Policy& mu_b, const SampleGrid& grid) {
  std::vector<double> d(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) { d[i] = (mu_a(grid.points[i]) - mu_b(grid.points[i])).norm(); },
               kRowChunk);
  return std::max(0.0, max_of(d));
}

double hamiltonian(const DynamicsModel& model, const CostSpec& cost, const StateVector& x,
                   const InputVector& u, const StateVector& p) {
  if (static_cast<std::size_t>(p.size()) != model.state_dim()) throw DimensionMismatch("costate dimension");
  return stage_cost(cost, x, u) + p.dot(model.field(x, u));
}

double hjb_residual(const DynamicsModel& model, const CostSpec& cost,
                    const ValueFunctionEstimate& v, const StateVector& x) {
  const StateVector grad = v.gradient(x);
  const Eigen::VectorXd gt_grad = model.input_gain(x).transpose() * grad;
  return cost.state_cost(x) + grad.dot(model.drift(x)) -
         0.25 * gt_grad.dot(cost.input_weight_inverse() * gt_grad);
}

double hjb_rms(const DynamicsModel& model, const CostSpec& cost, const ValueFunctionEstimate& v,
               const SampleGrid& grid) {
  std::vector<double> sq(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const double r = hjb_residual(model, cost, v, grid.points[i]);
    sq[i] = r * r;
  }, kRowChunk);
  return std::sqrt(ordered_sum(sq) / static_cast<double>(grid.size()));
}

namespace {

double lyapunov_slack(const DynamicsModel& model, const CostSpec& cost, const ValueFunctionEstimate& v,
                      const Policy& mu, const SampleGrid& grid) {
  std::vector<double> s(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const StateVector& x = grid.points[i];
    const InputVector u = mu(x);
    const double r = stage_cost(cost, x, u);
    s[i] = (v.gradient(x).dot(model.field(x, u)) + r) / std::max(1.0, r);
  }, kRowChunk);
  return max_of(s);
}

double monotone_slack(const ValueFunctionEstimate& prev, const ValueFunctionEstimate& next,
                      const SampleGrid& grid) {
  std::vector<double> s(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const double vp = prev(grid.points[i]);
    s[i] = (next(grid.points[i]) - vp) / std::max(1.0, vp);
  }, kRowChunk);
  return max_of(s);
}

}  // namespace

PIHistory run_pi(const PIConfig& config) {
  if (!config.model || !config.cost || !config.basis || !config.mu0 || !config.omega0) {
    throw ModelError("incomplete policy iteration config");
  }
  if (!(config.epsilon > 0.0)) throw ModelError("epsilon must be positive");
  if (config.max_iterations < 1) throw ModelError("max_iterations must be >= 1");
  if (config.mode == RegionMode::kEnlarge && !config.upsilon) {
    throw ModelError("enlarge mode needs an upsilon region");
  }
  const DynamicsModel& model = *config.model;
  const CostSpec& cost = *config.cost;

  if (config.gate.enabled) {
    VerifySettings vs{.integrator = config.integrator,
                      .tolerances = config.tolerances,
                      .boundary = config.boundary,
                      .interior_per_axis = config.gate.interior_per_axis};
    const CheckReport gate =
        check_admissible(model, cost, *config.mu0, *config.omega0, config.gate.boundary_samples, vs);
    if (!gate.passed) {
      std::ostringstream os;
      os << "initial policy is not admissible on " << config.omega0->describe() << ": "
         << gate.failures << " of " << gate.tested << " trajectories failed; worst at x0 = ("
         << gate.worst.state.transpose() << ")" << (gate.worst.note.empty() ? "" : ", " + gate.worst.note);
      throw AdmissibilityCheckFailed(os.str());
    }
  }

  PIHistory history;
  history.mode = config.mode;
  history.omega0 = config.omega0;

  std::shared_ptr<const Region> omega = config.omega0;
  std::shared_ptr<const Policy> mu = config.mu0;
  SampleGrid grid = grid_sample(omega, config.spacing);

  for (std::size_t i = 0; i < config.max_iterations; ++i) {
    const PolicyEvaluation eval = evaluate_policy_lsq(model, cost, config.basis, *mu, grid);
    auto mu_next = std::make_shared<const Policy>(improve_policy(config.model, cost, eval.value));

    IterationRecord rec{.index = i, .value = eval.value};
    switch (config.mode) {
      case RegionMode::kStandard: {
        RegionUpdate up = update_region(eval.value, omega, config.boundary);
        rec.radius = up.level;
        rec.region = std::move(up.region);
        break;
      }
      case RegionMode::kEnlarge: {
        Enlargement en = enlarge_region(eval.value, omega, config.upsilon, config.boundary);
        rec.radius = en.alpha;
        rec.region = std::move(en.region);
        break;
      }
      case RegionMode::kFrozen:
        rec.region = config.omega0;
        break;
    }

    SampleGrid next_grid = grid_sample(rec.region, config.spacing);
    rec.policy_distance = policy_distance(*mu_next, *mu, next_grid);
    rec.hjb_rms = hjb_rms(model, cost, eval.value, grid);
    rec.lsq_rms = eval.rms_residual;
    rec.grid_points = grid.size();
    rec.next_grid_points = next_grid.size();
    rec.positive_definite = eval.positive_definite;
    rec.lyapunov_slack = lyapunov_slack(model, cost, eval.value, *mu_next, next_grid);
    if (!history.iterations.empty()) {
      const IterationRecord& prev = history.iterations.back();
      rec.monotone_slack = monotone_slack(prev.value, eval.value, next_grid);
      if (rec.radius && prev.radius && config.mode == RegionMode::kStandard) {
        rec.radius_monotone = *rec.radius <= *prev.radius;
      }
    }

    const bool done = rec.policy_distance < config.epsilon;
    history.iterations.push_back(std::move(rec));
    if (done) {
      history.converged = true;
      break;
    }
    omega = history.iterations.back().region;
    mu = std::move(mu_next);
    grid = std::move(next_grid);
  }
  return history;
}

}  // namespace iapi

#include "iapi/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "iapi/parallel.hpp"

namespace iapi {

LeastSquaresResult solve_least_squares(const Matrix& a, const Eigen::VectorXd& b, double rank_tol) {
  const Eigen::Index n = a.rows();
  const Eigen::Index k = a.cols();
  if (b.size() != n) throw DimensionMismatch("least squares: rows of A and length of b differ");
  if (k == 0) throw DimensionMismatch("least squares: no unknowns");
  if (n < k) {
    throw RankDeficient("least squares: " + std::to_string(n) + " equations for " +
                        std::to_string(k) + " unknowns");
  }
  Eigen::HouseholderQR<Matrix> qr(a);
  const Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Matrix> svd(r);
  const auto& sigma = svd.singularValues();
  const double smax = sigma[0];
  const double smin = sigma[k - 1];
  if (!(smax > 0.0) || smin / smax < rank_tol) {
    std::ostringstream os;
    os << "least squares: numerical rank below " << k << " (sigma_min/sigma_max = "
       << (smax > 0.0 ? smin / smax : 0.0) << ")";
    throw RankDeficient(os.str());
  }
  LeastSquaresResult out;
  out.weights = qr.solve(b);
  out.residual_norm = (a * out.weights - b).norm();
  return out;
}

// ---------------------------------------------------------------------------

std::string to_string(Termination t) {
  switch (t) {
    case Termination::kReachedOrigin: return "reached_origin";
    case Termination::kMaxTime: return "max_time";
    case Termination::kLeftDomain: return "left_domain";
    case Termination::kDiverged: return "diverged";
  }
  return "unknown";
}

namespace {

std::optional<Termination> stop_reason(const StateVector& x, double t,
                                       const IntegratorSettings& s, const Region* domain) {
  const double norm = x.lpNorm<Eigen::Infinity>();
  if (norm <= s.delta_origin) return Termination::kReachedOrigin;
  if (norm > s.divergence_bound) return Termination::kDiverged;
  if (domain && !domain->contains(x)) return Termination::kLeftDomain;
  if (t >= s.t_max * (1.0 - 1e-12)) return Termination::kMaxTime;
  return std::nullopt;
}

void check_finite(const Eigen::VectorXd& v, const StateVector& x, double t) {
  if (!v.allFinite()) {
    std::ostringstream os;
    os << "non-finite state derivative at t = " << t << ", x = (" << x.transpose() << ")";
    throw NonFiniteState(os.str());
  }
}

template <typename Record>
Trajectory integrate(const VectorField& field, const StateVector& x0,
                     const IntegratorSettings& s, const Region* domain, Record&& record) {
  if (!(s.h > 0.0) || !(s.t_max > 0.0)) throw ModelError("integrator needs h > 0 and t_max > 0");
  if (!x0.allFinite()) throw NonFiniteState("non-finite initial state");
  Trajectory traj;
  const auto max_steps = static_cast<std::size_t>(std::ceil(s.t_max / s.h * (1.0 - 1e-12)));
  traj.times.reserve(std::min<std::size_t>(max_steps + 1, 1u << 16));
  traj.states.reserve(traj.times.capacity());
  StateVector x = x0;
  for (std::size_t step = 0;; ++step) {
    const double t = static_cast<double>(step) * s.h;
    traj.times.push_back(t);
    traj.states.push_back(x);
    record(traj, x);
    if (auto why = stop_reason(x, t, s, domain)) {
      traj.termination = *why;
      return traj;
    }
    const Eigen::VectorXd k1 = field(x);
    check_finite(k1, x, t);
    const Eigen::VectorXd k2 = field(x + 0.5 * s.h * k1);
    check_finite(k2, x, t);
    const Eigen::VectorXd k3 = field(x + 0.5 * s.h * k2);
    check_finite(k3, x, t);
    const Eigen::VectorXd k4 = field(x + s.h * k3);
    check_finite(k4, x, t);
    x += (s.h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4);
    if (!x.allFinite()) throw NonFiniteState("state became non-finite");
  }
}

}  // namespace

Trajectory rk4_integrate(const VectorField& field, const StateVector& x0,
                         const IntegratorSettings& settings, const Region* domain) {
  return integrate(field, x0, settings, domain, [](Trajectory&, const StateVector&) {});
}

Trajectory simulate(const DynamicsModel& model, const Policy& policy, const StateVector& x0,
                    const IntegratorSettings& settings) {
  const VectorField field = [&](const StateVector& x) { return closed_loop_field(model, policy, x); };
  return integrate(field, x0, settings, model.domain().get(),
                   [&](Trajectory& traj, const StateVector& x) { traj.inputs.push_back(policy(x)); });
}

// ---------------------------------------------------------------------------

QuadratureResult trajectory_quadrature(const Trajectory& traj, const RunningCost& integrand,
                                       const TailSettings& tail) {
  if (traj.size() == 0) throw ModelError("quadrature over an empty trajectory");
  if (traj.termination == Termination::kLeftDomain || traj.termination == Termination::kDiverged) {
    throw TailNotNegligible("trajectory terminated with " + to_string(traj.termination) +
                            "; cost is not finite on the domain");
  }
  const bool with_inputs = !traj.inputs.empty();
  const InputVector no_input;
  std::vector<double> values(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    values[k] = integrand(traj.states[k], with_inputs ? traj.inputs[k] : no_input);
  }
  QuadratureResult out;
  for (std::size_t k = 1; k < traj.size(); ++k) {
    out.integral += 0.5 * (traj.times[k] - traj.times[k - 1]) * (values[k] + values[k - 1]);
  }

  // Exponential extrapolation from the last decade of decay.
  const auto extrapolate = [&]() -> double {
    const double last = values.back();
    if (last == 0.0) return 0.0;
    for (std::size_t k = traj.size() - 1; k-- > 0;) {
      if (values[k] >= 10.0 * last) {
        const double rate = std::log(values[k] / last) / (traj.times.back() - traj.times[k]);
        return last / rate;
      }
    }
    return std::numeric_limits<double>::infinity();
  };

  if (traj.termination == Termination::kMaxTime) {
    if (values.back() > tail.absolute) {
      std::ostringstream os;
      os << "integration stopped at t = " << traj.times.back()
         << " with running cost " << values.back() << " still above " << tail.absolute;
      throw TailNotNegligible(os.str());
    }
    out.tail = extrapolate();
    if (!std::isfinite(out.tail)) out.tail = values.back() * traj.times.back();
  } else if (tail.value) {
    out.tail = std::max(0.0, (*tail.value)(traj.states.back()));
  } else {
    out.tail = extrapolate();
  }
  out.value = out.integral + out.tail;
  out.tail_negligible = std::isfinite(out.tail) &&
                        (out.tail <= tail.relative * out.value || out.tail <= tail.absolute);
  return out;
}

// ---------------------------------------------------------------------------

double bisect_level_crossing(const std::function<double(double)>& scalar, double lo, double hi,
                             double target, double tol) {
  if (!(tol > 0.0)) throw ModelError("bisection tolerance must be positive");
  double flo = scalar(lo) - target;
  const double fhi = scalar(hi) - target;
  if (std::abs(flo) <= tol) return lo;
  if (flo == 0.0 || fhi == 0.0 || (flo < 0.0) == (fhi < 0.0) || !std::isfinite(flo) ||
      !std::isfinite(fhi)) {
    if (fhi == 0.0) return hi;
    std::ostringstream os;
    os << "no sign change of scalar - " << target << " on [" << lo << ", " << hi << "]";
    throw NoBracket(os.str());
  }
  const auto budget = static_cast<int>(std::ceil(std::log2(std::abs(hi - lo) / tol))) + 2;
  for (int it = 0; it < std::max(budget, 1); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = scalar(mid) - target;
    if ((fmid < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fmid;
      if (std::abs(flo) <= tol) return lo;
    } else {
      hi = mid;
    }
  }
  return lo;
}

// ---------------------------------------------------------------------------

SampleGrid grid_sample(std::shared_ptr<const Region> region, const Eigen::VectorXd& spacing) {
  if (!region) throw ModelError("grid over a null region");
  const std::size_t n = region->dim();
  if (static_cast<std::size_t>(spacing.size()) != n) throw DimensionMismatch("grid spacing dimension");
  if (!(spacing.array() > 0.0).all()) throw ModelError("grid spacing must be positive");
  const Box bbox = region->bounding_box();

  std::vector<long long> first(n), count(n);
  double total = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    const double step = spacing[i];
    const auto lo = static_cast<long long>(std::ceil(bbox.lower[i] / step - 1e-9));
    const auto hi = static_cast<long long>(std::floor(bbox.upper[i] / step + 1e-9));
    first[k] = lo;
    count[k] = std::max(0LL, hi - lo + 1);
    total *= static_cast<double>(count[k]);
  }
  if (total > 5e7) throw ModelError("grid too large; increase the spacing");
  const auto lattice = static_cast<std::size_t>(total);

  const auto point_at = [&](std::size_t flat) {
    StateVector x(static_cast<Eigen::Index>(n));
    for (std::size_t k = n; k-- > 0;) {
      const auto c = static_cast<std::size_t>(count[k]);
      const auto idx = static_cast<long long>(flat % c);
      flat /= c;
      const auto i = static_cast<Eigen::Index>(k);
      x[i] = static_cast<double>(first[k] + idx) * spacing[i];
    }
    return x;
  };

  std::vector<char> inside(lattice, 0);
  parallel_for(lattice, [&](std::size_t f) { inside[f] = region->contains(point_at(f)) ? 1 : 0; }, 4096);

  SampleGrid grid;
  grid.spacing = spacing;
  grid.source = region;
  for (std::size_t f = 0; f < lattice; ++f) {
    if (inside[f]) grid.points.push_back(point_at(f));
  }
  if (grid.points.empty()) throw EmptyGrid("no lattice point lies inside " + region->describe());
  return grid;
}

SampleGrid grid_sample(std::shared_ptr<const Region> region, double spacing) {
  if (!region) throw ModelError("grid over a null region");
  return grid_sample(region, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(region->dim()), spacing));
}

}  // namespace iapi

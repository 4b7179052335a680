#include <doctest.h>

#include <cmath>
#include <numbers>

#include "iapi/numerics.hpp"
#include "support.hpp"

using namespace iapi;
using namespace iapi::test;

TEST_CASE("least squares: small cases") {
  auto r = solve_least_squares(Matrix::Identity(2, 2), vec({1, 2}));
  CHECK(r.weights[0] == 1.0);
  CHECK(r.weights[1] == 2.0);
  CHECK(r.residual_norm == 0.0);

  r = solve_least_squares(Matrix::Ones(2, 1), vec({0, 2}));
  CHECK(r.weights[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.residual_norm == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

  Matrix a(3, 2);
  a << 1, 2, 2, 4, 3, 6;
  CHECK_THROWS_AS(solve_least_squares(a, vec({1, 2, 3})), RankDeficient);
  CHECK_THROWS_AS(solve_least_squares(Matrix::Identity(2, 2), vec({1, 2, 3})), DimensionMismatch);
}

TEST_CASE("least squares: exact recovery of an in-span quadratic") {
  const auto basis = quadratic_basis(2);
  Matrix a(21 * 21, 3);
  Eigen::VectorXd b(21 * 21);
  Eigen::Index row = 0;
  for (int i = -10; i <= 10; ++i) {
    for (int j = -10; j <= 10; ++j, ++row) {
      const StateVector x = vec({i / 10.0, j / 10.0});
      a.row(row) = basis->features(x).transpose();
      b[row] = 0.5 * x[0] * x[0] + 1.0 * x[1] * x[1];
    }
  }
  const auto r = solve_least_squares(a, b);
  CHECK(std::abs(r.weights[0] - 0.5) <= 1e-12);
  CHECK(std::abs(r.weights[1]) <= 1e-12);
  CHECK(std::abs(r.weights[2] - 1.0) <= 1e-12);
  CHECK(r.residual_norm <= 1e-12);
}

namespace {

const VectorField decay = [](const StateVector& x) -> Eigen::VectorXd { return -x; };

double terminal_error(double h) {
  IntegratorSettings s;
  s.h = h;
  s.t_max = 1.0;
  const auto traj = rk4_integrate(decay, vec({1.0}), s);
  return std::abs(traj.states.back()[0] - std::exp(-1.0));
}

}  // namespace

TEST_CASE("rk4 accuracy and order") {
  IntegratorSettings s;
  s.h = 0.01;
  s.t_max = 1.0;
  const auto traj = rk4_integrate(decay, vec({1.0}), s);
  CHECK(traj.termination == Termination::kMaxTime);
  CHECK(traj.times.back() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(traj.states.back()[0] - 0.36787944117144233) <= 1e-8);

  const double ratio = terminal_error(0.02) / terminal_error(0.01);
  CHECK(ratio >= 14.0);
  CHECK(ratio <= 20.0);
}

TEST_CASE("rk4 stop conditions") {
  const VectorField still = [](const StateVector& x) -> Eigen::VectorXd { return 0.0 * x; };
  IntegratorSettings s;
  s.t_max = 0.5;
  auto traj = rk4_integrate(still, vec({0.3}), s);
  CHECK(traj.termination == Termination::kMaxTime);
  for (const auto& x : traj.states) CHECK(x[0] == 0.3);

  traj = rk4_integrate(decay, vec({1.0}), IntegratorSettings{});
  CHECK(traj.termination == Termination::kReachedOrigin);
  CHECK(traj.states.back().lpNorm<Eigen::Infinity>() <= 1e-4);
  CHECK(traj.times.back() == doctest::Approx(std::log(1e4)).epsilon(1e-3));

  const VectorField grow = [](const StateVector& x) -> Eigen::VectorXd { return x; };
  traj = rk4_integrate(grow, vec({1.0}), IntegratorSettings{});
  CHECK(traj.termination == Termination::kDiverged);

  const Region domain = make_cube(1, 2.0);
  traj = rk4_integrate(grow, vec({1.0}), IntegratorSettings{}, &domain);
  CHECK(traj.termination == Termination::kLeftDomain);

  const VectorField blowup = [](const StateVector& x) -> Eigen::VectorXd {
    return Eigen::VectorXd::Constant(1, std::numeric_limits<double>::quiet_NaN()) + 0.0 * x;
  };
  CHECK_THROWS_AS(rk4_integrate(blowup, vec({1.0}), IntegratorSettings{}), NonFiniteState);
}

TEST_CASE("quadrature") {
  const auto model = scalar_model(1, 1);
  const auto cost = scalar_cost(1, 1);
  const RunningCost r = [&](const StateVector& x, const InputVector& u) { return stage_cost(*cost, x, u); };

  const double p = 1 + std::numbers::sqrt2;
  const Policy lqr = explicit_policy({"-2.414213562373095*x1"}, 1);
  const auto traj = simulate(*model, lqr, vec({1.0}), IntegratorSettings{});
  REQUIRE(traj.inputs.size() == traj.states.size());
  const auto q = trajectory_quadrature(traj, r);
  CHECK(std::abs(q.value - p) <= 1e-4);
  CHECK(q.tail_negligible);

  const RunningCost zero = [](const StateVector&, const InputVector&) { return 0.0; };
  CHECK(trajectory_quadrature(traj, zero).value == 0.0);

  // benchmark system under its optimal policy: J(0.5, 0.5) = V*(0.5, 0.5)
  const auto pm = paper_model();
  const auto pc = paper_cost();
  const auto pt = simulate(*pm, paper_optimal_policy(), vec({0.5, 0.5}), IntegratorSettings{});
  const auto pq = trajectory_quadrature(
      pt, [&](const StateVector& x, const InputVector& u) { return stage_cost(*pc, x, u); });
  CHECK(std::abs(pq.value - 0.375) <= 1e-3);

  // the tail may instead come from a value estimate
  const auto v = paper_optimum();
  const auto pv = trajectory_quadrature(
      pt, [&](const StateVector& x, const InputVector& u) { return stage_cost(*pc, x, u); },
      TailSettings{.value = &v});
  CHECK(pv.tail == v(pt.states.back()));
  CHECK(std::abs(pv.value - 0.375) <= 1e-3);
}

TEST_CASE("quadrature rejects unfinished trajectories") {
  const VectorField grow = [](const StateVector& x) -> Eigen::VectorXd { return x; };
  const RunningCost r = [](const StateVector& x, const InputVector&) { return x.squaredNorm(); };
  const auto diverged = rk4_integrate(grow, vec({1.0}), IntegratorSettings{});
  CHECK_THROWS_AS(trajectory_quadrature(diverged, r), TailNotNegligible);

  const VectorField slow = [](const StateVector& x) -> Eigen::VectorXd { return -0.01 * x; };
  IntegratorSettings s;
  s.t_max = 1.0;
  CHECK_THROWS_AS(trajectory_quadrature(rk4_integrate(slow, vec({1.0}), s), r), TailNotNegligible);
}

TEST_CASE("bisection") {
  const auto sq = [](double r) { return r * r; };
  CHECK(bisect_level_crossing(sq, 0, 1, 0.25, 1e-12) == doctest::Approx(0.5).epsilon(1e-10));

  const auto v = paper_optimum();
  const auto along = [&](double r) { return v(vec({0, r})); };
  const double r = bisect_level_crossing(along, 0, 1, 0.5, 1e-10);
  CHECK(std::abs(r - std::sqrt(0.5)) <= 1e-8);
  CHECK(along(r) <= 0.5);  // inner side

  CHECK_THROWS_AS(bisect_level_crossing([](double) { return 1.0; }, 0, 1, 2.0, 1e-8), NoBracket);
}

TEST_CASE("grid sampling") {
  CHECK(grid_sample(cube(2, 1.0), 1.0).size() == 9);
  const auto g = grid_sample(cube(2, 1.0), 0.01);
  CHECK(g.size() == 40401);
  CHECK(g.points.front() == vec({-1, -1}));
  CHECK(g.points[1][0] == -1.0);
  CHECK(g.points[1][1] == doctest::Approx(-0.99).epsilon(1e-15));

  const auto set = std::make_shared<const Region>(SublevelSet{paper_optimum(), 0.5, cube(2, 1.0)});
  const auto gs = grid_sample(set, 0.01);
  CHECK(gs.size() > 0);
  for (const auto& x : gs.points) CHECK(paper_optimum()(x) <= 0.5);

  const auto again = grid_sample(set, 0.01);
  REQUIRE(again.size() == gs.size());
  for (std::size_t i = 0; i < gs.size(); ++i) CHECK(again.points[i] == gs.points[i]);

  CHECK(grid_sample(cube(2, 1.0), 5.0).size() == 1);  // only the origin
}

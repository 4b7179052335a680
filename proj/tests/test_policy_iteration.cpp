#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "iapi/numerics.hpp"
#include "iapi/policy_iteration.hpp"
#include "support.hpp"

using namespace iapi;
using namespace iapi::test;

namespace {

PIConfig scalar_config() {
  PIConfig c;
  c.model = scalar_model(1, 1);
  c.cost = scalar_cost(1, 1);
  c.basis = quadratic_basis(1);
  c.mu0 = std::make_shared<const Policy>(explicit_policy({"-2*x1"}, 1));
  c.omega0 = cube(1, 1.0);
  c.epsilon = 1e-4;
  c.max_iterations = 8;
  return c;
}

}  // namespace

TEST_CASE("policy evaluation: optimal pair is recovered exactly") {
  const auto grid = grid_sample(cube(2, 1.0), 0.01);
  const auto ev = evaluate_policy_lsq(*paper_model(), *paper_cost(), quadratic_basis(2), paper_optimal_policy(), grid);
  CHECK(std::abs(ev.value.weights()[0] - 0.5) <= 1e-8);
  CHECK(std::abs(ev.value.weights()[1]) <= 1e-8);
  CHECK(std::abs(ev.value.weights()[2] - 1.0) <= 1e-8);
  CHECK(ev.rms_residual <= 1e-10);
  CHECK(ev.positive_definite);
}

TEST_CASE("policy evaluation: scalar Lyapunov solve") {
  const auto grid = grid_sample(cube(1, 1.0), 0.01);
  const auto ev = evaluate_policy_lsq(*scalar_model(1, 1), *scalar_cost(1, 1), quadratic_basis(1),
                                      explicit_policy({"-2*x1"}, 1), grid);
  CHECK(ev.value.weights()[0] == doctest::Approx(2.5).epsilon(1e-12));

  SampleGrid empty;
  CHECK_THROWS_AS(evaluate_policy_lsq(*scalar_model(1, 1), *scalar_cost(1, 1), quadratic_basis(1),
                                      explicit_policy({"-2*x1"}, 1), empty),
                  EmptyGrid);
}

TEST_CASE("policy improvement") {
  const auto model = paper_model();
  const auto mu = improve_policy(model, *paper_cost(), paper_optimum());
  CHECK(mu(vec({0, 0}))[0] == 0.0);
  CHECK(mu(vec({std::numbers::pi / 2, 1}))[0] == doctest::Approx(-1.0).epsilon(1e-15));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 50; ++k) {
    const StateVector x = vec({u(rng), u(rng)});
    CHECK(std::abs(mu(x)[0] + x[1] * std::sin(x[0])) <= 1e-15);
  }

  // one Newton-Kleinman step from w = 2.5 lands on 29/12
  const auto smodel = scalar_model(1, 1);
  const auto scost = scalar_cost(1, 1);
  const auto mu1 = improve_policy(smodel, *scost, ValueFunctionEstimate(quadratic_basis(1), vec({2.5})));
  CHECK(mu1(vec({1}))[0] == -2.5);
  const auto ev = evaluate_policy_lsq(*smodel, *scost, quadratic_basis(1), mu1, grid_sample(cube(1, 1.0), 0.01));
  CHECK(ev.value.weights()[0] == doctest::Approx(29.0 / 12.0).epsilon(1e-12));
}

TEST_CASE("policy distance") {
  const auto grid = grid_sample(cube(2, 1.0), 0.01);
  const Policy zero = explicit_policy({"0"}, 2);
  CHECK(policy_distance(zero, zero, grid) == 0.0);
  CHECK(std::abs(policy_distance(zero, paper_optimal_policy(), grid) - std::sin(1.0)) <= 1e-12);

  SampleGrid origin;
  origin.points.push_back(vec({0, 0}));
  CHECK(policy_distance(zero, paper_optimal_policy(), origin) == 0.0);
}

TEST_CASE("hamiltonian and HJB residual") {
  const auto model = paper_model();
  const auto cost = paper_cost();
  const StateVector x = vec({0.5, 0.5});
  CHECK(hamiltonian(*model, *cost, x, vec({0.3}), vec({0, 0})) == stage_cost(*cost, x, vec({0.3})));
  CHECK(hamiltonian(*model, *cost, vec({0, 0}), vec({0}), vec({3, -2})) == 0.0);
  const double s = std::sin(0.5);
  CHECK(hamiltonian(*model, *cost, x, vec({0}), vec({1, 1})) ==
        doctest::Approx(0.5 + (-0.5 + 0.25 * s * s)).epsilon(1e-15));

  CHECK(hjb_residual(*model, *cost, paper_optimum(), vec({0, 0})) == 0.0);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 100; ++k) {
    CHECK(std::abs(hjb_residual(*model, *cost, paper_optimum(), vec({u(rng), u(rng)}))) <= 1e-12);
  }

  // V = x1^2 + x2^2 at (1, 0): Q = 1, grad V = (2, 0), f = (-1, -1/2 + 0), g = (0, sin 1)
  const ValueFunctionEstimate round(quadratic_basis(2), vec({1, 0, 1}));
  CHECK(hjb_residual(*model, *cost, round, vec({1, 0})) == doctest::Approx(1.0 - 2.0).epsilon(1e-15));

  CHECK(hjb_rms(*model, *cost, paper_optimum(), grid_sample(cube(2, 1.0), 0.05)) <= 1e-12);
}

TEST_CASE("run_pi: scalar LQR follows Newton-Kleinman") {
  const auto h = run_pi(scalar_config());
  REQUIRE(h.converged);
  CHECK(h.iterations.size() <= 8);
  double p = 2.5;  // (1 + k^2) / (2 (k - 1)) for mu = -k x
  for (const auto& rec : h.iterations) {
    CHECK(std::abs(rec.value.weights()[0] - p) <= 1e-10);
    p = (1 + p * p) / (2 * (p - 1));
  }
  CHECK(std::abs(h.final().value.weights()[0] - (1 + std::numbers::sqrt2)) <= 1e-8);
  for (std::size_t i = 1; i < h.iterations.size(); ++i) {
    CHECK(*h.iterations[i].radius <= *h.iterations[i - 1].radius);
  }
}

TEST_CASE("run_pi: epsilon = inf stops after one iteration") {
  auto c = scalar_config();
  c.epsilon = std::numeric_limits<double>::infinity();
  const auto h = run_pi(c);
  CHECK(h.converged);
  CHECK(h.iterations.size() == 1);
}

TEST_CASE("run_pi: max_iterations without convergence") {
  auto c = scalar_config();
  c.epsilon = 1e-300;
  c.max_iterations = 3;
  const auto h = run_pi(c);
  CHECK_FALSE(h.converged);
  CHECK(h.iterations.size() == 3);
}

TEST_CASE("run_pi: gate rejects a non-admissible initial policy") {
  auto c = scalar_config();
  c.mu0 = std::make_shared<const Policy>(explicit_policy({"-0.5*x1"}, 1));
  CHECK_THROWS_AS(run_pi(c), AdmissibilityCheckFailed);
  c.gate.enabled = false;
  CHECK_THROWS_AS(run_pi(c), RegionCollapsed);  // V = -1.25 x^2
}

TEST_CASE("run_pi: benchmark system") {
  PIConfig c;
  c.model = paper_model();
  c.cost = paper_cost();
  c.basis = quadratic_basis(2);
  c.mu0 = std::make_shared<const Policy>(explicit_policy({"0"}, 2));
  c.omega0 = cube(2, 1.0);
  c.epsilon = 1e-6;
  c.max_iterations = 10;
  c.spacing = 0.02;
  const auto h = run_pi(c);
  REQUIRE(h.converged);
  const auto& w = h.final().value.weights();
  CHECK(std::abs(w[0] - 0.5) <= 1e-6);
  CHECK(std::abs(w[1]) <= 1e-6);
  CHECK(std::abs(w[2] - 1.0) <= 1e-6);
  for (std::size_t i = 0; i < h.iterations.size(); ++i) {
    const auto& rec = h.iterations[i];
    CHECK(rec.positive_definite);
    REQUIRE(rec.region->sublevel());
    CHECK(rec.region->sublevel()->level == *rec.radius);
    if (i > 0) {
      CHECK(rec.radius_monotone);
      CHECK(rec.next_grid_points <= h.iterations[i - 1].next_grid_points);
    }
  }
}

TEST_CASE("run_pi: frozen mode keeps omega0") {
  PIConfig c = scalar_config();
  c.mode = RegionMode::kFrozen;
  const auto h = run_pi(c);
  for (const auto& rec : h.iterations) {
    CHECK_FALSE(rec.radius.has_value());
    CHECK(rec.region == c.omega0);
  }
}

TEST_CASE("run_pi: enlarge mode") {
  PIConfig c = scalar_config();
  c.mode = RegionMode::kEnlarge;
  c.upsilon = cube(1, 2.0);
  const auto h = run_pi(c);
  REQUIRE(h.converged);
  // alpha* = p * 2^2 on the larger box
  CHECK(std::abs(*h.final().radius - 4 * h.final().value.weights()[0]) <= 1e-6);

  c.upsilon.reset();
  CHECK_THROWS_AS(run_pi(c), ModelError);
}

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "iapi/numerics.hpp"
#include "iapi/policy_iteration.hpp"
#include "iapi/verify.hpp"
#include "support.hpp"

using namespace iapi;
using namespace iapi::test;

namespace {

VerifySettings fast() {
  VerifySettings s;
  s.integrator.h = 2e-3;
  return s;
}

std::shared_ptr<const Region> optimum_set(double level) {
  return std::make_shared<const Region>(SublevelSet{paper_optimum(), level, cube(2, 1.0)});
}

PIHistory history_of(std::vector<Eigen::VectorXd> weights) {
  PIHistory h;
  h.omega0 = cube(2, 1.0);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const ValueFunctionEstimate v(quadratic_basis(2), weights[i]);
    h.iterations.push_back(IterationRecord{.index = i, .value = v, .region = h.omega0});
  }
  return h;
}

}  // namespace

TEST_CASE("admissibility") {
  const auto model = paper_model();
  const auto cost = paper_cost();
  const auto ok = check_admissible(*model, *cost, paper_optimal_policy(), *cube(2, 1.0), 40, fast());
  CHECK(ok.passed);
  CHECK(ok.tested > 40);
  CHECK(ok.failures == 0);

  const auto bad = check_admissible(*model, *cost, explicit_policy({"3*x2*sin(x1)"}, 2), *cube(2, 1.0), 40, fast());
  CHECK_FALSE(bad.passed);
  CHECK(bad.failures > 0);
  CHECK(bad.worst.measured > 1.0);
  CHECK(bad.worst.state.norm() > 0.0);
  CHECK_FALSE(bad.worst.note.empty());

  // the witness reproduces by re-simulation
  const auto traj = simulate(*model, explicit_policy({"3*x2*sin(x1)"}, 2), bad.worst.state, fast().integrator);
  CHECK(traj.termination != Termination::kReachedOrigin);
}

TEST_CASE("admissibility: origin-only region passes trivially") {
  const Region tiny(Ball{2, 1e-5, Norm::kInfinity});
  VerifySettings s = fast();
  s.interior_per_axis = 1;
  CHECK(check_admissible(*paper_model(), *paper_cost(), explicit_policy({"3*x2*sin(x1)"}, 2), tiny, 8, s).passed);
}

TEST_CASE("invariance") {
  const auto model = paper_model();
  const auto ok = check_invariance(*model, paper_optimal_policy(), *optimum_set(0.5), 72, fast());
  CHECK(ok.passed);
  CHECK(ok.tested == 72);
  CHECK(ok.worst.measured <= 1.0 + 1e-3);
  CHECK(ok.worst.measured >= 1.0 - 1e-6);  // the start point attains the maximum

  const auto bad = check_invariance(*model, explicit_policy({"3*x2*sin(x1)"}, 2), *optimum_set(0.5), 72, fast());
  CHECK_FALSE(bad.passed);
  CHECK(bad.worst.measured > 1.0 + 1e-3);

  CHECK_THROWS_AS(check_invariance(*model, paper_optimal_policy(), *cube(2, 1.0), 8), ModelError);
}

TEST_CASE("lyapunov decrease") {
  const auto grid = grid_sample(cube(2, 1.0), 0.05);
  const auto ok = check_lyapunov_decrease(*paper_model(), *paper_cost(), paper_optimum(), paper_optimal_policy(), grid);
  CHECK(ok.passed);
  CHECK(std::abs(ok.worst.measured) <= 1e-12);

  const auto bad =
      check_lyapunov_decrease(*paper_model(), *paper_cost(), paper_optimum(), explicit_policy({"3*x2*sin(x1)"}, 2), grid);
  CHECK_FALSE(bad.passed);
  CHECK(bad.failures > 0);
}

TEST_CASE("value against cost") {
  const auto model = paper_model();
  const auto cost = paper_cost();
  const auto ok = check_value_against_cost(*model, *cost, paper_optimum(), paper_optimal_policy(),
                                           {vec({0.5, 0.5}), vec({0, 0}), vec({-0.3, 0.8})});
  CHECK(ok.passed);
  CHECK(ok.worst.measured <= 1e-3);

  const double p = 1 + std::numbers::sqrt2;
  const ValueFunctionEstimate v(quadratic_basis(1), vec({p}));
  const auto lqr = check_value_against_cost(*scalar_model(1, 1), *scalar_cost(1, 1), v,
                                            explicit_policy({"-2.414213562373095*x1"}, 1), {vec({1})});
  CHECK(lqr.passed);

  const ValueFunctionEstimate off(quadratic_basis(2), vec({0.6, 0, 1}));
  const auto bad = check_value_against_cost(*model, *cost, off, paper_optimal_policy(), {vec({0.9, 0})});
  CHECK_FALSE(bad.passed);
}

TEST_CASE("monotone values") {
  const auto grid = grid_sample(cube(2, 1.0), 0.1);
  CHECK(check_monotone_values(history_of({vec({0.5, 0, 1})}), grid).passed);
  CHECK(check_monotone_values(history_of({vec({0.7, 0, 1.2}), vec({0.5, 0, 1})}), grid).passed);

  const auto bad = check_monotone_values(history_of({vec({0.5, 0, 1}), vec({0.5, 0, 1.5})}), grid);
  CHECK_FALSE(bad.passed);
  CHECK(bad.worst.state.norm() > 0.0);

  const auto neg = check_monotone_values(history_of({vec({0.5, 0, 1}), vec({-0.5, 0, 1})}), grid);
  CHECK_FALSE(neg.passed);
}

TEST_CASE("monotone radii") {
  auto h = history_of({vec({0.7, 0, 1.2}), vec({0.5, 0, 1})});
  h.iterations[0].radius = 0.7;
  h.iterations[1].radius = 0.5;
  CHECK(check_monotone_radii(h).passed);
  h.iterations[1].radius = 0.8;
  CHECK_FALSE(check_monotone_radii(h).passed);
}

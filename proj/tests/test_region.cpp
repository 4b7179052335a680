#include <doctest.h>

#include <cmath>

#include "iapi/numerics.hpp"
#include "iapi/region.hpp"
#include "support.hpp"

using namespace iapi;
using namespace iapi::test;

namespace {

std::shared_ptr<const Region> ellipse(double level) {
  return std::make_shared<const Region>(SublevelSet{paper_optimum(), level, cube(2, 1.0)});
}

}  // namespace

TEST_CASE("box boundary samples") {
  const auto s = boundary_samples(*cube(2, 1.0), 8);
  CHECK(s.points.size() == 32);
  for (const auto& x : s.points) CHECK(x.lpNorm<Eigen::Infinity>() == 1.0);

  const auto s3 = boundary_samples(*cube(3, 1.0), 4);
  CHECK(s3.points.size() == 6 * 16);
  for (const auto& x : s3.points) CHECK(x.lpNorm<Eigen::Infinity>() == 1.0);

  CHECK(boundary_samples(*cube(1, 1.0), 8).points.size() == 2);
}

TEST_CASE("sublevel ray extents") {
  const auto e = ellipse(0.5);
  CHECK(std::abs(ray_extent(*e, vec({1, 0})) - 1.0) <= 1e-8);
  CHECK(std::abs(ray_extent(*e, vec({0, 1})) - std::sqrt(0.5)) <= 1e-8);

  const auto s = boundary_samples(*e, 720);
  CHECK(s.points.size() == 720);
  for (const auto& x : s.points) CHECK(std::abs(paper_optimum()(x) - 0.5) <= 1e-8);

  // level 1 reaches beyond the unit box along x1
  const Region wide(SublevelSet{paper_optimum(), 1.0, cube(2, 1.0)});
  CHECK_THROWS_AS(ray_extent(wide, vec({1, 0})), RayEscapedParent);

  // parentless sublevel sets are found by outward search
  const Region free(SublevelSet{paper_optimum(), 2.0, nullptr});
  CHECK(std::abs(ray_extent(free, vec({1, 0})) - 2.0) <= 1e-8);
}

TEST_CASE("min on boundary") {
  const auto box = cube(2, 1.0);
  const auto s = boundary_samples(*box, boundary_count(*box));
  CHECK(std::abs(min_on_boundary(paper_optimum(), s) - 0.5) <= 1e-6);

  const ValueFunctionEstimate round(quadratic_basis(2), vec({1, 0, 1}));
  CHECK(std::abs(min_on_boundary(round, s) - 1.0) <= 1e-6);

  // minimizer off the sample lattice is recovered by golden-section refinement
  const ValueFunctionEstimate skew(quadratic_basis(2), vec({1, 0.7, 1}));
  const double c = min_on_boundary(skew, boundary_samples(*box, 7));
  CHECK(std::abs(c - (1.0 - 0.49 / 4)) <= 1e-8);

  const auto e = ellipse(0.5);
  CHECK(std::abs(min_on_boundary(paper_optimum(), boundary_samples(*e, 360)) - 0.5) <= 1e-8);

  const ValueFunctionEstimate flat(quadratic_basis(2), vec({1, 0, 0}));
  CHECK_THROWS_AS(min_on_boundary(flat, s), NonPositiveMinimum);
}

TEST_CASE("update region") {
  const auto up = update_region(paper_optimum(), cube(2, 1.0));
  CHECK(std::abs(up.level - 0.5) <= 1e-6);
  REQUIRE(up.region->sublevel());
  CHECK(up.region->contains(vec({0, 0})));

  const auto again = update_region(paper_optimum(), up.region);
  CHECK(std::abs(again.level - up.level) <= 1e-8);

  const ValueFunctionEstimate flat(quadratic_basis(2), vec({1, 0, 0}));
  CHECK_THROWS_AS(update_region(flat, cube(2, 1.0)), RegionCollapsed);

  // nested by construction
  const auto g = grid_sample(up.region, 0.05);
  for (const auto& x : g.points) CHECK(cube(2, 1.0)->contains(x));
}

TEST_CASE("enlarge region") {
  const auto omega = cube(2, 1.0);
  const auto en = enlarge_region(paper_optimum(), omega, cube(2, 2.0));
  CHECK(std::abs(en.alpha - 2.0) <= 1e-6);
  CHECK(std::abs(en.c_star - 0.5) <= 1e-6);
  CHECK(en.alpha >= en.c_star);

  const auto same = enlarge_region(paper_optimum(), omega, omega);
  const auto up = update_region(paper_optimum(), omega);
  CHECK(same.alpha == up.level);

  CHECK_THROWS_AS(enlarge_region(paper_optimum(), omega, cube(2, 0.5)), ContainmentViolated);
}

TEST_CASE("boundary polylines") {
  const auto box = boundary_polyline(*cube(2, 1.0), 4);
  REQUIRE(box.size() == 17);
  CHECK(box.front() == box.back());
  CHECK(box.front() == vec({-1, -1}));
  CHECK(box[1] == vec({-0.5, -1}));  // counterclockwise: along the bottom edge first

  const auto e = boundary_polyline(*ellipse(0.5), 90);
  REQUIRE(e.size() == 91);
  double signed_area = 0.0;
  for (std::size_t k = 0; k + 1 < e.size(); ++k) {
    CHECK(std::abs(e[k][0] * e[k][0] + e[k][1] * e[k][1] / 0.5 - 1.0) <= 1e-7);
    signed_area += e[k][0] * e[k + 1][1] - e[k + 1][0] * e[k][1];
  }
  CHECK(signed_area > 0.0);

  CHECK_THROWS_AS(boundary_polyline(*cube(3, 1.0), 4), UnsupportedDimension);
}

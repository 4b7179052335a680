#pragma once

// Invariant admissible region update: boundary sampling of boxes, balls and
// sublevel sets, minimization of a value function over a boundary, and the
// resulting nested sublevel-set regions.

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "iapi/model.hpp"

namespace iapi {

struct BoundarySettings {
  double tol_boundary = 1e-8;
  double golden_tol = 1e-10;
  double c_floor = 1e-6;
  /// Boundary resolution used by update_region / enlarge_region: number of
  /// rays for round regions; boxes get the same total spread over their faces.
  std::size_t rays = 720;
};

enum class BoundaryMethod { kBoxEdges, kRadialBisection };

struct BoundarySampleSet {
  std::vector<StateVector> points;
  BoundaryMethod method = BoundaryMethod::kBoxEdges;

  /// Closed-curve parameterization (2-D only): points[k] == at(params[k]),
  /// `at` is periodic with `period`. Empty `at` when unavailable.
  std::vector<double> params;
  double period = 0.0;
  std::function<StateVector(double)> at;

  std::size_t count() const noexcept { return points.size(); }
};

/// Distance from the origin to the region boundary along `dir` (regions are
/// star-shaped about the origin). Throws RayEscapedParent for sublevel sets
/// whose level is not reached inside the parent.
double ray_extent(const Region& region, const StateVector& dir, const BoundarySettings& settings = {});

/// Box: `count` samples per edge (2-D, counterclockwise) or per axis on each
/// face (n >= 3). Balls and sublevel sets: `count` rays from the origin.
BoundarySampleSet boundary_samples(const Region& region, std::size_t count,
                                   const BoundarySettings& settings = {});

/// The per-region sample count that spreads `settings.rays` points over the
/// boundary.
std::size_t boundary_count(const Region& region, const BoundarySettings& settings = {});

/// min of v over the boundary samples, refined by golden-section search along
/// the boundary parameterization around discrete local minima. Throws
/// NonPositiveMinimum when the result is <= c_floor.
double min_on_boundary(const ValueFunctionEstimate& v, const BoundarySampleSet& boundary,
                       const BoundarySettings& settings = {});

struct RegionUpdate {
  std::shared_ptr<const Region> region;
  double level = 0.0;
};

/// c* = min{v(x) : x on the boundary of omega}; next region {v <= c*} inside
/// omega. Throws RegionCollapsed when c* <= c_floor.
RegionUpdate update_region(const ValueFunctionEstimate& v, std::shared_ptr<const Region> omega,
                           const BoundarySettings& settings = {});

struct Enlargement {
  std::shared_ptr<const Region> region;
  double alpha = 0.0;   // min of v over the boundary of upsilon
  double c_star = 0.0;  // min of v over the boundary of omega
};

/// Same construction over a user-supplied superset upsilon of omega. Throws
/// ContainmentViolated if omega's boundary samples are not inside upsilon or
/// if alpha < c*.
Enlargement enlarge_region(const ValueFunctionEstimate& v, std::shared_ptr<const Region> omega,
                           std::shared_ptr<const Region> upsilon,
                           const BoundarySettings& settings = {});

/// Closed counterclockwise outline of a 2-D region (first point repeated at
/// the end). Throws UnsupportedDimension for n != 2.
std::vector<StateVector> boundary_polyline(const Region& region, std::size_t count,
                                           const BoundarySettings& settings = {});

}  // namespace iapi

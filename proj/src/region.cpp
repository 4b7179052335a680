#include "iapi/region.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numbers>
#include <sstream>

#include "iapi/numerics.hpp"

namespace iapi {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

StateVector unit2(double angle) { return (StateVector(2) << std::cos(angle), std::sin(angle)).finished(); }

double radical_inverse(std::size_t index, unsigned base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

// Axis directions followed by Halton points pushed through Box-Muller.
std::vector<StateVector> direction_set(std::size_t n, std::size_t count) {
  static constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  std::vector<StateVector> dirs;
  const auto dim = static_cast<Eigen::Index>(n);
  for (Eigen::Index k = 0; k < dim && dirs.size() < count; ++k) {
    StateVector e = StateVector::Zero(dim);
    e[k] = 1.0;
    dirs.push_back(e);
    if (dirs.size() < count) dirs.push_back(-e);
  }
  const std::size_t coords = n + (n % 2);
  if (coords > std::size(kPrimes)) throw UnsupportedDimension("direction set limited to n <= 16");
  for (std::size_t i = 1; dirs.size() < count; ++i) {
    std::vector<double> gauss(coords);
    for (std::size_t c = 0; c < coords; c += 2) {
      const double u1 = std::max(radical_inverse(i, kPrimes[c]), 1e-300);
      const double u2 = radical_inverse(i, kPrimes[c + 1]);
      const double rad = std::sqrt(-2.0 * std::log(u1));
      gauss[c] = rad * std::cos(kTwoPi * u2);
      gauss[c + 1] = rad * std::sin(kTwoPi * u2);
    }
    StateVector d(dim);
    for (Eigen::Index k = 0; k < dim; ++k) d[k] = gauss[static_cast<std::size_t>(k)];
    const double norm = d.norm();
    if (norm > 1e-12) dirs.push_back(d / norm);
  }
  return dirs;
}

double box_extent(const Box& b, const StateVector& dir) {
  double r = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < dir.size(); ++k) {
    if (dir[k] > 0.0) r = std::min(r, b.upper[k] / dir[k]);
    if (dir[k] < 0.0) r = std::min(r, b.lower[k] / dir[k]);
  }
  return r;
}

double sublevel_extent(const SublevelSet& s, const StateVector& dir, const BoundarySettings& settings) {
  const auto along = [&](double r) { return s.value(r * dir); };
  double hi = 0.0;
  if (s.parent) {
    hi = ray_extent(*s.parent, dir, settings);
    const double at_exit = along(hi);
    if (at_exit < s.level) {
      // Unrefined minima (n >= 3) may undershoot the true boundary minimum.
      const double slack = dir.size() <= 2 ? settings.tol_boundary : 1e-3 * s.level;
      if (at_exit >= s.level - slack) return hi;
      std::ostringstream os;
      os << "level " << s.level << " not reached inside the parent along direction ("
         << dir.transpose() << "); value at the parent boundary is " << at_exit;
      throw RayEscapedParent(os.str());
    }
  } else {
    hi = 1.0;
    while (along(hi) < s.level) {
      hi *= 2.0;
      if (hi > 1e9) throw RayEscapedParent("sublevel set unbounded along a ray");
    }
  }
  return bisect_level_crossing(along, 0.0, hi, s.level, settings.tol_boundary);
}

}  // namespace

double ray_extent(const Region& region, const StateVector& dir, const BoundarySettings& settings) {
  if (static_cast<std::size_t>(dir.size()) != region.dim()) throw DimensionMismatch("ray direction dimension");
  if (const Box* b = region.box()) return box_extent(*b, dir);
  if (const Ball* b = region.ball()) {
    const double norm = b->norm == Norm::kInfinity ? dir.lpNorm<Eigen::Infinity>() : dir.norm();
    return b->radius / norm;
  }
  return sublevel_extent(*region.sublevel(), dir, settings);
}

namespace {

BoundarySampleSet box_boundary(const Box& b, std::size_t count) {
  BoundarySampleSet out;
  out.method = BoundaryMethod::kBoxEdges;
  const Eigen::Index n = b.lower.size();
  if (n == 1) {
    out.points = {b.lower, b.upper};
    return out;
  }
  if (n == 2) {
    const std::array<StateVector, 4> corners{
        (StateVector(2) << b.lower[0], b.lower[1]).finished(),
        (StateVector(2) << b.upper[0], b.lower[1]).finished(),
        (StateVector(2) << b.upper[0], b.upper[1]).finished(),
        (StateVector(2) << b.lower[0], b.upper[1]).finished(),
    };
    const auto per_edge = static_cast<double>(count);
    out.at = [corners](double s) {
      s = std::fmod(s, 4.0);
      if (s < 0.0) s += 4.0;
      const auto edge = std::min<std::size_t>(static_cast<std::size_t>(s), 3);
      const double t = s - static_cast<double>(edge);
      const StateVector& a = corners[edge];
      const StateVector& c = corners[(edge + 1) % 4];
      return StateVector(a + t * (c - a));
    };
    out.period = 4.0;
    for (std::size_t e = 0; e < 4; ++e) {
      for (std::size_t j = 0; j < count; ++j) {
        const double t = static_cast<double>(j) / per_edge;
        const StateVector& a = corners[e];
        const StateVector& c = corners[(e + 1) % 4];
        out.points.push_back(a + t * (c - a));
        out.params.push_back(static_cast<double>(e) + t);
      }
    }
    return out;
  }
  // n >= 3: a count^(n-1) lattice on every face.
  const auto m = static_cast<std::size_t>(n);
  std::size_t face_points = 1;
  for (std::size_t k = 0; k + 1 < m; ++k) face_points *= count;
  for (std::size_t axis = 0; axis < m; ++axis) {
    for (int side = 0; side < 2; ++side) {
      for (std::size_t flat = 0; flat < face_points; ++flat) {
        StateVector x(n);
        std::size_t rest = flat;
        for (std::size_t k = 0; k < m; ++k) {
          const auto i = static_cast<Eigen::Index>(k);
          if (k == axis) {
            x[i] = side == 0 ? b.lower[i] : b.upper[i];
            continue;
          }
          const std::size_t j = rest % count;
          rest /= count;
          const double t = count > 1 ? static_cast<double>(j) / static_cast<double>(count - 1) : 0.5;
          x[i] = b.lower[i] + t * (b.upper[i] - b.lower[i]);
        }
        out.points.push_back(x);
      }
    }
  }
  return out;
}

}  // namespace

BoundarySampleSet boundary_samples(const Region& region, std::size_t count,
                                   const BoundarySettings& settings) {
  if (count < 1) throw ModelError("boundary sample count must be positive");
  const std::size_t n = region.dim();
  if (const Box* b = region.box()) return box_boundary(*b, count);
  if (const Ball* b = region.ball(); b && b->norm == Norm::kInfinity) {
    const auto k = static_cast<Eigen::Index>(n);
    return box_boundary(Box{Eigen::VectorXd::Constant(k, -b->radius), Eigen::VectorXd::Constant(k, b->radius)},
                        count);
  }
  if (const SublevelSet* s = region.sublevel(); s && n == 2 && count < 8) {
    throw ModelError("sublevel boundary needs at least 8 rays");
  }

  BoundarySampleSet out;
  out.method = BoundaryMethod::kRadialBisection;
  // Copy keeps the parameterization valid independently of `region`'s lifetime.
  auto shared = std::make_shared<const Region>(region);
  if (n == 2) {
    out.period = kTwoPi;
    out.at = [shared, settings](double angle) {
      const StateVector d = unit2(angle);
      return StateVector(ray_extent(*shared, d, settings) * d);
    };
    for (std::size_t k = 0; k < count; ++k) {
      const double angle = kTwoPi * static_cast<double>(k) / static_cast<double>(count);
      out.params.push_back(angle);
      out.points.push_back(out.at(angle));
    }
  } else if (n == 1) {
    for (double sign : {-1.0, 1.0}) {
      const StateVector d = StateVector::Constant(1, sign);
      out.points.push_back(ray_extent(*shared, d, settings) * d);
    }
  } else {
    for (const auto& d : direction_set(n, count)) out.points.push_back(ray_extent(*shared, d, settings) * d);
  }
  if (const SublevelSet* s = region.sublevel()) {
    for (const auto& p : out.points) {
      if (!(s->value(p) > 0.0)) throw ModelError("value function is not positive on the sublevel boundary");
    }
  }
  return out;
}

std::size_t boundary_count(const Region& region, const BoundarySettings& settings) {
  const std::size_t n = region.dim();
  const bool boxy = region.box() || (region.ball() && region.ball()->norm == Norm::kInfinity);
  if (!boxy) return std::max<std::size_t>(settings.rays, 8);
  if (n <= 1) return 1;
  if (n == 2) return std::max<std::size_t>(settings.rays / 4, 2);
  const double per_face = static_cast<double>(settings.rays) / static_cast<double>(2 * n);
  return std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(std::pow(per_face, 1.0 / static_cast<double>(n - 1)))));
}

namespace {

double golden_section(const std::function<double(double)>& f, double a, double b, double tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 200 && b - a > tol; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

double min_on_boundary(const ValueFunctionEstimate& v, const BoundarySampleSet& boundary,
                       const BoundarySettings& settings) {
  if (boundary.points.empty()) throw ModelError("empty boundary sample set");
  const std::size_t count = boundary.points.size();
  std::vector<double> values(count);
  for (std::size_t k = 0; k < count; ++k) values[k] = v(boundary.points[k]);
  double best = *std::min_element(values.begin(), values.end());

  if (boundary.at && boundary.params.size() == count && count >= 3) {
    std::vector<std::size_t> minima;
    for (std::size_t k = 0; k < count; ++k) {
      const double prev = values[(k + count - 1) % count];
      const double next = values[(k + 1) % count];
      if (values[k] <= prev && values[k] <= next) minima.push_back(k);
    }
    std::stable_sort(minima.begin(), minima.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    if (minima.size() > 16) minima.resize(16);
    const auto along = [&](double s) { return v(boundary.at(s)); };
    for (std::size_t k : minima) {
      double lo = boundary.params[(k + count - 1) % count];
      double hi = boundary.params[(k + 1) % count];
      const double mid = boundary.params[k];
      if (lo > mid) lo -= boundary.period;
      if (hi < mid) hi += boundary.period;
      const double s = golden_section(along, lo, hi, settings.golden_tol);
      best = std::min(best, along(s));
    }
  }
  if (best <= settings.c_floor) {
    std::ostringstream os;
    os << "boundary minimum " << best << " is not above the floor " << settings.c_floor;
    throw NonPositiveMinimum(os.str());
  }
  return best;
}

RegionUpdate update_region(const ValueFunctionEstimate& v, std::shared_ptr<const Region> omega,
                           const BoundarySettings& settings) {
  if (!omega) throw ModelError("update of a null region");
  const auto boundary = boundary_samples(*omega, boundary_count(*omega, settings), settings);
  double level = 0.0;
  try {
    level = min_on_boundary(v, boundary, settings);
  } catch (const NonPositiveMinimum& e) {
    throw RegionCollapsed(e.what());
  }
  RegionUpdate out;
  out.level = level;
  out.region = std::make_shared<const Region>(SublevelSet{v, level, std::move(omega)});
  return out;
}

Enlargement enlarge_region(const ValueFunctionEstimate& v, std::shared_ptr<const Region> omega,
                           std::shared_ptr<const Region> upsilon, const BoundarySettings& settings) {
  if (!omega || !upsilon) throw ModelError("enlargement with a null region");
  const auto inner = boundary_samples(*omega, boundary_count(*omega, settings), settings);
  for (const auto& p : inner.points) {
    if (!upsilon->contains(p)) {
      std::ostringstream os;
      os << "omega is not inside upsilon: boundary point (" << p.transpose() << ") lies outside "
         << upsilon->describe();
      throw ContainmentViolated(os.str());
    }
  }
  Enlargement out;
  try {
    out.c_star = min_on_boundary(v, inner, settings);
    out.alpha = min_on_boundary(v, boundary_samples(*upsilon, boundary_count(*upsilon, settings), settings),
                                settings);
  } catch (const NonPositiveMinimum& e) {
    throw RegionCollapsed(e.what());
  }
  if (out.alpha < out.c_star - settings.tol_boundary) {
    std::ostringstream os;
    os << "enlarged level " << out.alpha << " is below the standard level " << out.c_star;
    throw ContainmentViolated(os.str());
  }
  out.region = std::make_shared<const Region>(SublevelSet{v, out.alpha, std::move(upsilon)});
  return out;
}

std::vector<StateVector> boundary_polyline(const Region& region, std::size_t count,
                                           const BoundarySettings& settings) {
  if (region.dim() != 2) {
    throw UnsupportedDimension("boundary polylines are 2-D only; region has dimension " +
                               std::to_string(region.dim()));
  }
  auto points = boundary_samples(region, count, settings).points;
  points.push_back(points.front());
  return points;
}

}  // namespace iapi

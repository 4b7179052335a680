#include "iapi/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace iapi {
namespace {

std::span<const double> as_span(const StateVector& x) {
  return {x.data(), static_cast<std::size_t>(x.size())};
}

void require_dim(const StateVector& x, std::size_t n, const char* what) {
  if (static_cast<std::size_t>(x.size()) != n) {
    throw DimensionMismatch(std::string(what) + ": expected dimension " + std::to_string(n) +
                            ", got " + std::to_string(x.size()));
  }
}

}  // namespace

VectorField expression_field(std::vector<expr::Ast> components) {
  return [components = std::move(components)](const StateVector& x) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(components.size()));
    for (std::size_t i = 0; i < components.size(); ++i) {
      out[static_cast<Eigen::Index>(i)] = components[i].eval(as_span(x));
    }
    return out;
  };
}

MatrixField expression_matrix_field(std::vector<expr::Ast> entries, std::size_t rows,
                                    std::size_t cols) {
  if (entries.size() != rows * cols) {
    throw DimensionMismatch("matrix field needs " + std::to_string(rows * cols) + " entries");
  }
  return [entries = std::move(entries), rows, cols](const StateVector& x) {
    Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            entries[i * cols + j].eval(as_span(x));
      }
    }
    return out;
  };
}

ScalarField expression_scalar(expr::Ast ast) {
  return [ast = std::move(ast)](const StateVector& x) { return ast.eval(as_span(x)); };
}

// ---------------------------------------------------------------------------

DynamicsModel::DynamicsModel(std::size_t state_dim, std::size_t input_dim, VectorField f,
                             MatrixField g, std::shared_ptr<const Region> domain)
    : n_(state_dim), m_(input_dim), f_(std::move(f)), g_(std::move(g)), domain_(std::move(domain)) {
  if (n_ == 0 || m_ == 0) throw ModelError("state and input dimensions must be positive");
  if (domain_ && domain_->dim() != n_) throw DimensionMismatch("domain dimension differs from state dimension");
  const StateVector zero = StateVector::Zero(static_cast<Eigen::Index>(n_));
  const Eigen::VectorXd f0 = drift(zero);
  if (f0.lpNorm<Eigen::Infinity>() > 1e-12) {
    throw ModelError("drift must vanish at the origin, |f(0)| = " +
                     std::to_string(f0.lpNorm<Eigen::Infinity>()));
  }
  input_gain(zero);
  if (domain_ && !domain_->contains(zero)) throw ModelError("domain must contain the origin");
}

Eigen::VectorXd DynamicsModel::drift(const StateVector& x) const {
  require_dim(x, n_, "drift");
  Eigen::VectorXd out = f_(x);
  if (static_cast<std::size_t>(out.size()) != n_) throw DimensionMismatch("f returned wrong dimension");
  return out;
}

Matrix DynamicsModel::input_gain(const StateVector& x) const {
  require_dim(x, n_, "input gain");
  Matrix out = g_(x);
  if (static_cast<std::size_t>(out.rows()) != n_ || static_cast<std::size_t>(out.cols()) != m_) {
    throw DimensionMismatch("g returned wrong shape");
  }
  return out;
}

Eigen::VectorXd DynamicsModel::field(const StateVector& x, const InputVector& u) const {
  require_dim(u, m_, "input");
  return drift(x) + input_gain(x) * u;
}

// ---------------------------------------------------------------------------

CostSpec::CostSpec(ScalarField state_cost, Matrix input_weight)
    : q_(std::move(state_cost)), r_(std::move(input_weight)) {
  if (r_.rows() == 0 || r_.rows() != r_.cols()) throw ModelError("R must be a nonempty square matrix");
  if (!r_.isApprox(r_.transpose(), 1e-12) && (r_ - r_.transpose()).norm() > 1e-12) {
    throw ModelError("R must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(r_);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0) {
    throw ModelError("R must be positive definite");
  }
  Eigen::LLT<Matrix> llt(r_);
  r_inv_ = llt.solve(Matrix::Identity(r_.rows(), r_.cols()));
  r_inv_ = 0.5 * (r_inv_ + r_inv_.transpose()).eval();
}

void CostSpec::check_positive_definite(const std::vector<StateVector>& samples) const {
  for (const auto& x : samples) {
    const double q = q_(x);
    if (x.isZero(0.0)) {
      if (q != 0.0) throw ModelError("Q(0) must be 0, got " + std::to_string(q));
    } else if (!(q > 0.0)) {
      std::ostringstream os;
      os << "Q must be positive away from the origin; Q = " << q << " at x = ("
         << x.transpose() << ")";
      throw ModelError(os.str());
    }
  }
}

double stage_cost(const CostSpec& cost, const StateVector& x, const InputVector& u) {
  if (static_cast<std::size_t>(u.size()) != cost.input_dim()) {
    throw DimensionMismatch("input dimension " + std::to_string(u.size()) + " does not match R");
  }
  return cost.state_cost(x) + u.dot(cost.input_weight() * u);
}

// ---------------------------------------------------------------------------

BasisSet::BasisSet(std::size_t state_dim, std::vector<Exponents> monomials)
    : n_(state_dim), terms_(std::move(monomials)) {
  if (n_ == 0) throw ModelError("basis over zero-dimensional state");
  if (terms_.empty()) throw ModelError("basis must contain at least one feature");
  for (const auto& e : terms_) {
    if (e.size() != n_) throw DimensionMismatch("monomial exponent vector has wrong length");
    unsigned degree = 0;
    for (unsigned k : e) degree += k;
    if (degree < 2) throw ModelError("basis monomials need total degree >= 2");
  }
}

namespace {

void enumerate(std::size_t n, std::size_t k, unsigned remaining, BasisSet::Exponents& current,
               std::vector<BasisSet::Exponents>& out) {
  if (k + 1 == n) {
    current[k] = remaining;
    out.push_back(current);
    return;
  }
  for (unsigned e = remaining + 1; e-- > 0;) {
    current[k] = e;
    enumerate(n, k + 1, remaining - e, current, out);
  }
}

double int_pow(double base, unsigned e) {
  double r = 1.0;
  for (unsigned i = 0; i < e; ++i) r *= base;
  return r;
}

}  // namespace

BasisSet BasisSet::monomials(std::size_t state_dim, unsigned min_degree, unsigned max_degree) {
  if (min_degree < 2) throw ModelError("monomial basis min_degree must be >= 2");
  if (max_degree < min_degree) throw ModelError("monomial basis max_degree < min_degree");
  std::vector<Exponents> terms;
  for (unsigned d = min_degree; d <= max_degree; ++d) {
    Exponents current(state_dim, 0);
    enumerate(state_dim, 0, d, current, terms);
  }
  return BasisSet(state_dim, std::move(terms));
}

std::string BasisSet::term_name(std::size_t j) const {
  std::string name;
  for (std::size_t k = 0; k < n_; ++k) {
    const unsigned e = terms_.at(j)[k];
    if (e == 0) continue;
    if (!name.empty()) name += "*";
    name += "x" + std::to_string(k + 1);
    if (e > 1) name += "^" + std::to_string(e);
  }
  return name;
}

Eigen::VectorXd BasisSet::features(const StateVector& x) const {
  require_dim(x, n_, "basis features");
  Eigen::VectorXd out(static_cast<Eigen::Index>(terms_.size()));
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    double v = 1.0;
    for (std::size_t k = 0; k < n_; ++k) v *= int_pow(x[static_cast<Eigen::Index>(k)], terms_[j][k]);
    out[static_cast<Eigen::Index>(j)] = v;
  }
  return out;
}

Matrix BasisSet::gradients(const StateVector& x) const {
  require_dim(x, n_, "basis gradients");
  Matrix out(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(terms_.size()));
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    const Exponents& e = terms_[j];
    for (std::size_t d = 0; d < n_; ++d) {
      double v = 0.0;
      if (e[d] > 0) {
        v = static_cast<double>(e[d]);
        for (std::size_t k = 0; k < n_; ++k) {
          v *= int_pow(x[static_cast<Eigen::Index>(k)], k == d ? e[k] - 1 : e[k]);
        }
      }
      out(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

ValueFunctionEstimate::ValueFunctionEstimate(std::shared_ptr<const BasisSet> basis,
                                             Eigen::VectorXd weights)
    : basis_(std::move(basis)), weights_(std::move(weights)) {
  if (!basis_) throw ModelError("value function without a basis");
  if (static_cast<std::size_t>(weights_.size()) != basis_->size()) {
    throw DimensionMismatch("weight count " + std::to_string(weights_.size()) +
                            " does not match basis size " + std::to_string(basis_->size()));
  }
  if (!weights_.allFinite()) throw ModelError("value function weights must be finite");
}

double ValueFunctionEstimate::operator()(const StateVector& x) const {
  return basis_->features(x).dot(weights_);
}

StateVector ValueFunctionEstimate::gradient(const StateVector& x) const {
  return basis_->gradients(x) * weights_;
}

double evaluate_value(const ValueFunctionEstimate& v, const StateVector& x) { return v(x); }

StateVector evaluate_value_gradient(const ValueFunctionEstimate& v, const StateVector& x) {
  return v.gradient(x);
}

// ---------------------------------------------------------------------------

Policy::Policy(ExplicitPolicy p) : impl_(std::move(p)) {
  const auto& components = std::get<ExplicitPolicy>(impl_).components;
  if (components.empty()) throw ModelError("explicit policy has no components");
  m_ = components.size();
  const std::size_t n = components.front().dimension();
  for (const auto& c : components) {
    if (c.dimension() != n) throw DimensionMismatch("policy components over different state dimensions");
  }
  const InputVector u0 = (*this)(StateVector::Zero(static_cast<Eigen::Index>(n)));
  if (u0.lpNorm<Eigen::Infinity>() > 1e-12) throw ModelError("policy must vanish at the origin");
}

Policy::Policy(ImprovedPolicy p) : impl_(std::move(p)) {
  const auto& ip = std::get<ImprovedPolicy>(impl_);
  if (!ip.model) throw ModelError("improved policy without a model");
  m_ = ip.model->input_dim();
  if (static_cast<std::size_t>(ip.input_weight_inverse.rows()) != m_) {
    throw DimensionMismatch("R inverse does not match the input dimension");
  }
  if (ip.value.basis().state_dim() != ip.model->state_dim()) {
    throw DimensionMismatch("value basis does not match the state dimension");
  }
}

InputVector Policy::operator()(const StateVector& x) const {
  if (const auto* ep = std::get_if<ExplicitPolicy>(&impl_)) {
    InputVector u(static_cast<Eigen::Index>(ep->components.size()));
    for (std::size_t i = 0; i < ep->components.size(); ++i) {
      u[static_cast<Eigen::Index>(i)] = ep->components[i].eval(as_span(x));
    }
    return u;
  }
  const auto& ip = std::get<ImprovedPolicy>(impl_);
  return -0.5 * ip.input_weight_inverse * (ip.model->input_gain(x).transpose() * ip.value.gradient(x));
}

Eigen::VectorXd closed_loop_field(const DynamicsModel& model, const Policy& policy,
                                  const StateVector& x) {
  // Improved policies share g(x) with the dynamics; evaluate it once.
  if (const auto* ip = policy.improved(); ip && ip->model.get() == &model) {
    const Matrix g = model.input_gain(x);
    return model.drift(x) - 0.5 * g * (ip->input_weight_inverse * (g.transpose() * ip->value.gradient(x)));
  }
  return model.field(x, policy(x));
}

// ---------------------------------------------------------------------------

Region::Region(Box box) : impl_(std::move(box)) {
  const Box& b = std::get<Box>(impl_);
  if (b.lower.size() == 0 || b.lower.size() != b.upper.size()) throw ModelError("malformed box bounds");
  if (!(b.lower.array() < 0.0).all() || !(b.upper.array() > 0.0).all()) {
    throw ModelError("box must contain the origin strictly in its interior");
  }
  dim_ = static_cast<std::size_t>(b.lower.size());
}

Region::Region(Ball ball) : impl_(ball) {
  if (ball.dim == 0 || !(ball.radius > 0.0)) throw ModelError("ball needs dim >= 1 and radius > 0");
  dim_ = ball.dim;
}

Region::Region(SublevelSet set) : impl_(std::move(set)) {
  const SublevelSet& s = std::get<SublevelSet>(impl_);
  if (!(s.level > 0.0) || !std::isfinite(s.level)) throw ModelError("sublevel set needs level c > 0");
  dim_ = s.value.basis().state_dim();
  if (s.parent && s.parent->dim() != dim_) throw DimensionMismatch("sublevel parent dimension differs");
}

bool Region::contains(const StateVector& x) const {
  require_dim(x, dim_, "region membership");
  if (const auto* b = std::get_if<Box>(&impl_)) {
    return (x.array() >= b->lower.array()).all() && (x.array() <= b->upper.array()).all();
  }
  if (const auto* b = std::get_if<Ball>(&impl_)) {
    const double norm = b->norm == Norm::kInfinity ? x.lpNorm<Eigen::Infinity>() : x.norm();
    return norm <= b->radius;
  }
  const auto& s = std::get<SublevelSet>(impl_);
  if (!(s.value(x) <= s.level)) return false;
  return !s.parent || s.parent->contains(x);
}

namespace {

// Distance along unit `dir` at which an unrestricted sublevel set is left.
double unrestricted_extent(const SublevelSet& s, const StateVector& dir) {
  double hi = 1.0;
  while (s.value(hi * dir) <= s.level) {
    hi *= 2.0;
    if (hi > 1e12) throw ModelError("sublevel set is unbounded along a probe direction");
  }
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (s.value(mid * dir) <= s.level ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace

Box Region::bounding_box() const {
  if (const auto* b = std::get_if<Box>(&impl_)) return *b;
  const auto n = static_cast<Eigen::Index>(dim_);
  if (const auto* b = std::get_if<Ball>(&impl_)) {
    return Box{Eigen::VectorXd::Constant(n, -b->radius), Eigen::VectorXd::Constant(n, b->radius)};
  }
  const auto& s = std::get<SublevelSet>(impl_);
  if (s.parent) return s.parent->bounding_box();
  // Probe along axes and, in 2-D, a fan of directions; pad the result.
  std::vector<StateVector> dirs;
  for (Eigen::Index k = 0; k < n; ++k) {
    StateVector e = StateVector::Zero(n);
    e[k] = 1.0;
    dirs.push_back(e);
    dirs.push_back(-e);
  }
  if (n == 2) {
    for (int k = 0; k < 360; ++k) {
      const double a = 2.0 * std::numbers::pi * k / 360.0;
      dirs.push_back((StateVector(2) << std::cos(a), std::sin(a)).finished());
    }
  }
  Eigen::VectorXd extent = Eigen::VectorXd::Zero(n);
  for (const auto& d : dirs) {
    const double r = unrestricted_extent(s, d);
    extent = extent.cwiseMax((r * d).cwiseAbs());
  }
  extent *= 1.1;
  return Box{-extent, extent};
}

std::string Region::describe() const {
  std::ostringstream os;
  if (const auto* b = std::get_if<Box>(&impl_)) {
    os << "box[";
    for (Eigen::Index k = 0; k < b->lower.size(); ++k) {
      os << (k ? " x " : "") << "[" << b->lower[k] << ", " << b->upper[k] << "]";
    }
    os << "]";
  } else if (const auto* b = std::get_if<Ball>(&impl_)) {
    os << "ball(r=" << b->radius << (b->norm == Norm::kInfinity ? ", inf" : ", 2") << ")";
  } else {
    const auto& s = std::get<SublevelSet>(impl_);
    os << "sublevel(c=" << s.level << (s.parent ? ", in " + s.parent->describe() : std::string()) << ")";
  }
  return os.str();
}

Region make_box(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  return Region(Box{lower, upper});
}

Region make_cube(std::size_t n, double half_width) {
  const auto k = static_cast<Eigen::Index>(n);
  return make_box(Eigen::VectorXd::Constant(k, -half_width), Eigen::VectorXd::Constant(k, half_width));
}

}  // namespace iapi

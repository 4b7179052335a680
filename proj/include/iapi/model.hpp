#pragma once

// Core problem types: input-affine dynamics xdot = f(x) + g(x) u, stage cost
// r(x, u) = Q(x) + u'Ru, polynomial value-function estimates, feedback
// policies and the regions the solver works on.

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "iapi/error.hpp"
#include "iapi/expr.hpp"

namespace iapi {

using StateVector = Eigen::VectorXd;
using InputVector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

using VectorField = std::function<Eigen::VectorXd(const StateVector&)>;
using MatrixField = std::function<Matrix(const StateVector&)>;
using ScalarField = std::function<double(const StateVector&)>;

class Region;

/// Wraps a list of parsed expressions as a vector field.
VectorField expression_field(std::vector<expr::Ast> components);
/// Wraps a rows x cols grid of parsed expressions (row-major) as a matrix field.
MatrixField expression_matrix_field(std::vector<expr::Ast> entries, std::size_t rows,
                                    std::size_t cols);
ScalarField expression_scalar(expr::Ast ast);

/// The pair (f, g) together with the feasible domain D. An empty domain means
/// the whole state space.
class DynamicsModel {
 public:
  DynamicsModel(std::size_t state_dim, std::size_t input_dim, VectorField f, MatrixField g,
                std::shared_ptr<const Region> domain = nullptr);

  std::size_t state_dim() const noexcept { return n_; }
  std::size_t input_dim() const noexcept { return m_; }
  const std::shared_ptr<const Region>& domain() const noexcept { return domain_; }

  Eigen::VectorXd drift(const StateVector& x) const;
  Matrix input_gain(const StateVector& x) const;

  /// f(x) + g(x) u.
  Eigen::VectorXd field(const StateVector& x, const InputVector& u) const;

 private:
  std::size_t n_;
  std::size_t m_;
  VectorField f_;
  MatrixField g_;
  std::shared_ptr<const Region> domain_;
};

/// r(x, u) = Q(x) + u'Ru with R symmetric positive definite.
class CostSpec {
 public:
  CostSpec(ScalarField state_cost, Matrix input_weight);

  double state_cost(const StateVector& x) const { return q_(x); }
  const Matrix& input_weight() const noexcept { return r_; }
  const Matrix& input_weight_inverse() const noexcept { return r_inv_; }
  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(r_.rows()); }

  /// Throws ModelError if Q(x) <= 0 at any nonzero sample.
  void check_positive_definite(const std::vector<StateVector>& samples) const;

 private:
  ScalarField q_;
  Matrix r_;
  Matrix r_inv_;
};

double stage_cost(const CostSpec& cost, const StateVector& x, const InputVector& u);

/// Monomial features prod_k x_k^{e_k} of total degree >= 2, so every feature
/// and its gradient vanish at the origin.
class BasisSet {
 public:
  using Exponents = std::vector<unsigned>;

  BasisSet(std::size_t state_dim, std::vector<Exponents> monomials);

  /// All monomials with min_degree <= total degree <= max_degree, graded and
  /// ordered by descending exponent of x1, then x2, ... ({x1^2, x1x2, x2^2}).
  static BasisSet monomials(std::size_t state_dim, unsigned min_degree, unsigned max_degree);

  std::size_t state_dim() const noexcept { return n_; }
  std::size_t size() const noexcept { return terms_.size(); }
  const std::vector<Exponents>& terms() const noexcept { return terms_; }
  std::string term_name(std::size_t j) const;

  Eigen::VectorXd features(const StateVector& x) const;
  /// n x K matrix whose column j is grad phi_j(x).
  Matrix gradients(const StateVector& x) const;

 private:
  std::size_t n_;
  std::vector<Exponents> terms_;
};

/// V(x) = sum_j w_j phi_j(x).
class ValueFunctionEstimate {
 public:
  ValueFunctionEstimate(std::shared_ptr<const BasisSet> basis, Eigen::VectorXd weights);

  const BasisSet& basis() const noexcept { return *basis_; }
  const std::shared_ptr<const BasisSet>& basis_ptr() const noexcept { return basis_; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }

  double operator()(const StateVector& x) const;
  StateVector gradient(const StateVector& x) const;

 private:
  std::shared_ptr<const BasisSet> basis_;
  Eigen::VectorXd weights_;
};

double evaluate_value(const ValueFunctionEstimate& v, const StateVector& x);
StateVector evaluate_value_gradient(const ValueFunctionEstimate& v, const StateVector& x);

struct ExplicitPolicy {
  std::vector<expr::Ast> components;
};

/// mu(x) = -1/2 R^-1 g(x)' grad V(x).
struct ImprovedPolicy {
  std::shared_ptr<const DynamicsModel> model;
  Matrix input_weight_inverse;
  ValueFunctionEstimate value;
};

class Policy {
 public:
  /// Validates mu(0) = 0.
  explicit Policy(ExplicitPolicy p);
  explicit Policy(ImprovedPolicy p);

  std::size_t input_dim() const noexcept { return m_; }
  InputVector operator()(const StateVector& x) const;

  bool is_improved() const noexcept { return std::holds_alternative<ImprovedPolicy>(impl_); }
  const ImprovedPolicy* improved() const noexcept { return std::get_if<ImprovedPolicy>(&impl_); }

 private:
  std::variant<ExplicitPolicy, ImprovedPolicy> impl_;
  std::size_t m_ = 0;
};

Eigen::VectorXd closed_loop_field(const DynamicsModel& model, const Policy& policy,
                                  const StateVector& x);

// ---------------------------------------------------------------------------
// Regions

enum class Norm { kInfinity, kEuclidean };

struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

/// Closed ball about the origin.
struct Ball {
  std::size_t dim = 0;
  double radius = 0.0;
  Norm norm = Norm::kInfinity;
};

/// {x : V(x) <= level} restricted to the parent region (the component that
/// contains the origin). A null parent means no restriction.
struct SublevelSet {
  ValueFunctionEstimate value;
  double level = 0.0;
  std::shared_ptr<const Region> parent;
};

class Region {
 public:
  explicit Region(Box box);
  explicit Region(Ball ball);
  explicit Region(SublevelSet set);

  std::size_t dim() const noexcept { return dim_; }
  bool contains(const StateVector& x) const;

  /// Axis-aligned box enclosing the region.
  Box bounding_box() const;

  const Box* box() const noexcept { return std::get_if<Box>(&impl_); }
  const Ball* ball() const noexcept { return std::get_if<Ball>(&impl_); }
  const SublevelSet* sublevel() const noexcept { return std::get_if<SublevelSet>(&impl_); }

  /// Short human-readable description.
  std::string describe() const;

 private:
  std::variant<Box, Ball, SublevelSet> impl_;
  std::size_t dim_ = 0;
};

inline bool region_contains(const Region& r, const StateVector& x) { return r.contains(x); }

Region make_box(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);
/// The box [-half_width, half_width]^n.
Region make_cube(std::size_t n, double half_width);

}  // namespace iapi

#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "iapi/expr.hpp"
#include "iapi/model.hpp"

namespace iapi::test {

inline StateVector vec(std::initializer_list<double> xs) {
  StateVector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline std::vector<expr::Ast> asts(const std::vector<std::string>& srcs, std::size_t n) {
  std::vector<expr::Ast> out;
  for (const auto& s : srcs) out.push_back(expr::parse(s, n));
  return out;
}

inline std::shared_ptr<const DynamicsModel> paper_model() {
  return std::make_shared<const DynamicsModel>(
      2, 1, expression_field(asts({"-x1 + x2", "-(x1 + x2)/2 + x2*sin(x1)^2/2"}, 2)),
      expression_matrix_field(asts({"0", "sin(x1)"}, 2), 2, 1));
}

inline std::shared_ptr<const CostSpec> paper_cost() {
  return std::make_shared<const CostSpec>(expression_scalar(expr::parse("x1^2 + x2^2", 2)),
                                          Matrix::Identity(1, 1));
}

inline std::shared_ptr<const BasisSet> quadratic_basis(std::size_t n) {
  return std::make_shared<const BasisSet>(BasisSet::monomials(n, 2, 2));
}

inline ValueFunctionEstimate paper_optimum() {
  return ValueFunctionEstimate(quadratic_basis(2), vec({0.5, 0.0, 1.0}));
}

inline Policy explicit_policy(const std::vector<std::string>& srcs, std::size_t n) {
  return Policy(ExplicitPolicy{asts(srcs, n)});
}

inline Policy paper_optimal_policy() { return explicit_policy({"-x2*sin(x1)"}, 2); }

// xdot = a x + b u, r = q x^2 + r u^2
inline std::shared_ptr<const DynamicsModel> scalar_model(double a, double b) {
  return std::make_shared<const DynamicsModel>(
      1, 1, [a](const StateVector& x) -> Eigen::VectorXd { return a * x; },
      [b](const StateVector&) -> Matrix { return Matrix::Constant(1, 1, b); });
}

inline std::shared_ptr<const CostSpec> scalar_cost(double q, double r) {
  return std::make_shared<const CostSpec>([q](const StateVector& x) { return q * x.squaredNorm(); },
                                          Matrix::Constant(1, 1, r));
}

inline std::shared_ptr<const Region> cube(std::size_t n, double half_width) {
  return std::make_shared<const Region>(make_cube(n, half_width));
}

}  // namespace iapi::test

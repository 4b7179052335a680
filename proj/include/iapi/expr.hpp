#pragma once

// Scalar expression language used by problem configs to define dynamics,
// state costs and explicit feedback laws.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | '+' unary | power
//   power   := primary ('^' unary)?            (right associative)
//   primary := number | 'pi' | 'e' | x<k> | func '(' expr ')' | '(' expr ')'
//
// Variables are x1..xn. Functions: sin cos tan exp ln sqrt abs tanh.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iapi/error.hpp"

namespace iapi::expr {

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, const std::string& message)
      : Error("SyntaxError", message + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class UnknownIdentifier : public Error {
 public:
  explicit UnknownIdentifier(const std::string& message) : Error("UnknownIdentifier", message) {}
};

class WrongArity : public Error {
 public:
  explicit WrongArity(const std::string& message) : Error("WrongArity", message) {}
};

class VariableOutOfRange : public Error {
 public:
  explicit VariableOutOfRange(const std::string& message)
      : Error("VariableOutOfRange", message) {}
};

class EvalError : public Error {
 public:
  EvalError(std::size_t node, const std::string& message)
      : Error("EvalError", message), node_(node) {}
  /// Index of the offending node in `Ast::nodes()`.
  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

enum class Op : unsigned char {
  kConst,
  kVar,
  kNeg,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kPow,
  kSin,
  kCos,
  kTan,
  kExp,
  kLn,
  kSqrt,
  kAbs,
  kTanh,
};

struct Node {
  Op op;
  double value = 0.0;      // kConst
  std::size_t var = 0;     // kVar, zero-based
  std::size_t lhs = 0;     // operand / left child
  std::size_t rhs = 0;     // right child
  std::size_t position = 0;  // source offset, for diagnostics
};

/// Immutable parsed expression. Nodes are stored in post-order, the root is
/// the last node. Cheap to copy.
class Ast {
 public:
  Ast() = default;

  std::size_t dimension() const noexcept { return dimension_; }
  const std::string& source() const noexcept { return *source_; }
  std::span<const Node> nodes() const noexcept { return *nodes_; }

  double eval(std::span<const double> x) const;

 private:
  friend Ast parse(std::string_view text, std::size_t n);

  std::shared_ptr<const std::vector<Node>> nodes_;
  std::shared_ptr<const std::string> source_;
  std::size_t dimension_ = 0;
};

/// Parses `text` over variables x1..xn.
Ast parse(std::string_view text, std::size_t n);

/// Evaluates with `x.size() == ast.dimension()`.
inline double eval(const Ast& ast, std::span<const double> x) { return ast.eval(x); }

}  // namespace iapi::expr

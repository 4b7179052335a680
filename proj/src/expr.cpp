#include "iapi/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>
#include <utility>

namespace iapi::expr {
namespace {

constexpr std::size_t kMaxDepth = 200;

struct Function {
  std::string_view name;
  Op op;
};

constexpr std::array<Function, 8> kFunctions{{
    {"sin", Op::kSin},
    {"cos", Op::kCos},
    {"tan", Op::kTan},
    {"exp", Op::kExp},
    {"ln", Op::kLn},
    {"sqrt", Op::kSqrt},
    {"abs", Op::kAbs},
    {"tanh", Op::kTanh},
}};

std::optional<Op> lookup_function(std::string_view name) {
  for (const auto& f : kFunctions) {
    if (f.name == name) return f.op;
  }
  return std::nullopt;
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Parser {
 public:
  Parser(std::string_view text, std::size_t n) : text_(text), n_(n) {}

  std::vector<Node> run() {
    skip_space();
    if (at_end()) throw SyntaxError(pos_, "empty expression");
    expression(0);
    skip_space();
    if (!at_end()) throw SyntaxError(pos_, std::string("unexpected '") + text_[pos_] + "'");
    return std::move(nodes_);
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::size_t push(Node node) {
    nodes_.push_back(node);
    return nodes_.size() - 1;
  }

  std::size_t binary(Op op, std::size_t lhs, std::size_t rhs, std::size_t position) {
    return push(Node{.op = op, .lhs = lhs, .rhs = rhs, .position = position});
  }

  void guard(std::size_t depth) const {
    if (depth > kMaxDepth) throw SyntaxError(pos_, "expression nested too deeply");
  }

  std::size_t expression(std::size_t depth) {
    guard(depth);
    std::size_t lhs = term(depth + 1);
    for (;;) {
      skip_space();
      const char c = peek();
      if (c != '+' && c != '-') return lhs;
      const std::size_t at = pos_++;
      std::size_t rhs = term(depth + 1);
      lhs = binary(c == '+' ? Op::kAdd : Op::kSub, lhs, rhs, at);
    }
  }

  std::size_t term(std::size_t depth) {
    guard(depth);
    std::size_t lhs = unary(depth + 1);
    for (;;) {
      skip_space();
      const char c = peek();
      if (c != '*' && c != '/') return lhs;
      const std::size_t at = pos_++;
      std::size_t rhs = unary(depth + 1);
      lhs = binary(c == '*' ? Op::kMul : Op::kDiv, lhs, rhs, at);
    }
  }

  std::size_t unary(std::size_t depth) {
    guard(depth);
    skip_space();
    const char c = peek();
    if (c == '-' || c == '+') {
      const std::size_t at = pos_++;
      std::size_t operand = unary(depth + 1);
      if (c == '+') return operand;
      return push(Node{.op = Op::kNeg, .lhs = operand, .position = at});
    }
    return power(depth + 1);
  }

  std::size_t power(std::size_t depth) {
    guard(depth);
    std::size_t base = primary(depth + 1);
    skip_space();
    if (peek() != '^') return base;
    const std::size_t at = pos_++;
    std::size_t exponent = unary(depth + 1);
    return binary(Op::kPow, base, exponent, at);
  }

  std::size_t primary(std::size_t depth) {
    guard(depth);
    skip_space();
    if (at_end()) throw SyntaxError(pos_, "unexpected end of input");
    const char c = peek();
    const std::size_t start = pos_;
    if (is_digit(c) || c == '.') return number();
    if (c == '(') {
      ++pos_;
      std::size_t inner = expression(depth + 1);
      expect(')');
      return inner;
    }
    if (is_ident_start(c)) {
      while (!at_end() && is_ident_char(text_[pos_])) ++pos_;
      return identifier(text_.substr(start, pos_ - start), start, depth);
    }
    throw SyntaxError(pos_, std::string("unexpected '") + c + "'");
  }

  void expect(char c) {
    skip_space();
    if (peek() != c) {
      if (at_end()) throw SyntaxError(pos_, std::string("expected '") + c + "' before end of input");
      throw SyntaxError(pos_, std::string("expected '") + c + "'");
    }
    ++pos_;
  }

  std::size_t number() {
    const std::size_t start = pos_;
    while (!at_end() && is_digit(text_[pos_])) ++pos_;
    if (peek() == '.') {
      ++pos_;
      while (!at_end() && is_digit(text_[pos_])) ++pos_;
    }
    if (peek() == 'e' || peek() == 'E') {
      std::size_t save = pos_++;
      if (peek() == '+' || peek() == '-') ++pos_;
      if (!is_digit(peek())) {
        pos_ = save;  // "2e" is 2 followed by the constant e -> rejected below
      } else {
        while (!at_end() && is_digit(text_[pos_])) ++pos_;
      }
    }
    const std::string_view literal = text_.substr(start, pos_ - start);
    if (literal == ".") throw SyntaxError(start, "malformed number");
    double value = 0.0;
    const auto [end, ec] = std::from_chars(literal.data(), literal.data() + literal.size(), value);
    if (ec != std::errc() || end != literal.data() + literal.size() || !std::isfinite(value)) {
      throw SyntaxError(start, "malformed number '" + std::string(literal) + "'");
    }
    if (is_ident_start(peek())) throw SyntaxError(pos_, "identifier directly after number");
    return push(Node{.op = Op::kConst, .value = value, .position = start});
  }

  std::size_t identifier(std::string_view name, std::size_t start, std::size_t depth) {
    if (auto op = lookup_function(name)) {
      skip_space();
      if (peek() != '(') throw WrongArity("function '" + std::string(name) + "' takes 1 argument");
      ++pos_;
      skip_space();
      if (peek() == ')') throw WrongArity("function '" + std::string(name) + "' takes 1 argument, got 0");
      std::size_t arg = expression(depth + 1);
      skip_space();
      if (peek() == ',') {
        throw WrongArity("function '" + std::string(name) + "' takes 1 argument, got more");
      }
      expect(')');
      return push(Node{.op = *op, .lhs = arg, .position = start});
    }
    if (name == "pi") return push(Node{.op = Op::kConst, .value = std::numbers::pi, .position = start});
    if (name == "e") return push(Node{.op = Op::kConst, .value = std::numbers::e, .position = start});
    if (name.size() > 1 && name[0] == 'x') {
      bool digits = true;
      for (char ch : name.substr(1)) digits = digits && is_digit(ch);
      if (digits && name[1] != '0') {
        std::size_t index = 0;
        const auto [end, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), index);
        if (ec != std::errc() || index == 0 || index > n_) {
          throw VariableOutOfRange("variable '" + std::string(name) + "' outside x1..x" +
                                   std::to_string(n_));
        }
        return push(Node{.op = Op::kVar, .var = index - 1, .position = start});
      }
    }
    throw UnknownIdentifier("unknown identifier '" + std::string(name) + "' at position " +
                            std::to_string(start));
  }

  std::string_view text_;
  std::size_t n_;
  std::size_t pos_ = 0;
  std::vector<Node> nodes_;
};

// Integer exponents use binary powering; everything else goes through exp/ln.
double real_power(double base, double exponent, std::size_t node) {
  if (std::nearbyint(exponent) == exponent && std::abs(exponent) <= 1024.0) {
    long long k = static_cast<long long>(exponent);
    const bool invert = k < 0;
    unsigned long long e = static_cast<unsigned long long>(invert ? -k : k);
    if (invert && base == 0.0) throw EvalError(node, "zero raised to a negative power");
    double result = 1.0;
    double b = base;
    while (e != 0) {
      if (e & 1ULL) result *= b;
      b *= b;
      e >>= 1;
    }
    return invert ? 1.0 / result : result;
  }
  if (base > 0.0) return std::exp(exponent * std::log(base));
  if (base == 0.0 && exponent > 0.0) return 0.0;
  throw EvalError(node, "non-integer power of a non-positive base");
}

}  // namespace

Ast parse(std::string_view text, std::size_t n) {
  Parser parser(text, n);
  Ast ast;
  ast.nodes_ = std::make_shared<const std::vector<Node>>(parser.run());
  ast.source_ = std::make_shared<const std::string>(text);
  ast.dimension_ = n;
  return ast;
}

double Ast::eval(std::span<const double> x) const {
  if (!nodes_) throw EvalError(0, "evaluating an empty expression");
  if (x.size() != dimension_) {
    throw DimensionMismatch("expression over " + std::to_string(dimension_) +
                            " variables evaluated at a point of dimension " +
                            std::to_string(x.size()));
  }
  const std::vector<Node>& nodes = *nodes_;
  const auto fail = [&](std::size_t i, const std::string& what) {
    return EvalError(i, what + " at position " + std::to_string(nodes[i].position) + " in '" +
                            *source_ + "'");
  };
  thread_local std::vector<double> values;
  if (values.size() < nodes.size()) values.resize(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& node = nodes[i];
    double v = 0.0;
    switch (node.op) {
      case Op::kConst: v = node.value; break;
      case Op::kVar: v = x[node.var]; break;
      case Op::kNeg: v = -values[node.lhs]; break;
      case Op::kAdd: v = values[node.lhs] + values[node.rhs]; break;
      case Op::kSub: v = values[node.lhs] - values[node.rhs]; break;
      case Op::kMul: v = values[node.lhs] * values[node.rhs]; break;
      case Op::kDiv:
        if (values[node.rhs] == 0.0) throw fail(i, "division by zero");
        v = values[node.lhs] / values[node.rhs];
        break;
      case Op::kPow:
        try {
          v = real_power(values[node.lhs], values[node.rhs], i);
        } catch (const EvalError& e) {
          throw fail(i, e.what());
        }
        break;
      case Op::kSin: v = std::sin(values[node.lhs]); break;
      case Op::kCos: v = std::cos(values[node.lhs]); break;
      case Op::kTan: v = std::tan(values[node.lhs]); break;
      case Op::kExp: v = std::exp(values[node.lhs]); break;
      case Op::kLn:
        if (!(values[node.lhs] > 0.0)) throw fail(i, "ln of a non-positive value");
        v = std::log(values[node.lhs]);
        break;
      case Op::kSqrt:
        if (values[node.lhs] < 0.0) throw fail(i, "sqrt of a negative value");
        v = std::sqrt(values[node.lhs]);
        break;
      case Op::kAbs: v = std::abs(values[node.lhs]); break;
      case Op::kTanh: v = std::tanh(values[node.lhs]); break;
    }
    if (!std::isfinite(v)) throw fail(i, "non-finite intermediate value");
    values[i] = v;
  }
  return values[nodes.size() - 1];
}

}  // namespace iapi::expr

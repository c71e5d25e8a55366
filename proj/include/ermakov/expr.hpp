#pragma once

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "ermakov/errors.hpp"
#include "ermakov/quadrature.hpp"

namespace ermakov::expr {

enum class NodeKind { constant, variable, negate, add, subtract, multiply, divide, power, call };

enum class Func { sin, cos, tan, atan, exp, log, sqrt, tanh, atanh };

inline constexpr std::array<std::string_view, 9> kFuncNames = {
    "sin", "cos", "tan", "atan", "exp", "log", "sqrt", "tanh", "atanh"};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  NodeKind kind = NodeKind::constant;
  double value = 0.0;      // constant
  Func func = Func::sin;   // call
  NodePtr a, b;            // operands: a for unary nodes, a and b for binary
};

namespace detail {

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void print_node(std::string& out, const Node* n, const std::string& var) {
  switch (n->kind) {
    case NodeKind::constant:
      out += format_number(n->value);
      return;
    case NodeKind::variable:
      out += var;
      return;
    case NodeKind::negate:
      out += "(-";
      print_node(out, n->a.get(), var);
      out += ')';
      return;
    case NodeKind::call: {
      out += kFuncNames[static_cast<std::size_t>(n->func)];
      out += '(';
      print_node(out, n->a.get(), var);
      out += ')';
      return;
    }
    default: {
      const char op = n->kind == NodeKind::add        ? '+'
                      : n->kind == NodeKind::subtract ? '-'
                      : n->kind == NodeKind::multiply ? '*'
                      : n->kind == NodeKind::divide   ? '/'
                                                      : '^';
      out += '(';
      print_node(out, n->a.get(), var);
      out += op;
      print_node(out, n->b.get(), var);
      out += ')';
      return;
    }
  }
}

inline std::string node_text(const Node* n, const std::string& var) {
  std::string out;
  print_node(out, n, var);
  return out;
}

[[noreturn]] inline void domain_fail(const std::string& what, const Node* n,
                                     const std::string& var) {
  throw DomainError(what + " in '" + node_text(n, var) + "'");
}

inline double eval_node(const Node* n, double x, const std::string& var) {
  switch (n->kind) {
    case NodeKind::constant:
      return n->value;
    case NodeKind::variable:
      return x;
    case NodeKind::negate:
      return -eval_node(n->a.get(), x, var);
    case NodeKind::add:
      return eval_node(n->a.get(), x, var) + eval_node(n->b.get(), x, var);
    case NodeKind::subtract:
      return eval_node(n->a.get(), x, var) - eval_node(n->b.get(), x, var);
    case NodeKind::multiply: {
      const double r = eval_node(n->a.get(), x, var) * eval_node(n->b.get(), x, var);
      if (!std::isfinite(r)) domain_fail("non-finite product", n, var);
      return r;
    }
    case NodeKind::divide: {
      const double num = eval_node(n->a.get(), x, var);
      const double den = eval_node(n->b.get(), x, var);
      if (den == 0.0) domain_fail("division by zero", n, var);
      const double r = num / den;
      if (!std::isfinite(r)) domain_fail("non-finite quotient", n, var);
      return r;
    }
    case NodeKind::power: {
      const double base = eval_node(n->a.get(), x, var);
      const double e = eval_node(n->b.get(), x, var);
      if (base < 0.0 && e != std::floor(e))
        domain_fail("non-integer power of a negative base", n, var);
      if (base == 0.0 && e < 0.0) domain_fail("zero raised to a negative power", n, var);
      const double r = std::pow(base, e);
      if (!std::isfinite(r)) domain_fail("non-finite power", n, var);
      return r;
    }
    case NodeKind::call: {
      const double arg = eval_node(n->a.get(), x, var);
      double r = 0;
      switch (n->func) {
        case Func::sin: r = std::sin(arg); break;
        case Func::cos: r = std::cos(arg); break;
        case Func::tan: r = std::tan(arg); break;
        case Func::atan: r = std::atan(arg); break;
        case Func::exp: r = std::exp(arg); break;
        case Func::log:
          if (arg <= 0.0) domain_fail("log of a non-positive value", n, var);
          r = std::log(arg);
          break;
        case Func::sqrt:
          if (arg < 0.0) domain_fail("sqrt of a negative value", n, var);
          r = std::sqrt(arg);
          break;
        case Func::tanh: r = std::tanh(arg); break;
        case Func::atanh:
          if (std::abs(arg) >= 1.0) domain_fail("atanh argument outside (-1, 1)", n, var);
          r = std::atanh(arg);
          break;
      }
      if (!std::isfinite(r)) domain_fail("non-finite function value", n, var);
      return r;
    }
  }
  throw Error("corrupt expression node");
}

// --- node constructors with constant folding ---------------------------------

inline NodePtr make_const(double v) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::constant;
  n->value = v;
  return n;
}

inline NodePtr make_var() {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::variable;
  return n;
}

inline bool is_const(const NodePtr& n) { return n->kind == NodeKind::constant; }
inline bool is_const_value(const NodePtr& n, double v) {
  return n->kind == NodeKind::constant && n->value == v;
}

inline NodePtr make_binary(NodeKind kind, NodePtr a, NodePtr b);

inline NodePtr make_neg(NodePtr a) {
  if (is_const(a)) return make_const(-a->value);
  if (a->kind == NodeKind::negate) return a->a;
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::negate;
  n->a = std::move(a);
  return n;
}

inline NodePtr make_add(NodePtr a, NodePtr b) {
  if (is_const(a) && is_const(b)) return make_const(a->value + b->value);
  if (is_const_value(a, 0.0)) return b;
  if (is_const_value(b, 0.0)) return a;
  return make_binary(NodeKind::add, std::move(a), std::move(b));
}

inline NodePtr make_sub(NodePtr a, NodePtr b) {
  if (is_const(a) && is_const(b)) return make_const(a->value - b->value);
  if (is_const_value(b, 0.0)) return a;
  if (is_const_value(a, 0.0)) return make_neg(std::move(b));
  return make_binary(NodeKind::subtract, std::move(a), std::move(b));
}

inline NodePtr make_mul(NodePtr a, NodePtr b) {
  if (is_const(a) && is_const(b)) return make_const(a->value * b->value);
  if (is_const_value(a, 0.0) || is_const_value(b, 0.0)) return make_const(0.0);
  if (is_const_value(a, 1.0)) return b;
  if (is_const_value(b, 1.0)) return a;
  return make_binary(NodeKind::multiply, std::move(a), std::move(b));
}

inline NodePtr make_div(NodePtr a, NodePtr b) {
  if (is_const(a) && is_const(b) && b->value != 0.0) return make_const(a->value / b->value);
  if (is_const_value(a, 0.0) && !is_const_value(b, 0.0)) return make_const(0.0);
  if (is_const_value(b, 1.0)) return a;
  return make_binary(NodeKind::divide, std::move(a), std::move(b));
}

inline NodePtr make_pow(NodePtr a, NodePtr b) {
  if (is_const(a) && is_const(b)) {
    const double base = a->value, e = b->value;
    const bool ok = !(base < 0.0 && e != std::floor(e)) && !(base == 0.0 && e < 0.0);
    if (ok) {
      const double r = std::pow(base, e);
      if (std::isfinite(r)) return make_const(r);
    }
  }
  if (is_const_value(b, 1.0)) return a;
  if (is_const_value(b, 0.0)) return make_const(1.0);
  return make_binary(NodeKind::power, std::move(a), std::move(b));
}

inline NodePtr make_binary(NodeKind kind, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

inline NodePtr make_call(Func f, NodePtr a) {
  if (is_const(a)) {
    // fold only when the literal argument is inside the function's domain
    const double arg = a->value;
    bool ok = true;
    double r = 0;
    switch (f) {
      case Func::sin: r = std::sin(arg); break;
      case Func::cos: r = std::cos(arg); break;
      case Func::tan: r = std::tan(arg); break;
      case Func::atan: r = std::atan(arg); break;
      case Func::exp: r = std::exp(arg); break;
      case Func::log: ok = arg > 0.0; r = ok ? std::log(arg) : 0; break;
      case Func::sqrt: ok = arg >= 0.0; r = ok ? std::sqrt(arg) : 0; break;
      case Func::tanh: r = std::tanh(arg); break;
      case Func::atanh: ok = std::abs(arg) < 1.0; r = ok ? std::atanh(arg) : 0; break;
    }
    if (ok && std::isfinite(r)) return make_const(r);
  }
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::call;
  n->func = f;
  n->a = std::move(a);
  return n;
}

inline NodePtr diff_node(const NodePtr& n) {
  switch (n->kind) {
    case NodeKind::constant:
      return make_const(0.0);
    case NodeKind::variable:
      return make_const(1.0);
    case NodeKind::negate:
      return make_neg(diff_node(n->a));
    case NodeKind::add:
      return make_add(diff_node(n->a), diff_node(n->b));
    case NodeKind::subtract:
      return make_sub(diff_node(n->a), diff_node(n->b));
    case NodeKind::multiply:
      return make_add(make_mul(diff_node(n->a), n->b), make_mul(n->a, diff_node(n->b)));
    case NodeKind::divide:
      return make_div(make_sub(make_mul(diff_node(n->a), n->b), make_mul(n->a, diff_node(n->b))),
                      make_pow(n->b, make_const(2.0)));
    case NodeKind::power: {
      if (is_const(n->b)) {
        const double c = n->b->value;
        return make_mul(make_mul(make_const(c), make_pow(n->a, make_const(c - 1.0))),
                        diff_node(n->a));
      }
      if (is_const(n->a)) {
        return make_mul(make_mul(make_pow(n->a, n->b), make_call(Func::log, n->a)),
                        diff_node(n->b));
      }
      // d(a^b) = a^b * (b' log a + b a'/a)
      return make_mul(make_pow(n->a, n->b),
                      make_add(make_mul(diff_node(n->b), make_call(Func::log, n->a)),
                               make_div(make_mul(n->b, diff_node(n->a)), n->a)));
    }
    case NodeKind::call: {
      const NodePtr da = diff_node(n->a);
      switch (n->func) {
        case Func::sin:
          return make_mul(make_call(Func::cos, n->a), da);
        case Func::cos:
          return make_neg(make_mul(make_call(Func::sin, n->a), da));
        case Func::tan:
          return make_div(da, make_pow(make_call(Func::cos, n->a), make_const(2.0)));
        case Func::atan:
          return make_div(da, make_add(make_const(1.0), make_pow(n->a, make_const(2.0))));
        case Func::exp:
          return make_mul(make_call(Func::exp, n->a), da);
        case Func::log:
          return make_div(da, n->a);
        case Func::sqrt:
          return make_div(da, make_mul(make_const(2.0), make_call(Func::sqrt, n->a)));
        case Func::tanh:
          return make_mul(make_sub(make_const(1.0), make_pow(make_call(Func::tanh, n->a),
                                                             make_const(2.0))),
                          da);
        case Func::atanh:
          return make_div(da, make_sub(make_const(1.0), make_pow(n->a, make_const(2.0))));
      }
      throw Error("corrupt expression node");
    }
  }
  throw Error("corrupt expression node");
}

inline NodePtr substitute_node(const NodePtr& n, const NodePtr& replacement) {
  switch (n->kind) {
    case NodeKind::constant:
      return n;
    case NodeKind::variable:
      return replacement;
    case NodeKind::negate:
      return make_neg(substitute_node(n->a, replacement));
    case NodeKind::call:
      return make_call(n->func, substitute_node(n->a, replacement));
    case NodeKind::add:
      return make_add(substitute_node(n->a, replacement), substitute_node(n->b, replacement));
    case NodeKind::subtract:
      return make_sub(substitute_node(n->a, replacement), substitute_node(n->b, replacement));
    case NodeKind::multiply:
      return make_mul(substitute_node(n->a, replacement), substitute_node(n->b, replacement));
    case NodeKind::divide:
      return make_div(substitute_node(n->a, replacement), substitute_node(n->b, replacement));
    case NodeKind::power:
      return make_pow(substitute_node(n->a, replacement), substitute_node(n->b, replacement));
  }
  throw Error("corrupt expression node");
}

inline std::optional<Func> lookup_func(std::string_view name) {
  for (std::size_t i = 0; i < kFuncNames.size(); ++i)
    if (kFuncNames[i] == name) return static_cast<Func>(i);
  return std::nullopt;
}

}  // namespace detail

/// Immutable single-variable expression. Safe to evaluate from many threads.
class Expression {
 public:
  Expression() = default;
  Expression(NodePtr root, std::string var)
      : root_(std::move(root)), var_(std::move(var)) {}

  bool valid() const noexcept { return root_ != nullptr; }

  double evaluate(double value) const {
    ensure_valid();
    return detail::eval_node(root_.get(), value, var_);
  }
  double operator()(double value) const { return evaluate(value); }

  Expression derivative() const {
    ensure_valid();
    return Expression(detail::diff_node(root_), var_);
  }

  std::string str() const {
    ensure_valid();
    return detail::node_text(root_.get(), var_);
  }

  const std::string& variable_name() const noexcept { return var_; }
  const NodePtr& root() const noexcept { return root_; }

  static Expression number(double v) { return Expression(detail::make_const(v), ""); }
  static Expression symbol(std::string var) {
    return Expression(detail::make_var(), std::move(var));
  }

  friend Expression operator-(const Expression& e) {
    e.ensure_valid();
    return Expression(detail::make_neg(e.root_), e.var_);
  }
  friend Expression operator+(const Expression& a, const Expression& b) {
    return combine(a, b, detail::make_add);
  }
  friend Expression operator-(const Expression& a, const Expression& b) {
    return combine(a, b, detail::make_sub);
  }
  friend Expression operator*(const Expression& a, const Expression& b) {
    return combine(a, b, detail::make_mul);
  }
  friend Expression operator/(const Expression& a, const Expression& b) {
    return combine(a, b, detail::make_div);
  }
  friend Expression pow(const Expression& a, const Expression& b) {
    return combine(a, b, detail::make_pow);
  }
  friend Expression apply(Func f, const Expression& e) {
    e.ensure_valid();
    return Expression(detail::make_call(f, e.root_), e.var_);
  }

 private:
  void ensure_valid() const {
    if (!root_) throw ValidationError("use of an empty Expression");
  }

  template <class Make>
  static Expression combine(const Expression& a, const Expression& b, Make&& make) {
    a.ensure_valid();
    b.ensure_valid();
    std::string var = a.var_;
    if (var.empty())
      var = b.var_;
    else if (!b.var_.empty() && b.var_ != var)
      throw ValidationError("cannot combine expressions in different variables '" + var +
                            "' and '" + b.var_ + "'");
    return Expression(make(a.root_, b.root_), std::move(var));
  }

  NodePtr root_;
  std::string var_;
};

namespace detail {

// Recursive-descent parser.
//   additive        := multiplicative (('+'|'-') multiplicative)*
//   multiplicative  := unary (('*'|'/') unary)*
//   unary           := '-' unary | power
//   power           := primary ('^' unary)?        (right associative)
//   primary         := number | variable | func '(' additive ')' | '(' additive ')'
// No implicit multiplication; "2u" is a syntax error.
class Parser {
 public:
  Parser(std::string_view src, std::string_view var) : src_(src), var_(var) {}

  NodePtr parse() {
    skip_ws();
    if (eof()) throw ParseError("empty expression", pos_);
    NodePtr n = parse_additive();
    skip_ws();
    if (!eof())
      throw ParseError(std::string("unexpected input '") + src_[pos_] + "'", pos_);
    return n;
  }

 private:
  bool eof() const { return pos_ >= src_.size(); }
  char peek() const { return src_[pos_]; }
  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\n' || peek() == '\r'))
      ++pos_;
  }
  bool consume(char c) {
    skip_ws();
    if (!eof() && peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr parse_additive() {
    NodePtr n = parse_multiplicative();
    for (;;) {
      if (consume('+'))
        n = make_add(n, parse_multiplicative());
      else if (consume('-'))
        n = make_sub(n, parse_multiplicative());
      else
        return n;
    }
  }

  NodePtr parse_multiplicative() {
    NodePtr n = parse_unary();
    for (;;) {
      if (consume('*'))
        n = make_mul(n, parse_unary());
      else if (consume('/'))
        n = make_div(n, parse_unary());
      else
        return n;
    }
  }

  NodePtr parse_unary() {
    if (consume('-')) return make_neg(parse_unary());
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (consume('^')) return make_pow(base, parse_unary());
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (eof()) throw ParseError("unexpected end of input", pos_);
    const char c = peek();
    if (c == '(') {
      ++pos_;
      NodePtr n = parse_additive();
      if (!consume(')')) throw ParseError("expected ')'", pos_);
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    if (!eof() && peek() == '.') {
      ++pos_;
      while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    }
    if (pos_ == start || (pos_ == start + 1 && src_[start] == '.'))
      throw ParseError("malformed number", start);
    if (!eof() && (peek() == 'e' || peek() == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (!eof() && (peek() == '+' || peek() == '-')) ++pos_;
      if (eof() || !std::isdigit(static_cast<unsigned char>(peek()))) {
        pos_ = mark;  // 'e' belongs to something else; not a valid exponent here
        throw ParseError("malformed exponent", mark);
      }
      while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    }
    double value = 0;
    const char* first = src_.data() + start;
    const char* last = src_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) throw ParseError("malformed number", start);
    return make_const(value);
  }

  NodePtr parse_identifier() {
    const std::size_t start = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
      ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);
    if (name == var_) return make_var();
    if (auto f = lookup_func(name)) {
      if (!consume('('))
        throw ParseError("expected '(' after function name '" + std::string(name) + "'", pos_);
      NodePtr arg = parse_additive();
      if (!consume(')')) throw ParseError("expected ')'", pos_);
      return make_call(*f, arg);
    }
    throw ParseError("unknown identifier '" + std::string(name) + "'", start);
  }

  std::string_view src_;
  std::string_view var_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parse `src` as an expression in the single free variable `var_name`.
inline Expression parse_expression(std::string_view src, std::string_view var_name) {
  if (var_name.empty()) throw ValidationError("variable name must not be empty");
  if (detail::lookup_func(var_name))
    throw ValidationError("variable name '" + std::string(var_name) +
                          "' collides with a function name");
  detail::Parser parser(src, var_name);
  return Expression(parser.parse(), std::string(var_name));
}

inline double evaluate(const Expression& e, double value) { return e.evaluate(value); }

inline Expression differentiate(const Expression& e) { return e.derivative(); }

inline std::string to_string(const Expression& e) { return e.str(); }

/// Replace the free variable of `e` by `replacement`; the result is an
/// expression in `replacement`'s variable.
inline Expression substitute(const Expression& e, const Expression& replacement) {
  if (!e.valid() || !replacement.valid()) throw ValidationError("use of an empty Expression");
  return Expression(detail::substitute_node(e.root(), replacement.root()),
                    replacement.variable_name());
}

/// Adaptive quadrature of `e` over [a, b] with absolute tolerance `tol`.
/// Antisymmetric under swapping the endpoints; an empty interval is exactly 0.
inline double quad_integral(const Expression& e, double a, double b, double tol) {
  if (!(tol > 0)) throw ValidationError("quad_integral: tolerance must be positive");
  if (a == b) return 0.0;
  quad::Options opt;
  opt.abs_tol = tol;
  return quad::gauss_kronrod([&](double x) { return e.evaluate(x); }, a, b, opt);
}

}  // namespace ermakov::expr

#pragma once

// Arithmetic expressions for user-supplied coefficients and nonlinearities.
//
// Grammar (Pratt parser, lowest to highest binding):
//   expr    := expr ('+' | '-') expr          left associative
//            | expr ('*' | '/') expr          left associative
//            | '-' expr                       unary minus
//            | expr '^' expr                  right associative
//            | number | name | name '(' args ')' | '(' expr ')'
// `-a^b` is `-(a^b)`; the right operand of `^` may itself start with a
// unary minus (`a^-b`). There is no implicit multiplication.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "radphi/error.hpp"

namespace radphi::expr {

enum class Op : std::uint8_t { Num, Var, Neg, Add, Sub, Mul, Div, Pow, Call };
enum class Fn : std::uint8_t { Exp, Ln, Sqrt, Sinh, Asinh, Pow, Min, Max };

struct Node {
  Op op = Op::Num;
  Fn fn = Fn::Exp;
  double value = 0.0;  // Num
  int var = -1;        // Var: index into the declared variable list
  int lhs = -1;        // operand / first argument
  int rhs = -1;        // second operand / argument
};

namespace detail {

struct FnInfo {
  std::string_view name;
  Fn fn;
  int arity;
};

inline constexpr FnInfo kFunctions[] = {
    {"exp", Fn::Exp, 1},   {"ln", Fn::Ln, 1},     {"sqrt", Fn::Sqrt, 1}, {"sinh", Fn::Sinh, 1},
    {"asinh", Fn::Asinh, 1}, {"pow", Fn::Pow, 2}, {"min", Fn::Min, 2},   {"max", Fn::Max, 2},
};

inline const FnInfo* find_function(std::string_view name) {
  for (const auto& f : kFunctions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

inline std::string_view function_name(Fn fn) {
  for (const auto& f : kFunctions) {
    if (f.fn == fn) return f.name;
  }
  return "?";
}

inline double checked_pow(double base, double exponent) {
  if (base > 0.0) return std::pow(base, exponent);
  if (base == 0.0) {
    if (exponent > 0.0) return 0.0;
    if (exponent == 0.0) return 1.0;
    throw EvalError("division by zero: 0 raised to a negative power");
  }
  if (std::isfinite(exponent) && std::trunc(exponent) == exponent) return std::pow(base, exponent);
  throw EvalError("negative base with non-integer exponent");
}

inline double apply_function(Fn fn, double x, double y) {
  switch (fn) {
    case Fn::Exp:
      return std::exp(x);
    case Fn::Ln:
      if (!(x > 0.0)) throw EvalError("ln of non-positive argument");
      return std::log(x);
    case Fn::Sqrt:
      if (x < 0.0) throw EvalError("sqrt of negative argument");
      return std::sqrt(x);
    case Fn::Sinh:
      return std::sinh(x);
    case Fn::Asinh:
      return std::asinh(x);
    case Fn::Pow:
      return checked_pow(x, y);
    case Fn::Min:
      return std::min(x, y);
    case Fn::Max:
      return std::max(x, y);
  }
  return 0.0;
}

inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

/// Immutable, cheaply copyable compiled expression.
///
/// Nodes are stored in post-order so evaluation is a single linear pass over
/// a value stack. Variables are bound positionally, in the order of the
/// declared variable list passed to `parse`.
class Expr {
 public:
  Expr() = default;

  const std::vector<std::string>& variables() const { return *vars_; }
  bool empty() const { return !nodes_ || nodes_->empty(); }

  double operator()(std::span<const double> args) const {
    if (args.size() != vars_->size()) {
      throw EvalError("expected " + std::to_string(vars_->size()) + " bound variables, got " +
                      std::to_string(args.size()));
    }
    return run(args);
  }
  double operator()(double x) const { return (*this)(std::span<const double>(&x, 1)); }
  double operator()(double x, double y) const {
    const double a[2] = {x, y};
    return (*this)(std::span<const double>(a, 2));
  }

  /// Evaluate with named bindings; every declared variable must be bound.
  double eval(const std::map<std::string, double>& bindings) const {
    std::vector<double> args;
    args.reserve(vars_->size());
    for (const auto& name : *vars_) {
      auto it = bindings.find(name);
      if (it == bindings.end()) throw EvalError("missing binding for variable '" + name + "'");
      args.push_back(it->second);
    }
    return run(args);
  }

  /// Canonical text: minimal parentheses when `fully_parenthesized` is false,
  /// every compound subexpression wrapped otherwise. Both re-parse to an
  /// expression that evaluates bit-identically.
  std::string to_string(bool fully_parenthesized = false) const {
    if (empty()) return {};
    return print(root(), fully_parenthesized);
  }

  const std::vector<Node>& nodes() const { return *nodes_; }

 private:
  friend class Parser;

  Expr(std::vector<Node> nodes, std::vector<std::string> vars)
      : nodes_(std::make_shared<const std::vector<Node>>(std::move(nodes))),
        vars_(std::make_shared<const std::vector<std::string>>(std::move(vars))) {}

  int root() const { return static_cast<int>(nodes_->size()) - 1; }

  double run(std::span<const double> args) const {
    // Post-order evaluation; depth never exceeds the node count.
    thread_local std::vector<double> stack;
    stack.clear();
    for (const Node& n : *nodes_) {
      double r = 0.0;
      switch (n.op) {
        case Op::Num:
          r = n.value;
          break;
        case Op::Var:
          r = args[static_cast<std::size_t>(n.var)];
          break;
        case Op::Neg:
          r = -stack.back();
          stack.pop_back();
          break;
        case Op::Call: {
          double y = 0.0;
          if (n.rhs >= 0) {
            y = stack.back();
            stack.pop_back();
          }
          const double x = stack.back();
          stack.pop_back();
          r = detail::apply_function(n.fn, x, y);
          break;
        }
        default: {
          const double y = stack.back();
          stack.pop_back();
          const double x = stack.back();
          stack.pop_back();
          switch (n.op) {
            case Op::Add: r = x + y; break;
            case Op::Sub: r = x - y; break;
            case Op::Mul: r = x * y; break;
            case Op::Div:
              if (y == 0.0) throw EvalError("division by zero");
              r = x / y;
              break;
            case Op::Pow: r = detail::checked_pow(x, y); break;
            default: break;
          }
        }
      }
      if (std::isnan(r)) throw EvalError("expression produced NaN");
      stack.push_back(r);
    }
    return stack.back();
  }

  static int precedence(const Node& n) {
    switch (n.op) {
      case Op::Add:
      case Op::Sub: return 1;
      case Op::Mul:
      case Op::Div: return 2;
      case Op::Neg: return 3;
      case Op::Pow: return 4;
      default: return 5;
    }
  }

  std::string print(int idx, bool full) const {
    const Node& n = (*nodes_)[static_cast<std::size_t>(idx)];
    switch (n.op) {
      case Op::Num: return detail::format_number(n.value);
      case Op::Var: return (*vars_)[static_cast<std::size_t>(n.var)];
      case Op::Call: {
        std::string s(detail::function_name(n.fn));
        s += '(' + print(n.lhs, full);
        if (n.rhs >= 0) s += ", " + print(n.rhs, full);
        return s + ')';
      }
      case Op::Neg: {
        const Node& c = (*nodes_)[static_cast<std::size_t>(n.lhs)];
        const std::string inner = print(n.lhs, full);
        if (full) return "(-" + inner + ')';
        return precedence(c) < precedence(n) ? "-(" + inner + ')' : '-' + inner;
      }
      default: break;
    }
    const Node& l = (*nodes_)[static_cast<std::size_t>(n.lhs)];
    const Node& r = (*nodes_)[static_cast<std::size_t>(n.rhs)];
    const char* sym = n.op == Op::Add ? " + " : n.op == Op::Sub ? " - " : n.op == Op::Mul ? " * "
                      : n.op == Op::Div ? " / " : "^";
    std::string ls = print(n.lhs, full);
    std::string rs = print(n.rhs, full);
    if (full) return '(' + ls + sym + rs + ')';
    const int p = precedence(n);
    const bool right_assoc = n.op == Op::Pow;
    const bool wrap_l = right_assoc ? precedence(l) <= p : precedence(l) < p;
    const bool wrap_r = right_assoc ? precedence(r) < p : precedence(r) <= p;
    if (wrap_l) ls = '(' + ls + ')';
    if (wrap_r) rs = '(' + rs + ')';
    return ls + sym + rs;
  }

  std::shared_ptr<const std::vector<Node>> nodes_;
  std::shared_ptr<const std::vector<std::string>> vars_ =
      std::make_shared<const std::vector<std::string>>();
};

class Parser {
 public:
  Parser(std::string_view text, std::vector<std::string> vars,
         const std::map<std::string, double>* constants)
      : text_(text), vars_(std::move(vars)), constants_(constants) {}

  Expr run() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("empty expression", pos_);
    parse_expr(0);
    skip_ws();
    if (pos_ < text_.size()) throw ParseError("unexpected '" + std::string(1, text_[pos_]) + "'", pos_);
    return Expr(std::move(nodes_), std::move(vars_));
  }

 private:
  struct Binary {
    Op op;
    int lbp;
    int rbp;
  };

  static constexpr int kUnaryBp = 30;

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::optional<Binary> peek_binary() {
    skip_ws();
    if (pos_ >= text_.size()) return std::nullopt;
    switch (text_[pos_]) {
      case '+': return Binary{Op::Add, 10, 11};
      case '-': return Binary{Op::Sub, 10, 11};
      case '*': return Binary{Op::Mul, 20, 21};
      case '/': return Binary{Op::Div, 20, 21};
      case '^': return Binary{Op::Pow, 41, 40};
      default: return std::nullopt;
    }
  }

  int push(Node n) {
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
  }

  // Returns the index of the subtree root. Subtrees are contiguous post-order
  // ranges, so emitting operands before operators keeps the array valid.
  int parse_expr(int min_bp) {
    int lhs = parse_prefix();
    while (true) {
      auto bin = peek_binary();
      if (!bin || bin->lbp < min_bp) break;
      ++pos_;
      const int rhs = parse_expr(bin->rbp);
      Node n;
      n.op = bin->op;
      n.lhs = lhs;
      n.rhs = rhs;
      lhs = push(n);
    }
    return lhs;
  }

  int parse_prefix() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = text_[pos_];
    if (c == '-') {
      ++pos_;
      const int operand = parse_expr(kUnaryBp);
      Node n;
      n.op = Op::Neg;
      n.lhs = operand;
      return push(n);
    }
    if (c == '(') {
      const std::size_t open = pos_;
      ++pos_;
      const int inner = parse_expr(0);
      skip_ws();
      if (pos_ >= text_.size() || text_[pos_] != ')') {
        throw ParseError(pos_ >= text_.size() ? "unclosed '(' opened at position " + std::to_string(open)
                                              : "expected ')'",
                         pos_);
      }
      ++pos_;
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
    throw ParseError("unexpected '" + std::string(1, c) + "'", pos_);
  }

  int parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      const std::size_t s = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      return pos_ - s;
    };
    std::size_t count = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      count += digits();
    }
    if (count == 0) throw ParseError("malformed number", start);
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) throw ParseError("malformed exponent", pos_);
    }
    double v = 0.0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != text_.data() + pos_) {
      throw ParseError("number out of range", start);
    }
    Node n;
    n.op = Op::Num;
    n.value = v;
    return push(n);
  }

  int parse_name() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string name(text_.substr(start, pos_ - start));
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      const auto* info = detail::find_function(name);
      if (!info) throw ParseError("unknown function '" + name + "'", start);
      ++pos_;
      std::vector<int> args;
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == ')') {
        ++pos_;
      } else {
        while (true) {
          args.push_back(parse_expr(0));
          skip_ws();
          if (pos_ >= text_.size()) throw ParseError("unexpected end of input in call to " + name, pos_);
          if (text_[pos_] == ',') {
            ++pos_;
            continue;
          }
          if (text_[pos_] == ')') {
            ++pos_;
            break;
          }
          throw ParseError("expected ',' or ')'", pos_);
        }
      }
      if (static_cast<int>(args.size()) != info->arity) {
        throw ParseError(name + " expects " + std::to_string(info->arity) + " argument(s), got " +
                             std::to_string(args.size()),
                         start);
      }
      Node n;
      n.op = Op::Call;
      n.fn = info->fn;
      n.lhs = args[0];
      n.rhs = args.size() > 1 ? args[1] : -1;
      return push(n);
    }
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i] == name) {
        Node n;
        n.op = Op::Var;
        n.var = static_cast<int>(i);
        return push(n);
      }
    }
    if (constants_) {
      if (auto it = constants_->find(name); it != constants_->end()) {
        Node n;
        n.op = Op::Num;
        n.value = it->second;
        return push(n);
      }
    }
    if (detail::find_function(name)) throw ParseError("function '" + name + "' requires arguments", start);
    throw ParseError("unknown identifier '" + name + "'", start);
  }

  std::string_view text_;
  std::vector<std::string> vars_;
  const std::map<std::string, double>* constants_;
  std::vector<Node> nodes_;
  std::size_t pos_ = 0;
};

/// Parse `text` over the ordered variable list `vars`. Names found in
/// `constants` are folded to literals at parse time.
inline Expr parse(std::string_view text, std::vector<std::string> vars,
                  const std::map<std::string, double>* constants = nullptr) {
  return Parser(text, std::move(vars), constants).run();
}

}  // namespace radphi::expr

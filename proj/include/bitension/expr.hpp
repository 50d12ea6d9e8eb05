#pragma once

// Expression trees for user-supplied chart components.
//
// Grammar (whitespace and newlines are insignificant):
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' ['-'] integer)?
//   primary := number | 'pi' | variable | parameter
//            | function '(' expr ')' | '(' expr ')'
//
// Variables are u1..um. Functions are sin, cos, sqrt and exp. Exponents are
// integer literals only.

#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bitension/error.hpp"

namespace bitension {

using ParamMap = std::map<std::string, double>;

struct Expr {
  enum class Kind { Constant, Pi, Param, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Sqrt, Exp };

  Kind kind = Kind::Constant;
  double value = 0.0;  // Constant
  int index = 0;       // Var: 0-based variable, Pow: exponent
  std::string name;    // Param
  std::vector<Expr> args;

  bool operator==(const Expr&) const = default;

  static Expr constant(double v) { return {Kind::Constant, v, 0, {}, {}}; }
  static Expr pi() { return {Kind::Pi, 0.0, 0, {}, {}}; }
  static Expr param(std::string n) { return {Kind::Param, 0.0, 0, std::move(n), {}}; }
  static Expr var(int i) { return {Kind::Var, 0.0, i, {}, {}}; }
  static Expr unary(Kind k, Expr a) { return {k, 0.0, 0, {}, {std::move(a)}}; }
  static Expr binary(Kind k, Expr a, Expr b) { return {k, 0.0, 0, {}, {std::move(a), std::move(b)}}; }
  static Expr power(Expr a, int k) { return {Kind::Pow, 0.0, k, {}, {std::move(a)}}; }
};

namespace detail {

class ExprParser {
 public:
  ExprParser(std::string_view src, int num_vars, const std::set<std::string>& params)
      : src_(src), num_vars_(num_vars), params_(params) {}

  Expr parse() {
    skip_space();
    Expr e = parse_expr();
    skip_space();
    if (pos_ < src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    int line = 1;
    int col = 1;
    for (std::size_t i = 0; i < pos_ && i < src_.size(); ++i) {
      if (src_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(msg, line, col);
  }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= src_.size()) fail(std::string("expected '") + c + "' before end of expression");
      fail(std::string("expected '") + c + "'");
    }
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = Expr::binary(Expr::Kind::Add, std::move(lhs), parse_term());
      } else if (accept('-')) {
        lhs = Expr::binary(Expr::Kind::Sub, std::move(lhs), parse_term());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = Expr::binary(Expr::Kind::Mul, std::move(lhs), parse_unary());
      } else if (accept('/')) {
        lhs = Expr::binary(Expr::Kind::Div, std::move(lhs), parse_unary());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return Expr::unary(Expr::Kind::Neg, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (!accept('^')) return base;
    skip_space();
    bool negative = accept('-');
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (start == pos_) fail("expected integer exponent");
    int k = 0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, k);
    if (ec != std::errc()) {
      pos_ = start;
      fail("exponent out of range");
    }
    return Expr::power(std::move(base), negative ? -k : k);
  }

  Expr parse_primary() {
    skip_space();
    if (pos_ >= src_.size()) fail("unexpected end of expression");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      const std::size_t exp_start = pos_;
      digits();
      if (exp_start == pos_) pos_ = save;
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (ec != std::errc() || ptr != src_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    return Expr::constant(v);
  }

  Expr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    const std::string id(src_.substr(start, pos_ - start));
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == '(') {
      Expr::Kind kind;
      if (id == "sin") {
        kind = Expr::Kind::Sin;
      } else if (id == "cos") {
        kind = Expr::Kind::Cos;
      } else if (id == "sqrt") {
        kind = Expr::Kind::Sqrt;
      } else if (id == "exp") {
        kind = Expr::Kind::Exp;
      } else {
        pos_ = start;
        fail("unknown function '" + id + "'");
      }
      ++pos_;
      Expr arg = parse_expr();
      expect(')');
      return Expr::unary(kind, std::move(arg));
    }
    if (id == "pi") return Expr::pi();
    if (params_.count(id)) return Expr::param(id);
    if (id.size() > 1 && id[0] == 'u' && id.find_first_not_of("0123456789", 1) == std::string::npos) {
      int k = 0;
      std::from_chars(id.data() + 1, id.data() + id.size(), k);
      if (k < 1 || k > num_vars_) {
        pos_ = start;
        fail("variable '" + id + "' outside u1..u" + std::to_string(num_vars_));
      }
      return Expr::var(k - 1);
    }
    pos_ = start;
    fail("unknown parameter '" + id + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int num_vars_;
  const std::set<std::string>& params_;
};

inline double checked_sqrt(double x) {
  if (!(x > 0.0)) throw DomainError("sqrt of non-positive value " + std::to_string(x));
  return std::sqrt(x);
}

inline double checked_div(double a, double b) {
  if (b == 0.0) throw DomainError("division by zero");
  return a / b;
}

template <typename T>
T checked_sqrt(const T& x) {
  return sqrt(x);
}

template <typename T>
T checked_div(const T& a, const T& b) {
  return a / b;
}

}  // namespace detail

/// Parse an expression over variables u1..u{num_vars} and the given parameter names.
inline Expr parse_expression(std::string_view source, int num_vars,
                             const std::set<std::string>& params = {}) {
  return detail::ExprParser(source, num_vars, params).parse();
}

/// Fully parenthesized text form; parse_expression(print_expression(e)) == e
/// for every tree with non-negative constants.
inline std::string print_expression(const Expr& e) {
  using K = Expr::Kind;
  auto bin = [&](const char* op) {
    return "(" + print_expression(e.args[0]) + " " + op + " " + print_expression(e.args[1]) + ")";
  };
  switch (e.kind) {
    case K::Constant: {
      char buf[64];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, e.value);
      return std::string(buf, ptr);
    }
    case K::Pi:
      return "pi";
    case K::Param:
      return e.name;
    case K::Var:
      return "u" + std::to_string(e.index + 1);
    case K::Add:
      return bin("+");
    case K::Sub:
      return bin("-");
    case K::Mul:
      return bin("*");
    case K::Div:
      return bin("/");
    case K::Pow:
      return "(" + print_expression(e.args[0]) + "^" + std::to_string(e.index) + ")";
    case K::Neg:
      return "(-" + print_expression(e.args[0]) + ")";
    case K::Sin:
      return "sin(" + print_expression(e.args[0]) + ")";
    case K::Cos:
      return "cos(" + print_expression(e.args[0]) + ")";
    case K::Sqrt:
      return "sqrt(" + print_expression(e.args[0]) + ")";
    case K::Exp:
      return "exp(" + print_expression(e.args[0]) + ")";
  }
  return {};
}

/// Evaluate over doubles or jets. Parameters are looked up by name.
template <typename T>
T evaluate(const Expr& e, std::span<const T> vars, const ParamMap& params) {
  using K = Expr::Kind;
  using std::cos;
  using std::exp;
  using std::pow;
  using std::sin;
  switch (e.kind) {
    case K::Constant:
      return T(e.value);
    case K::Pi:
      return T(M_PI);
    case K::Param: {
      auto it = params.find(e.name);
      if (it == params.end()) throw ChartError("unbound parameter '" + e.name + "'");
      return T(it->second);
    }
    case K::Var:
      return vars[e.index];
    case K::Add:
      return evaluate(e.args[0], vars, params) + evaluate(e.args[1], vars, params);
    case K::Sub:
      return evaluate(e.args[0], vars, params) - evaluate(e.args[1], vars, params);
    case K::Mul:
      return evaluate(e.args[0], vars, params) * evaluate(e.args[1], vars, params);
    case K::Div:
      return detail::checked_div(evaluate(e.args[0], vars, params), evaluate(e.args[1], vars, params));
    case K::Pow:
      return pow(evaluate(e.args[0], vars, params), e.index);
    case K::Neg:
      return -evaluate(e.args[0], vars, params);
    case K::Sin:
      return sin(evaluate(e.args[0], vars, params));
    case K::Cos:
      return cos(evaluate(e.args[0], vars, params));
    case K::Sqrt:
      return detail::checked_sqrt(evaluate(e.args[0], vars, params));
    case K::Exp:
      return exp(evaluate(e.args[0], vars, params));
  }
  return T(0.0);
}

}  // namespace bitension

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bitension/expr.hpp"
#include "bitension/jet.hpp"

using namespace bitension;

namespace {

double eval(const std::string& src, std::vector<double> vars, const ParamMap& params = {}) {
  std::set<std::string> names;
  for (const auto& [k, v] : params) names.insert(k);
  const Expr e = parse_expression(src, static_cast<int>(vars.size()), names);
  return evaluate<double>(e, std::span<const double>(vars), params);
}

ParseError parse_failure(const std::string& src, int vars = 2, std::set<std::string> params = {}) {
  try {
    parse_expression(src, vars, params);
  } catch (const ParseError& e) {
    return e;
  }
  ADD_FAILURE() << "expected a parse error for '" << src << "'";
  return ParseError("none", 0, 0);
}

// Random tree over u1..u3, parameter a, and non-negative constants.
Expr random_tree(std::mt19937_64& rng, int depth) {
  using K = Expr::Kind;
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 3 : 12);
  std::uniform_real_distribution<double> val(0.0, 3.0);
  switch (pick(rng)) {
    case 0: return Expr::constant(val(rng));
    case 1: return Expr::var(std::uniform_int_distribution<int>(0, 2)(rng));
    case 2: return Expr::param("a");
    case 3: return Expr::pi();
    case 4: return Expr::binary(K::Add, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 5: return Expr::binary(K::Sub, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 6: return Expr::binary(K::Mul, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 7: return Expr::binary(K::Div, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 8: return Expr::power(random_tree(rng, depth - 1), std::uniform_int_distribution<int>(-3, 4)(rng));
    case 9: return Expr::unary(K::Neg, random_tree(rng, depth - 1));
    case 10: return Expr::unary(K::Sin, random_tree(rng, depth - 1));
    case 11: return Expr::unary(K::Cos, random_tree(rng, depth - 1));
    default: return Expr::unary(K::Exp, random_tree(rng, depth - 1));
  }
}

}  // namespace

TEST(Expr, ArithmeticAndPrecedence) {
  EXPECT_DOUBLE_EQ(eval("1 + 2*3", {}), 7.0);
  EXPECT_DOUBLE_EQ(eval("(1 + 2)*3", {}), 9.0);
  EXPECT_DOUBLE_EQ(eval("2^3", {}), 8.0);
  EXPECT_THROW(eval("2^3^1", {}), ParseError);
  EXPECT_DOUBLE_EQ(eval("-u1^2", {3.0}), -9.0);
  EXPECT_DOUBLE_EQ(eval("u1/u2/2", {8.0, 2.0}), 2.0);
  EXPECT_DOUBLE_EQ(eval("u1 - u2 - 1", {5.0, 2.0}), 2.0);
  EXPECT_DOUBLE_EQ(eval("2^-2", {}), 0.25);
  EXPECT_DOUBLE_EQ(eval("1.5e1 + .5", {}), 15.5);
}

TEST(Expr, FunctionsConstantsAndParameters) {
  EXPECT_NEAR(eval("sin(pi/2) + cos(0) + sqrt(4) + exp(0)", {}), 5.0, 1e-15);
  EXPECT_NEAR(eval("r*cos(u1)", {0.0}, {{"r", 0.5}}), 0.5, 1e-15);
  EXPECT_NEAR(eval("sqrt(1 - r^2)", {}, {{"r", 0.6}}), 0.8, 1e-15);
}

TEST(Expr, ErrorLocations) {
  const auto unclosed = parse_failure("sin(u1");
  EXPECT_EQ(unclosed.line(), 1);
  EXPECT_EQ(unclosed.column(), 7);

  const auto unknown_fn = parse_failure("1 + tan(u1)");
  EXPECT_EQ(unknown_fn.column(), 5);
  EXPECT_NE(std::string(unknown_fn.what()).find("unknown function 'tan'"), std::string::npos);

  const auto unknown_param = parse_failure("u1 + rr", 2, {"r"});
  EXPECT_EQ(unknown_param.column(), 6);
  EXPECT_NE(std::string(unknown_param.what()).find("unknown parameter 'rr'"), std::string::npos);

  const auto bad_var = parse_failure("u3", 2);
  EXPECT_EQ(bad_var.column(), 1);

  const auto second_line = parse_failure("u1 +\n  * u2");
  EXPECT_EQ(second_line.line(), 2);
  EXPECT_EQ(second_line.column(), 3);

  EXPECT_THROW(parse_expression("u1 u2", 2), ParseError);
  EXPECT_THROW(parse_expression("", 2), ParseError);
  EXPECT_THROW(parse_expression("u1^1.5", 2), ParseError);
  EXPECT_THROW(parse_expression("u1 $ 2", 2), ParseError);
}

TEST(Expr, DomainErrorsDuringEvaluation) {
  EXPECT_THROW(eval("sqrt(u1)", {-1.0}), DomainError);
  EXPECT_THROW(eval("1/u1", {0.0}), DomainError);
}

TEST(Expr, PrintParseRoundTrip) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 300; ++i) {
    const Expr e = random_tree(rng, 4);
    const std::string text = print_expression(e);
    const Expr back = parse_expression(text, 3, {"a"});
    ASSERT_EQ(back, e) << text;
    EXPECT_EQ(print_expression(back), text);
  }
}

TEST(Expr, JetEvaluationMatchesRealEvaluation) {
  std::mt19937_64 rng(99);
  const ParamMap params{{"a", 0.7}};
  std::uniform_real_distribution<double> pt(-1.0, 1.0);
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    const Expr e = random_tree(rng, 3);
    const std::vector<double> p = {pt(rng), pt(rng), pt(rng)};
    double real = 0.0;
    try {
      real = evaluate<double>(e, std::span<const double>(p), params);
    } catch (const DomainError&) {
      continue;
    }
    if (!std::isfinite(real) || std::abs(real) > 1e6) continue;
    std::vector<Jet<3>> u;
    for (int k = 0; k < 3; ++k) u.push_back(Jet<3>::variable(k, p[k]));
    const Jet<3> j = evaluate<Jet<3>>(e, std::span<const Jet<3>>(u), params);
    EXPECT_NEAR(j.value(), real, 1e-12 * (1 + std::abs(real))) << print_expression(e);

    // First derivatives against central differences.
    for (int k = 0; k < 3; ++k) {
      auto at = [&](double s) {
        std::vector<double> q = p;
        q[k] += s;
        return evaluate<double>(e, std::span<const double>(q), params);
      };
      double fd = 0.0;
      try {
        fd = (4 * (at(5e-5) - at(-5e-5)) / 1e-4 - (at(1e-4) - at(-1e-4)) / 2e-4) / 3;
      } catch (const DomainError&) {
        continue;
      }
      std::array<int, 3> alpha{0, 0, 0};
      alpha[k] = 1;
      const double d = j.partial(alpha);
      if (std::abs(d) < 1e4) EXPECT_NEAR(d, fd, 1e-5 * (1 + std::abs(d))) << print_expression(e);
    }
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

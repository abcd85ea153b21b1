#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "finsler/expr.hpp"
#include "finsler/jet.hpp"
#include "finsler/registry.hpp"

using namespace finsler;

namespace {

double eval_d(const Expr& e, std::vector<double> x, std::vector<double> y) {
  return e.eval<double>(x, y);
}

}  // namespace

TEST_CASE("grammar forces the expected shapes", "[expr]") {
  Expr e = Expr::parse("sqrt(y1^2 + y2^2)", 2);
  const auto& nodes = e.nodes();
  const auto& root = nodes[e.root()];
  REQUIRE(root.kind == Expr::Node::Kind::Unary);
  REQUIRE(root.uop == UnaryOp::Sqrt);
  const auto& sum = nodes[root.a];
  REQUIRE(sum.kind == Expr::Node::Kind::Binary);
  REQUIRE(sum.bop == BinaryOp::Add);
  REQUIRE(nodes[sum.a].bop == BinaryOp::Pow);
  REQUIRE(nodes[sum.b].bop == BinaryOp::Pow);

  // precedence: ^ over unary minus over * over +
  Expr p = Expr::parse("-y1^2 + 2*y2", 2);
  const auto& proot = p.nodes()[p.root()];
  REQUIRE(proot.bop == BinaryOp::Add);
  REQUIRE(p.nodes()[proot.a].kind == Expr::Node::Kind::Unary);
  REQUIRE(p.nodes()[proot.a].uop == UnaryOp::Neg);
}

TEST_CASE("the quartic example metric parses", "[expr]") {
  REQUIRE_NOTHROW(
      Expr::parse("((y1*y3 + y3*sqrt(y1^2+y3^2))*y2^2)^(1/4)", 3));
}

TEST_CASE("parse errors carry positions", "[expr]") {
  REQUIRE_THROWS_AS(Expr::parse("y1^x2", 2), ParseError);
  REQUIRE_THROWS_AS(Expr::parse("y3 + 1", 2), ParseError);
  REQUIRE_THROWS_AS(Expr::parse("sqrt(y1", 2), ParseError);
  REQUIRE_THROWS_AS(Expr::parse("1 + * y1", 2), ParseError);
  REQUIRE_THROWS_AS(Expr::parse("", 2), ParseError);
  REQUIRE_THROWS_AS(Expr::parse("y1 + y2", 1), ParseError);
  try {
    Expr::parse("y1 + y9", 3);
    FAIL("expected ParseError");
  } catch (const ParseError& err) {
    REQUIRE(err.position == 5);
  }
}

TEST_CASE("evaluation over plain reals", "[expr]") {
  Expr e = Expr::parse("sqrt(y1^2+y2^2)", 2);
  REQUIRE(eval_d(e, {0.0, 0.0}, {3.0, 4.0}) == Catch::Approx(5.0).epsilon(1e-14));

  Expr f = Expr::parse("exp(x1)*y1", 2);
  REQUIRE(eval_d(f, {0.0, 0.0}, {7.0, 1.0}) == Catch::Approx(7.0).epsilon(1e-14));

  // independent arithmetic for the quartic metric at y = (1,1,1)
  Expr g = Expr::parse("((y1*y3 + y3*sqrt(y1^2+y3^2))*y2^2)^(1/4)", 3);
  double byHand = std::exp(0.25 * std::log1p(std::sqrt(2.0)));
  REQUIRE(eval_d(g, {0.3, -0.2, 0.9}, {1.0, 1.0, 1.0}) ==
          Catch::Approx(byHand).epsilon(1e-14));
}

TEST_CASE("domain violations name the subexpression", "[expr]") {
  Expr e = Expr::parse("log(y1 - y2)", 2);
  try {
    eval_d(e, {0.0, 0.0}, {1.0, 2.0});
    FAIL("expected EvalError");
  } catch (const EvalError& err) {
    REQUIRE(std::string(err.what()).find("log(y1 - y2)") != std::string::npos);
  }
  Expr d = Expr::parse("1/(y1 - 1)", 2);
  REQUIRE_THROWS_AS(eval_d(d, {0.0, 0.0}, {1.0, 0.0}), EvalError);
  Expr s = Expr::parse("sqrt(y1)", 2);
  REQUIRE_THROWS_AS(eval_d(s, {0.0, 0.0}, {-1.0, 0.0}), EvalError);
  // non-integer powers need a positive base
  Expr q = Expr::parse("y1^(1/4)", 2);
  REQUIRE_THROWS_AS(eval_d(q, {0.0, 0.0}, {-2.0, 0.0}), EvalError);
  // integer powers accept negative bases
  Expr c = Expr::parse("y1^3", 2);
  REQUIRE(eval_d(c, {0.0, 0.0}, {-2.0, 0.0}) == -8.0);
  Expr n = Expr::parse("y1^(-2)", 2);
  REQUIRE(eval_d(n, {0.0, 0.0}, {2.0, 0.0}) == 0.25);
}

TEST_CASE("rational literals evaluate exactly", "[expr]") {
  Expr e = Expr::parse("1/4", 2);
  REQUIRE(eval_d(e, {0, 0}, {0, 0}) == 0.25);
  Expr f = Expr::parse("3/6 + 1/2", 2);
  REQUIRE(eval_d(f, {0, 0}, {0, 0}) == 1.0);
}

namespace {

Expr random_expr(std::mt19937_64& rng, int n, int depth);

Expr random_atom(std::mt19937_64& rng, int n) {
  switch (rng() % 3) {
    case 0: {
      long long num = static_cast<long long>(rng() % 9) + 1;
      long long den = static_cast<long long>(rng() % 9) + 1;
      return Expr::parse(std::to_string(num) + "/" + std::to_string(den), n);
    }
    case 1:
      return Expr::parse("x" + std::to_string(1 + rng() % n), n);
    default:
      return Expr::parse("y" + std::to_string(1 + rng() % n), n);
  }
}

Expr random_expr(std::mt19937_64& rng, int n, int depth) {
  if (depth <= 0) return random_atom(rng, n);
  switch (rng() % 8) {
    case 0:
      return Expr::combine(BinaryOp::Add, random_expr(rng, n, depth - 1),
                           random_expr(rng, n, depth - 1));
    case 1:
      return Expr::combine(BinaryOp::Sub, random_expr(rng, n, depth - 1),
                           random_expr(rng, n, depth - 1));
    case 2:
      return Expr::combine(BinaryOp::Mul, random_expr(rng, n, depth - 1),
                           random_expr(rng, n, depth - 1));
    case 3: {
      // keep divisors clearly away from zero: d^2 + 1
      Expr d = random_expr(rng, n, depth - 1);
      Expr den = Expr::combine(BinaryOp::Add,
                               Expr::combine(BinaryOp::Mul, d, d), Expr::parse("1", n));
      return Expr::combine(BinaryOp::Div, random_expr(rng, n, depth - 1), den);
    }
    case 4: {
      Expr a = random_expr(rng, n, depth - 1);
      Expr arg = Expr::combine(BinaryOp::Add, Expr::combine(BinaryOp::Mul, a, a),
                               Expr::parse("1/2", n));
      return Expr::apply(rng() % 2 ? UnaryOp::Sqrt : UnaryOp::Log, arg);
    }
    case 5:
      return Expr::apply(static_cast<UnaryOp>(
                             static_cast<int>(UnaryOp::Sin) + rng() % 3),
                         random_expr(rng, n, depth - 1));
    case 6:
      return Expr::apply(UnaryOp::Neg, random_expr(rng, n, depth - 1));
    default: {
      Expr b = random_expr(rng, n, depth - 1);
      Expr sq = Expr::combine(BinaryOp::Add, Expr::combine(BinaryOp::Mul, b, b),
                              Expr::parse("1/4", n));
      return Expr::combine(BinaryOp::Pow, sq,
                           rng() % 2 ? Expr::parse("2", n) : Expr::parse("3/2", n));
    }
  }
}

}  // namespace

TEST_CASE("print/parse round-trips structurally", "[expr]") {
  for (const char* text :
       {"sqrt(y1^2 + y2^2)", "((y1*y3 + y3*sqrt(y1^2+y3^2))*y2^2)^(1/4)",
        "1/4*y1 - (y2 - y1)*y2", "-y1^2", "y1 - -y2", "2^3^2", "(2^3)^2",
        "exp(1/sqrt(3)*atan(2*y2/sqrt(3*(y1^2 + y3^2)) + 1/sqrt(3)))",
        "1.5*y1/(2.25 + x1*x1)"}) {
    Expr e = Expr::parse(text, 3);
    Expr r = Expr::parse(e.str(), 3);
    INFO(text << "  ->  " << e.str());
    REQUIRE(r.identical(e));
    REQUIRE(r.str() == e.str());
  }

  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 400; ++trial) {
    Expr e = random_expr(rng, 3, 3);
    Expr r = Expr::parse(e.str(), 3);
    INFO(e.str());
    REQUIRE(r.identical(e));
  }
}

TEST_CASE("plain-real eval equals order-0 jet eval", "[expr]") {
  std::mt19937_64 rng(11);
  int agree = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Expr e = random_expr(rng, 3, 3);
    std::vector<double> x(3), y(3);
    for (auto& v : x) v = -1.0 + 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    for (auto& v : y) v = -1.0 + 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    double a;
    try {
      a = e.eval<double>(x, y);
    } catch (const EvalError&) {
      continue;  // rare domain miss from sin/cos compositions
    }
    std::vector<Jet<0>> xj(x.begin(), x.end()), yj(y.begin(), y.end());
    double b = e.eval<Jet<0>>(xj, yj).value();
    REQUIRE(a == b);
    ++agree;
  }
  REQUIRE(agree > 900);
}

TEST_CASE("homogeneity probe passes on every registry metric", "[expr][registry]") {
  for (const RegistryEntry& entry : registry()) {
    auto pts = sample_admissible(entry.space, 25, 42);
    for (const Point& p : pts) {
      INFO(entry.name);
      REQUIRE(homogeneity_residual(entry.space, p) < 1e-12);
    }
  }
}

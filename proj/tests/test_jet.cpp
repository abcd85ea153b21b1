#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "finsler/expr.hpp"
#include "finsler/jet.hpp"
#include "finsler/registry.hpp"
#include "support/finite_diff.hpp"

using namespace finsler;
using finsler::testsupport::fd_derivative;

namespace {

template <unsigned M>
Jet<M> random_jet(std::mt19937_64& rng, double lo = -2.0, double hi = 2.0) {
  Jet<M> j;
  for (unsigned m = 0; m < Jet<M>::kSize; ++m)
    j.coeff(m) = lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return j;
}

}  // namespace

TEST_CASE("seeding and extraction basics", "[jet]") {
  Point p{{0.0}, {2.0}};
  p.x = {0.0, 0.0};
  p.y = {2.0, 5.0};

  // value plus unit derivative slot
  std::array<Direction, 1> d1 = {Direction{Axis::Y, 0}};
  auto s = seed_point<1>(p, d1);
  REQUIRE(s.y[0].value() == 2.0);
  REQUIRE(s.y[0].coeff(1) == 1.0);
  REQUIRE(s.y[1].coeff(1) == 0.0);
  REQUIRE(s.x[0].coeff(1) == 0.0);

  // d^2(y1*y2)/dy1 dy2 = 1
  Expr e = Expr::parse("y1*y2", 2);
  std::array<Direction, 2> d2 = {Direction{Axis::Y, 0}, Direction{Axis::Y, 1}};
  REQUIRE(eval_jet<2>(e, p, d2).coeff(3) == 1.0);

  // third derivative of a cube: 6
  Expr c = Expr::parse("y1^3", 2);
  std::array<Direction, 3> d3 = {Direction{Axis::Y, 0}, Direction{Axis::Y, 0},
                                 Direction{Axis::Y, 0}};
  REQUIRE(eval_jet<3>(c, p, d3).coeff(7) == Catch::Approx(6.0).margin(1e-12));

  // m = 0 seeding is plain evaluation
  REQUIRE(eval_jet<0>(e, p, {}).value() == 10.0);

  // repeated seeding of one direction reads out pure second partials
  Expr q = Expr::parse("exp(y1)", 2);
  std::array<Direction, 2> dd = {Direction{Axis::Y, 0}, Direction{Axis::Y, 0}};
  REQUIRE(eval_jet<2>(q, p, dd).coeff(3) == Catch::Approx(std::exp(2.0)).epsilon(1e-14));
}

TEST_CASE("ring laws hold on random jets", "[jet]") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    auto a = random_jet<4>(rng);
    auto b = random_jet<4>(rng);
    auto c = random_jet<4>(rng);
    auto lhs = (a + b) + c;
    auto rhs = a + (b + c);
    for (unsigned m = 0; m < 16; ++m)
      REQUIRE(lhs.coeff(m) == Catch::Approx(rhs.coeff(m)).margin(1e-12));
    auto d1 = a * (b + c);
    auto d2 = a * b + a * c;
    for (unsigned m = 0; m < 16; ++m)
      REQUIRE(d1.coeff(m) == Catch::Approx(d2.coeff(m)).margin(1e-12));
    auto m1 = (a * b) * c;
    auto m2 = a * (b * c);
    for (unsigned m = 0; m < 16; ++m)
      REQUIRE(m1.coeff(m) == Catch::Approx(m2.coeff(m)).margin(1e-11));
  }
}

TEST_CASE("Leibniz rule in a single generator slot", "[jet]") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    auto a = random_jet<3>(rng);
    auto b = random_jet<3>(rng);
    auto ab = a * b;
    for (unsigned g = 0; g < 3; ++g) {
      double expect = a.coeff(1u << g) * b.value() + a.value() * b.coeff(1u << g);
      REQUIRE(ab.coeff(1u << g) == Catch::Approx(expect).margin(1e-12));
    }
  }
}

TEST_CASE("chain-rule closure: exp(log(j)) = j", "[jet]") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    auto j = random_jet<5>(rng);
    j.coeff(0) = 0.5 + 3.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    auto round = exp(log(j));
    for (unsigned m = 0; m < Jet<5>::kSize; ++m)
      REQUIRE(round.coeff(m) ==
              Catch::Approx(j.coeff(m)).margin(1e-12).epsilon(1e-12));
    // and the other composition order
    auto back = log(exp(j));
    for (unsigned m = 0; m < Jet<5>::kSize; ++m)
      REQUIRE(back.coeff(m) ==
              Catch::Approx(j.coeff(m)).margin(1e-12).epsilon(1e-12));
  }
}

TEST_CASE("division and sqrt recompose consistently", "[jet]") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    auto a = random_jet<4>(rng);
    auto b = random_jet<4>(rng);
    b.coeff(0) = 1.0 + std::abs(b.coeff(0));
    auto q = a / b;
    auto back = q * b;
    for (unsigned m = 0; m < 16; ++m)
      REQUIRE(back.coeff(m) == Catch::Approx(a.coeff(m)).margin(1e-12));
    auto s = random_jet<4>(rng);
    s.coeff(0) = 0.25 + std::abs(s.coeff(0));
    auto r = sqrt(s);
    auto sq = r * r;
    for (unsigned m = 0; m < 16; ++m)
      REQUIRE(sq.coeff(m) == Catch::Approx(s.coeff(m)).margin(1e-12));
  }
}

TEST_CASE("atan derivative matches 1/(1+x^2)", "[jet]") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    double v = -2.0 + 4.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    auto j = atan(Jet<1>::variable(v, 0));
    REQUIRE(j.value() == Catch::Approx(std::atan(v)).epsilon(1e-14));
    REQUIRE(j.coeff(1) == Catch::Approx(1.0 / (1.0 + v * v)).epsilon(1e-13));
  }
}

TEST_CASE("mixed partials are symmetric in the seeded directions", "[jet]") {
  Expr f = Expr::parse("exp(x1*y2)*sqrt(1 + y1^2) + sin(y2)*y1", 2);
  Point p;
  p.x = {0.3, -0.8};
  p.y = {0.7, 0.4};
  std::array<Direction, 3> fwd = {Direction{Axis::Y, 0}, Direction{Axis::Y, 1},
                                  Direction{Axis::X, 0}};
  std::array<Direction, 3> rev = {Direction{Axis::X, 0}, Direction{Axis::Y, 1},
                                  Direction{Axis::Y, 0}};
  double a = eval_jet<3>(f, p, fwd).coeff(7);
  double b = eval_jet<3>(f, p, rev).coeff(7);
  REQUIRE(a == Catch::Approx(b).epsilon(1e-10));
}

TEST_CASE("jet derivatives of orders 1-3 match finite differences", "[jet][oracle]") {
  for (const RegistryEntry& entry : registry()) {
    MetricSpace roomy = entry.space;
    roomy.margin = 0.05;  // keep the difference stencils inside the domain
    auto pts = sample_admissible(roomy, 6, 42);
    auto f = [&](const Point& q) { return entry.space.F.eval<double>(q.x, q.y); };
    std::mt19937_64 rng(101);
    for (const Point& p : pts) {
      for (int order = 1; order <= 3; ++order) {
        std::vector<Direction> dirs;
        for (int k = 0; k < order; ++k) {
          Axis ax = rng() % 4 == 0 ? Axis::X : Axis::Y;
          dirs.push_back(Direction{ax, static_cast<int>(rng() % entry.space.n)});
        }
        double oracle = fd_derivative(f, p, dirs);
        double viaJets = 0.0;
        if (order == 1)
          viaJets = eval_jet<1>(entry.space.F, p, dirs).coeff(1);
        else if (order == 2)
          viaJets = eval_jet<2>(entry.space.F, p, dirs).coeff(3);
        else
          viaJets = eval_jet<3>(entry.space.F, p, dirs).coeff(7);
        INFO(entry.name << " order " << order);
        REQUIRE(viaJets == Catch::Approx(oracle).epsilon(1e-5).margin(1e-7));
      }
    }
  }
}

#include "capflow/expr.hpp"

#include <doctest.h>

#include <random>

using namespace capflow;

namespace {

// Central differences of the value, independent of the jet machinery.
Vec<3> fd_grad(const Expression& e, const Vec<3>& x, double h) {
  Vec<3> g;
  for (int i = 0; i < 3; ++i) {
    Vec<3> p = x, m = x;
    p[i] += h;
    m[i] -= h;
    g[i] = (eval_value<3>(e, p) - eval_value<3>(e, m)) / (2 * h);
  }
  return g;
}

const char* kA2 = "((x^2+y^2+z^2)*(x^2+y^2)+z^4)^(1/4)";

}  // namespace

TEST_SUITE("expr") {
  TEST_CASE("sum of squares parses and evaluates") {
    const auto e = parse("x^2+y^2+z^2");
    CHECK(same_ast(e, parse(" x ^ 2 + y^2 + z^2 ")));
    CHECK(eval_value<3>(e, Vec<3>(1, 2, 3)) == doctest::Approx(14.0));
  }

  TEST_CASE("quartic norm string evaluates to one at the pole") {
    CHECK(eval_value<3>(parse(kA2), Vec<3>(0, 0, 1)) == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("malformed input reports the offset") {
    try {
      parse("x^2+*y");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.offset == 4);
    }
    CHECK_THROWS_AS(parse("x^y"), ParseError);
    CHECK_THROWS_AS(parse("(x+1"), ParseError);
    CHECK_THROWS_AS(parse("w+1"), ParseError);
  }

  TEST_CASE("domain errors are raised at evaluation") {
    CHECK_THROWS_AS(eval_value<3>(parse("sqrt(x)"), Vec<3>(-1, 0, 0)), DomainError);
    CHECK_THROWS_AS(eval_value<3>(parse("1/x"), Vec<3>(0, 0, 0)), DomainError);
  }

  TEST_CASE("quadratic jet") {
    const auto j = eval_jet<3>(parse("x^2+y^2+z^2"), Vec<3>(1, 0, 0), 3);
    CHECK(j.value == 1.0);
    CHECK((j.grad - Vec<3>(2, 0, 0)).norm() == 0.0);
    CHECK((j.hess - 2 * Mat<3>::Identity()).norm() == 0.0);
    for (double t : j.third) CHECK(t == 0.0);
  }

  TEST_CASE("monomial third derivative") {
    const auto j = eval_jet<3>(parse("x*y*z"), Vec<3>(1, 1, 1), 3);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 3; ++c) {
          const bool distinct = a != b && b != c && a != c;
          CHECK(j.t(a, b, c) == (distinct ? 1.0 : 0.0));
        }
  }

  TEST_CASE("quartic gradient matches finite differences") {
    const auto e = parse(kA2);
    const Vec<3> x(0.6, 0.0, 0.8);
    const auto j = eval_jet<3>(e, x, 1);
    const Vec<3> g = fd_grad(e, x, 1e-4);
    CHECK((j.grad - g).norm() <= 1e-6 * g.norm());
  }

  TEST_CASE("jets of polynomials match finite differences at random points") {
    const std::vector<std::string> polys = {"x^3*y - 2*y*z^2 + 0.5*x*z", "(x + 2*y - z)^4", "x^2*y^2*z^2 + x - 3"};
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1.5, 1.5);
    const double h = 1e-4;
    for (const auto& s : polys) {
      const auto e = parse(s);
      for (int n = 0; n < 100; ++n) {
        const Vec<3> x(U(rng), U(rng), U(rng));
        const auto j = eval_jet<3>(e, x, 3);
        const Vec<3> g = fd_grad(e, x, h);
        CHECK((j.grad - g).norm() <= 1e-6 * std::max(1.0, g.norm()));
        for (int i = 0; i < 3; ++i) {
          Vec<3> p = x, m = x;
          p[i] += h;
          m[i] -= h;
          const auto jp = eval_jet<3>(e, p, 2), jm = eval_jet<3>(e, m, 2);
          const Vec<3> hcol = (jp.grad - jm.grad) / (2 * h);
          CHECK((j.hess.col(i) - hcol).norm() <= 1e-6 * std::max(1.0, hcol.norm()));
          const Mat<3> tcol = (jp.hess - jm.hess) / (2 * h);
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) CHECK(std::abs(j.t(i, a, b) - tcol(a, b)) <= 1e-4 * std::max(1.0, tcol.norm()));
        }
      }
    }
  }

  TEST_CASE("derivative tensors are exactly symmetric") {
    const auto j = eval_jet<3>(parse(kA2), Vec<3>(0.3, -0.4, 0.7), 3);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        CHECK(j.hess(a, b) == j.hess(b, a));
        for (int c = 0; c < 3; ++c) {
          CHECK(j.t(a, b, c) == j.t(b, a, c));
          CHECK(j.t(a, b, c) == j.t(a, c, b));
          CHECK(j.t(a, b, c) == j.t(c, b, a));
        }
      }
  }

  TEST_CASE("printing round-trips the tree") {
    for (const std::string s : {"x^2+y^2+z^2", kA2, "-(x - 2*y)/(1 + z^2)", "sqrt(abs(x) + y^4)", "x^(-3/2)*2.5e-1"}) {
      const auto a = parse(s);
      const auto b = parse(print(a));
      CHECK(same_ast(a, b));
      CHECK(same_ast(b, parse(print(b))));
    }
  }

  TEST_CASE("arity limits the variables") {
    CHECK_THROWS_AS(parse("x + w", 3), ParseError);
    const auto e = parse("x^2 + y^2 + z^2 + w^2", 4);
    CHECK(eval_value<4>(e, Vec<4>(1, 1, 1, 1)) == doctest::Approx(4.0));
  }
}

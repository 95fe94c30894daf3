#include <doctest.h>

#include <cmath>

#include "jetgeom/errors.hpp"
#include "jetgeom/expression.hpp"
#include "support.hpp"

using namespace jetgeom;
using namespace jetgeom::testing;
using J = Jet<Rational>;

namespace {

// Random AST over variables a, b, c with small constants.
ExprPtr random_expr(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 6);
  static const char* vars[] = {"a", "b", "c"};
  switch (pick(rng)) {
    case 0:
      return Expr::make_constant(random_rational(rng));
    case 1:
      return Expr::make_variable(vars[rng() % 3]);
    case 2:
      return Expr::make_unary(ExprKind::negate, random_expr(rng, depth - 1));
    case 3:
      return Expr::make_binary(ExprKind::sum, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 4:
      return Expr::make_binary(ExprKind::product, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 5:
      // denominators shifted away from zero at the evaluation point
      return Expr::make_binary(ExprKind::quotient, random_expr(rng, depth - 1),
                               Expr::make_binary(ExprKind::sum, Expr::make_constant(7),
                                                 Expr::make_power(Expr::make_variable(vars[rng() % 3]), 2)));
    default:
      return Expr::make_power(random_expr(rng, depth - 1), static_cast<int>(rng() % 4));
  }
}

}  // namespace

TEST_CASE("grammar examples") {
  CHECK(tree_string(*parse_expression("x[0,1]")) == "x[0,1]");
  CHECK(parse_expression("x[0,1]")->kind == ExprKind::variable);
  CHECK(tree_string(*parse_expression("-x[0,1]*x[1,2]^2")) == "product(negation(x[0,1]),power(x[1,2],2))");
  CHECK(tree_string(*parse_expression("1/2*t + (3)")) == "sum(product(1/2,t),3)");
  CHECK(tree_string(*parse_expression("x [ 0 , 1 ]")) == "x[0,1]");
  CHECK(tree_string(*parse_expression("t^-2")) == "power(t,-2)");
  CHECK(tree_string(*parse_expression("a-b")) == "sum(a,negation(b))");
  CHECK(tree_string(*parse_expression("-x^2")) == "negation(power(x,2))");
}

TEST_CASE("syntax errors carry line and column") {
  try {
    parse_expression("1 + * 2");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
    CHECK(e.column() == 5);
  }
  CHECK_THROWS_AS(parse_expression("(1 + 2"), ParseError);
  CHECK_THROWS_AS(parse_expression("x^y"), ParseError);
  CHECK_THROWS_AS(parse_expression("x^2^3"), ParseError);
  CHECK_THROWS_AS(parse_expression("foo(1)"), ParseError);
  CHECK_THROWS_AS(parse_expression(""), ParseError);
  // unknown variables are not a parse-time concern
  CHECK_NOTHROW(parse_expression("zeta + 1"));
}

TEST_CASE("evaluation examples") {
  auto c = make_chart({"t"});
  J r = evaluate_jet<Rational>(*parse_expression("t^2"), c, {Rational(3)}, 2);
  std::vector<J::Term> want{{Monomial{}, 9}, {Monomial::unit(0), 6}};
  Monomial t2;
  t2.set(0, 2);
  want.emplace_back(t2, 1);
  CHECK(r.equals(J::from_terms(c, 2, want)));

  J q = evaluate_jet<Rational>(*parse_expression("1/(1+t)"), c, {Rational(0)}, 2);
  CHECK(q.equals((J::constant(c, 1, 2) + J::coordinate(c, 0, 0, 2)).inverse()));

  auto c2 = make_chart({"t", "x[0,1]"});
  J x = evaluate_jet<Rational>(*parse_expression("x[0,1]"), c2, {Rational(0), Rational(5, 3)}, 1);
  CHECK(x.equals(J::coordinate(c2, 1, Rational(5, 3), 1)));
}

TEST_CASE("evaluation errors") {
  auto c = make_chart({"t"});
  using K = EvaluationError::Kind;
  auto kind_of = [&](const char* text, auto scalar) {
    try {
      using S = decltype(scalar);
      evaluate_jet<S>(*parse_expression(text), c, {S(0)}, 2);
    } catch (const EvaluationError& e) {
      return static_cast<int>(e.kind());
    }
    return -1;
  };
  CHECK(kind_of("1/t", Rational(0)) == static_cast<int>(K::division_at_pole));
  CHECK(kind_of("t^-1", Rational(0)) == static_cast<int>(K::division_at_pole));
  CHECK(kind_of("sin(t)", Rational(0)) == static_cast<int>(K::function_needs_float_mode));
  CHECK(kind_of("y + 1", Rational(0)) == static_cast<int>(K::unbound_variable));
  CHECK(kind_of("0.5*t", Rational(0)) == static_cast<int>(K::decimal_in_rational_mode));
  CHECK(kind_of("0.5*t", 0.0) == -1);
  CHECK(kind_of("log(t)", 0.0) == static_cast<int>(K::division_at_pole));
}

TEST_CASE("float functions match their Taylor series") {
  auto c = make_chart({"t"});
  Jet<double> s = evaluate_jet<double>(*parse_expression("exp(sin(t))"), c, {0.3}, 4);
  // brute-force: finite differences are too noisy, compare against nested series built by hand
  const double x = 0.3;
  CHECK(s.constant_term() == doctest::Approx(std::exp(std::sin(x))));
  CHECK(s.coefficient(Monomial::unit(0)) == doctest::Approx(std::exp(std::sin(x)) * std::cos(x)));
  Monomial t2;
  t2.set(0, 2);
  const double second = std::exp(std::sin(x)) * (std::cos(x) * std::cos(x) - std::sin(x));
  CHECK(s.coefficient(t2) == doctest::Approx(second / 2));
  Jet<double> l = evaluate_jet<double>(*parse_expression("log(t)"), c, {2.0}, 3);
  Monomial t3;
  t3.set(0, 3);
  CHECK(l.coefficient(t3) == doctest::Approx(1.0 / 24));
}

TEST_CASE("property: parse(print(parse)) is idempotent (300 cases)") {
  std::mt19937 rng(99);
  int failures = 0;
  for (int trial = 0; trial < 300; ++trial) {
    ExprPtr e = random_expr(rng, 4);
    ExprPtr p1 = parse_expression(to_string(*e));
    ExprPtr p2 = parse_expression(to_string(*p1));
    failures += !structurally_equal(*p1, *p2);
    failures += !structurally_equal(*e, *p1);
  }
  CHECK(failures == 0);
}

TEST_CASE("property: evaluation is a ring homomorphism and agrees pointwise (200 cases)") {
  std::mt19937 rng(5);
  auto c = make_chart({"a", "b", "c"});
  int failures = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Rational> pt{random_rational(rng), random_rational(rng), random_rational(rng)};
    ExprPtr e1 = random_expr(rng, 3), e2 = random_expr(rng, 3);
    J j1 = evaluate_jet<Rational>(*e1, c, pt, 3), j2 = evaluate_jet<Rational>(*e2, c, pt, 3);
    J s = evaluate_jet<Rational>(*Expr::make_binary(ExprKind::sum, e1, e2), c, pt, 3);
    J p = evaluate_jet<Rational>(*Expr::make_binary(ExprKind::product, e1, e2), c, pt, 3);
    failures += !s.equals(j1 + j2);
    failures += !p.equals(j1 * j2);
    std::function<Rational(const std::string&)> look = [&](const std::string& n) { return pt[*c->find(n)]; };
    failures += j1.constant_term() != evaluate_scalar<Rational>(*e1, look);
  }
  CHECK(failures == 0);
}

TEST_CASE("problem file examples") {
  PairSpec s = parse_problem_file(R"(pair "fourth" {
  kind = "ode"  k = 3  m = 1   # x'''' = x
  F[1] = "x[0,1]"
})");
  CHECK(s.name == "fourth");
  CHECK(s.kind == PairKind::ode);
  CHECK(s.k == 3);
  CHECK(s.m == 1);
  CHECK(to_string(*s.F[0]) == "x[0,1]");
  CHECK(s.mode == ScalarMode::rational);

  try {
    parse_problem_file("pair \"bad\" {\n kind = \"ode\" k = 3 m = 1\n F[1] = \"x[4,1]\"\n}");
    FAIL("expected an error");
  } catch (const SpecError& e) {
    CHECK(std::string(e.what()).find("exceeds k") != std::string::npos);
  }

  PairSpec g = parse_problem_file(R"(pair "geo" {
  kind = "geodesic"
  m = 2
  Gamma[1][2][2] = "x[0,1]"
})");
  CHECK(g.k == 1);
  CHECK(g.gamma.size() == 8);
  CHECK(to_string(*g.Gamma(1, 2, 2)) == "x[0,1]");
  CHECK(to_string(*g.Gamma(2, 1, 1)) == "0");
}

TEST_CASE("problem file generic kind and schema errors") {
  PairSpec g = parse_problem_file(R"(pair "gen" {
  kind = "generic"
  m = 1  dim = 5
  vars = ["t", "y0", "y1", "y2", "y3"]
  X = ["1", "y1", "y2", "y3", "y0"]
  V[1] = ["0", "0", "0", "0", "1"]
})");
  CHECK(g.k == 3);
  CHECK(g.X.size() == 5);
  CHECK(g.V.size() == 1);

  CHECK_THROWS_AS(parse_problem_file("pair \"x\" { kind = \"ode\" k = 1 }"), SpecError);
  CHECK_THROWS_AS(parse_problem_file("pair \"x\" { kind = \"ode\" k = 1 m = 1 F[2] = \"0\" }"), SpecError);
  CHECK_THROWS_AS(parse_problem_file("pair \"x\" { kind = \"ode\" k = 1 m = 1 Gamma[1][1][1] = \"0\" }"), SpecError);
  CHECK_THROWS_AS(parse_problem_file("pair \"x\" { kind = \"ode\" k = 1 m = 1 F[1] = \"sin(t)\" }"), SpecError);
  CHECK_NOTHROW(parse_problem_file("pair \"x\" { kind = \"ode\" mode = \"float\" k = 1 m = 1 F[1] = \"sin(t)\" }"));
  try {
    parse_problem_file("pair \"x\" {\n  kind = \"ode\" k = 1 m = 1\n  F[1] = \"1 + * t\"\n}");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() == 15);
  }
  CHECK_THROWS_AS(parse_problem_file("pair \"x\" { kind = \"ode\" k = 1 k = 2 m = 1 }"), ParseError);
}

#include <doctest.h>

#include "jetgeom/errors.hpp"
#include "jetgeom/ode_pair.hpp"
#include "support.hpp"

using namespace jetgeom;
using namespace jetgeom::testing;

namespace {

PairFields trivial(int k, int m) { return build_pair(make_ode_spec(k, m, std::vector<std::string>(m, "0"))); }

std::string generic_trivial_k3(const std::string& extra_v0 = "0") {
  return R"(pair "gen" {
  kind = "generic"
  m = 1  dim = 5
  vars = ["t", "a0", "a1", "a2", "a3"]
  X = ["1", "a1", "a2", "a3", "0"]
  V[1] = ["0", ")" + extra_v0 + R"(", "0", "0", "1"]
})";
}

}  // namespace

TEST_CASE("equation pair construction") {
  PairFields p = trivial(3, 1);
  CHECK(p.n == 5);
  CHECK(to_string(*p.X[0]) == "1");
  CHECK(to_string(*p.X[1]) == "x[1,1]");
  CHECK(to_string(*p.X[3]) == "x[3,1]");
  CHECK(to_string(*p.X[4]) == "0");
  CHECK(to_string(*p.V[0][4]) == "1");

  PairFields q = build_pair(make_ode_spec(3, 1, {"x[0,1]"}));
  CHECK(to_string(*q.X[4]) == "x[0,1]");

  PairSpec g = parse_problem_file(R"(pair "geo" { kind = "geodesic" m = 2 Gamma[1][2][2] = "x[0,1]" })");
  PairFields gp = build_pair(g);
  CHECK(tree_string(*gp.F[0]) == "negation(product(x[0,1],power(x[1,2],2)))");
  CHECK(to_string(*gp.F[1]) == "0");
}

TEST_CASE("regularity examples") {
  auto r = regularity_report<Rational>(trivial(2, 2), Point(7, 0), 3);
  REQUIRE(r.levels.size() == 3);
  CHECK(r.levels[0].rank == 3);
  CHECK(r.levels[1].rank == 5);
  CHECK(r.levels[2].rank == 7);
  CHECK(r.g1);
  CHECK(r.g2);

  PairFields f = build_pair(make_ode_spec(3, 1, {"x[0,1]"}));
  Point pt{Rational(2, 3), Rational(-1), Rational(5), Rational(1, 7), Rational(3)};
  auto r2 = regularity_report<Rational>(f, pt, 4);
  std::vector<std::size_t> ranks;
  for (auto& l : r2.levels) ranks.push_back(l.rank);
  CHECK(ranks == std::vector<std::size_t>{2, 3, 4, 5});
  CHECK(r2.regular());

  // V equal to the line field X itself: level 0 already has rank 1
  PairSpec bad = parse_problem_file(R"(pair "bad" {
  kind = "generic"  m = 1  dim = 3
  vars = ["t", "a", "b"]
  X = ["1", "b", "0"]
  V[1] = ["1", "b", "0"]
})");
  auto r3 = regularity_report<Rational>(build_pair(bad), Point(3, 0), 2);
  CHECK_FALSE(r3.g1);
  CHECK_FALSE(r3.levels[0].ok);

  CHECK_THROWS_AS(regularity_report<Rational>(trivial(3, 1), Point(5, 0), 3), OrderExhausted);
}

TEST_CASE("generic pairs") {
  PairFields g = build_pair(parse_problem_file(generic_trivial_k3()));
  auto rg = regularity_report<Rational>(g, Point(5, 0), 4);
  auto rt = regularity_report<Rational>(trivial(3, 1), Point(5, 0), 4);
  for (std::size_t i = 0; i < rg.levels.size(); ++i) CHECK(rg.levels[i].rank == rt.levels[i].rank);

  PairSpec zero = parse_problem_file(R"(pair "z" {
  kind = "generic" m = 1 dim = 3
  vars = ["t", "a", "b"]
  X = ["t", "a", "0"]
  V[1] = ["0", "0", "1"]
})");
  try {
    regularity_report<Rational>(build_pair(zero), Point(3, 0), 2);
    FAIL("expected degenerate field error");
  } catch (const EvaluationError& e) {
    CHECK(e.kind() == EvaluationError::Kind::degenerate_field);
    CHECK(e.exit_code() == 3);
  }

  PairFields pert = build_pair(parse_problem_file(generic_trivial_k3("1/1000*a0")));
  CHECK(regularity_report<Rational>(pert, Point(5, 0), 4).regular());
}

TEST_CASE("equation type examples") {
  auto e = equation_type_report<Rational>(trivial(3, 1), Point(5, 0), 4);
  CHECK(e.consistent);
  CHECK(e.w0_matches_ch);
  REQUIRE(e.levels.size() == 3);
  CHECK(e.levels[0].ch_rank == 1);
  CHECK(e.levels[1].ch_rank == 2);
  CHECK(e.levels[2].ch_rank == 5);  // V^3 is the whole tangent space
  CHECK_FALSE(e.levels[2].applicable);
  CHECK(e.levels[1].applicable);

  PairFields f = build_pair(make_ode_spec(2, 2, {"x[0,2]*x[1,1]", "t*x[2,1]^2"}));
  Point pt(7, Rational(1, 3));
  CHECK(equation_type_report<Rational>(f, pt, 3).consistent);

  // V = span{d_c, d_d + c d_a} is not integrable; the remaining chart directions make the pair regular.
  PairSpec nonint = parse_problem_file(R"(pair "nonint" {
  kind = "generic" m = 2 dim = 5
  vars = ["t", "a", "b", "c", "d"]
  X = ["1", "c", "d", "0", "0"]
  V[1] = ["0", "0", "0", "1", "0"]
  V[2] = ["0", "c", "0", "0", "1"]
})");
  auto rep = regularity_report<Rational>(build_pair(nonint), Point(5, 0), 2);
  CHECK(rep.regular());
  auto e2 = equation_type_report<Rational>(build_pair(nonint), Point(5, 0), 2);
  CHECK_FALSE(e2.consistent);
}

TEST_CASE("property: ad^s V has no dt component for equation pairs") {
  std::mt19937 rng(12);
  const char* pool[] = {"x[0,1]*x[1,2]", "t^2 - x[2,1]", "x[2,2]^2 + 1/3*x[0,2]", "x[1,1]*x[2,1]*t"};
  for (int trial = 0; trial < 5; ++trial) {
    PairFields f = build_pair(make_ode_spec(2, 2, {pool[rng() % 4], pool[rng() % 4]}));
    Point pt;
    for (int i = 0; i < 7; ++i) pt.push_back(random_rational(rng));
    auto rp = realize<Rational>(f, pt, 4);
    for (const auto& v : rp.V) {
      auto w = v;
      for (int s = 0; s <= 3; ++s) {
        CHECK(w.comps[0].is_zero());
        if (s < 3) w = lie_bracket(rp.X, w);
      }
    }
  }
}

TEST_CASE("property: regularity invariant under V recombination and X rescaling") {
  PairSpec s = parse_problem_file(R"(pair "mix" {
  kind = "generic" m = 2 dim = 7
  vars = ["t", "p1", "p2", "q1", "q2", "r1", "r2"]
  X = ["1", "q1", "q2", "r1", "r2", "p1*q2", "0"]
  V[1] = ["0", "0", "0", "0", "0", "1", "0"]
  V[2] = ["0", "0", "0", "0", "0", "0", "1"]
})");
  PairSpec s2 = s;
  // X scaled by (2 + t), V columns recombined: V1' = V1 + 3 V2, V2' = -V2
  auto two_plus_t = parse_expression("2 + t");
  for (auto& e : s2.X) e = Expr::make_binary(ExprKind::product, two_plus_t, e);
  for (int i = 0; i < 7; ++i) {
    auto v1 = s.V[0][i], v2 = s.V[1][i];
    s2.V[0][i] = Expr::make_binary(ExprKind::sum, v1, Expr::make_binary(ExprKind::product, Expr::make_constant(3), v2));
    s2.V[1][i] = Expr::make_unary(ExprKind::negate, v2);
  }
  auto a = regularity_report<Rational>(build_pair(s), Point(7, 0), 3);
  auto b = regularity_report<Rational>(build_pair(s2), Point(7, 0), 3);
  CHECK(a.regular() == b.regular());
  for (std::size_t i = 0; i < a.levels.size(); ++i) CHECK(a.levels[i].rank == b.levels[i].rank);
}

TEST_CASE("curvature oracle") {
  PairSpec flat = parse_problem_file(R"(pair "flat" { kind = "geodesic" m = 2 })");
  auto z = curvature_oracle(flat, Point(5, 1));
  for (auto& row : z)
    for (auto& x : row) CHECK(x == 0);

  PairSpec g = parse_problem_file(R"(pair "geo" { kind = "geodesic" m = 2 Gamma[1][2][2] = "x[0,1]" })");
  Point p{0, 0, 0, 0, 1};
  auto K = curvature_oracle(g, p);
  CHECK(K[0][0] == 1);
  Point p3{0, 0, 0, 0, 3};
  CHECK(curvature_oracle(g, p3)[0][0] == 9);
}

TEST_CASE("point parsing") {
  auto vars = equation_variable_names(1, 1);
  CHECK(parse_point("t=1/2,x[1,1]=3", vars) == Point{Rational(1, 2), 0, 3});
  CHECK(parse_point("1,2,3", vars) == Point{1, 2, 3});
  CHECK(parse_point("", vars) == Point{0, 0, 0});
  CHECK_THROWS_AS(parse_point("y=1", vars), SpecError);
}

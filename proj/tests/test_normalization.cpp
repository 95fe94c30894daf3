#include <doctest.h>

#include "jetgeom/errors.hpp"
#include "jetgeom/normalization.hpp"
#include "support.hpp"

using namespace jetgeom;
using namespace jetgeom::testing;
using J = Jet<Rational>;
using F = FieldJet<Rational>;
using M = JetMatrix<Rational>;

namespace {

PairFields ode(int k, int m, std::vector<std::string> rhs) { return build_pair(make_ode_spec(k, m, rhs)); }

bool all_zero(const M& a) {
  for (auto& row : a)
    for (auto& x : row)
      if (!x.is_zero()) return false;
  return true;
}

bool is_identity(const M& a) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if (!a[i][j].equals(J::constant(a[i][j].chart_ptr(), i == j ? 1 : 0, a[i][j].order()))) return false;
  return true;
}

}  // namespace

TEST_CASE("transport examples") {
  auto c = make_chart({"t", "x0", "x1"});
  F dt = F::coordinate(c, 0, 8);
  auto u = transport_linear<Rational>(dt, M{{J::constant(c, 1, 7)}}, {}, {J::constant(c, 1, 8)}, 0);
  Rational fact = 1;
  for (int n = 0; n <= 8; ++n) {
    if (n) fact *= n;
    Monomial mono;
    mono.set(0, n);
    CHECK(u[0].coefficient(mono) == 1 / fact);
  }

  auto cst = transport_linear<Rational>(dt, M{{J(c, 7)}}, {}, {J::constant(c, Rational(3, 5), 8)}, 0);
  CHECK(cst[0].equals(J::constant(c, Rational(3, 5), 8)));

  F X = dt + F::coordinate(c, 1, 6).times(J::coordinate(c, 2, 0, 6));
  auto inv = transport_linear<Rational>(X, M{{J(c, 6)}}, {}, {J::coordinate(c, 1, 0, 6)}, 0);
  CHECK(derivative(X, inv[0]).is_zero());
  J want = J::coordinate(c, 1, 0, 6) - J::coordinate(c, 0, 0, 6) * J::coordinate(c, 2, 0, 6);
  CHECK(inv[0].equals(want));

  F bad = F::coordinate(c, 1, 4);
  CHECK_THROWS_AS(transport_linear<Rational>(bad, M{{J(c, 4)}}, {}, {J::constant(c, 1, 4)}, 0), NotInvertible);
}

TEST_CASE("H and normal frame examples") {
  Point o(5, 0);
  auto triv = realize<Rational>(ode(3, 1, {"0"}), o, 6);
  CHECK(all_zero(compute_H(triv.X, triv.V, 3)));
  auto four = realize<Rational>(ode(3, 1, {"x[0,1]"}), o, 6);
  M H0 = compute_H(four.X, four.V, 3);
  CHECK(all_zero(H0));
  CHECK(is_identity(normal_frame(four.X, H0, 3, 0)));

  Point p{0, 1, Rational(1, 2), 2, -1};
  auto lin = realize<Rational>(ode(3, 1, {"3*x[3,1]"}), p, 7);
  M H = compute_H(lin.X, lin.V, 3);
  CHECK_FALSE(all_zero(H));
  auto top = frame_expand(ad_power(lin.X, lin.V[0], 4), expand_top_adjoint(lin.X, lin.V, 3).frame);
  CHECK(top.coefficients[4].equals(H[0][0]));
}

TEST_CASE("normality round trip and direct route agree") {
  std::mt19937 rng(17);
  const char* pool[] = {"x[0,1]*x[1,2]", "t*x[2,1] + x[1,1]^2", "1/2*x[2,2]^2 - x[0,2]", "x[1,1]*x[2,2]"};
  for (int trial = 0; trial < 3; ++trial) {
    PairFields f = ode(2, 2, {pool[rng() % 4], pool[rng() % 4]});
    Point pt;
    for (int i = 0; i < 7; ++i) pt.push_back(random_rational(rng));
    auto rp = realize<Rational>(f, pt, 7);
    auto a = compute_K(rp.X, rp.V, 2, 0);
    auto b = compute_K_direct(rp.X, rp.V, 2, 0);
    CHECK(all_zero(a.normality_residual));
    CHECK(all_zero(b.normality_residual));
    for (std::size_t i = 0; i < a.K.size(); ++i)
      for (int r = 0; r < 2; ++r)
        for (int col = 0; col < 2; ++col) CHECK(a.K[i][r][col].equals(b.K[i][r][col]));
    for (auto& x : a.x_residual) CHECK(x.is_zero());
  }
}

TEST_CASE("two transversals give normal frames differing by an X-constant factor") {
  PairFields f = ode(2, 1, {"x[1,1]^2 + t*x[0,1]"});
  Point pt{Rational(1, 3), 1, 2, -1};
  auto rp = realize<Rational>(f, pt, 8);
  M H = compute_H(rp.X, rp.V, 2);
  M G1 = normal_frame(rp.X, H, 2, 0);
  M G2 = normal_frame(rp.X, H, 2, 1);  // x[0,1]: X-component x[1,1] = 2 at the point
  J ratio = G1[0][0] * G2[0][0].inverse();
  CHECK(derivative(rp.X, ratio).is_zero());
}

TEST_CASE("K examples") {
  Point o(5, 0);
  for (auto [k, m] : {std::pair{3, 1}, std::pair{2, 2}, std::pair{4, 1}}) {
    PairFields t = ode(k, m, std::vector<std::string>(m, "0"));
    auto rp = realize<Rational>(t, Point(t.n, 0), 2 * k + 2);
    auto K = compute_K(rp.X, rp.V, k, 0);
    for (auto& Ki : K.K) CHECK(all_zero(Ki));
  }
  auto four = realize<Rational>(ode(3, 1, {"x[0,1]"}), Point{Rational(1, 2), 3, -1, 2, 7}, 9);
  auto K = compute_K(four.X, four.V, 3, 0);
  CHECK(K.K[0][0][0].equals(J::constant(four.chart, -1, K.order)));
  CHECK(K.K[1][0][0].is_zero());
  CHECK(K.K[2][0][0].is_zero());
  CHECK(K.x_residual[0].is_zero());
  CHECK(K.order >= 2);
}

TEST_CASE("geodesic K0 reproduces the curvature oracle") {
  PairSpec g = parse_problem_file(R"(pair "geo" { kind = "geodesic" m = 2 Gamma[1][2][2] = "x[0,1]" })");
  Point p{0, 0, 0, 0, 1};
  auto rp = realize<Rational>(build_pair(g), p, 4);
  auto K = compute_K(rp.X, rp.V, 1, 0);
  auto oracle = curvature_oracle(g, p);
  CHECK(K.K[0][0][0].constant_term() == 1);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(K.K[0][i][j].constant_term() == oracle[i][j]);

  // an asymmetric curvature matrix pins down the index convention
  PairSpec g2 = parse_problem_file(R"(pair "geo2" {
  kind = "geodesic" m = 2
  Gamma[1][1][2] = "x[0,2]"  Gamma[2][2][2] = "x[0,1] + 2*x[0,2]"  Gamma[1][1][1] = "1/3*x[0,1]"
})");
  Point p2{0, 1, Rational(-1, 2), 2, 3};
  auto rp2 = realize<Rational>(build_pair(g2), p2, 4);
  auto K2 = compute_K(rp2.X, rp2.V, 1, 0);
  auto o2 = curvature_oracle(g2, p2);
  CHECK(o2[0][1] != o2[1][0]);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(K2.K[0][i][j].constant_term() == o2[i][j]);
}

TEST_CASE("Schwarzian examples") {
  auto c = make_chart({"t"});
  F dt = F::coordinate(c, 0, 4);
  CHECK(schwarzian(dt, J::constant(c, 5, 4)).is_zero());
  J f = evaluate_jet<Rational>(*parse_expression("1 + t^2"), c, {Rational(0)}, 4);
  CHECK(schwarzian(dt, f).constant_term() == 4);
}

TEST_CASE("trace transformation law") {
  CHECK(c_k(2) == -1);
  CHECK(c_k(3) == Rational(-5, 2));
  auto four = realize<Rational>(ode(3, 1, {"x[0,1]"}), Point(5, 0), 10);
  J one = J::constant(four.chart, 1, 10);
  auto id = trace_transform_check(four.X, four.V, one, 3, 0);
  CHECK(id.left.equals(id.right));
  J f = evaluate_jet<Rational>(*parse_expression("1 + t^2"), four.chart, convert_point<Rational>(Point(5, 0)), 10);
  auto tc = trace_transform_check(four.X, four.V, f, 3, 0);
  CHECK(tc.right.constant_term() == 10);
  CHECK(tc.left.equals(tc.right));
  CHECK(tc.left.order() >= 2);
}

TEST_CASE("projective scaling") {
  auto four = realize<Rational>(ode(3, 1, {"x[0,1]"}), Point(5, 0), 10);
  auto K = compute_K(four.X, four.V, 3, 0);
  J f = projective_scaling(four.X, K.trace, 3, 1, 0);
  CHECK(f.equals(J::constant(four.chart, 1, f.order())));

  PairFields p = ode(2, 1, {"x[1,1]^2 + t*x[2,1]"});
  Point pt{0, 1, Rational(1, 2), -1};
  auto rp = realize<Rational>(p, pt, 12);
  auto K2 = compute_K(rp.X, rp.V, 2, 0);
  CHECK_FALSE(K2.trace.is_zero());
  J g = projective_scaling(rp.X, K2.trace, 2, 1, 0);
  CHECK(g.constant_term() == 1);
  CHECK(derivative(rp.X, g).constant_term() == 0);
  auto Kf = compute_K(rp.X.times(g), rp.V, 2, 0);
  CHECK(Kf.trace.is_zero());
  CHECK(Kf.trace.order() >= 1);
}

TEST_CASE("normalized invariants and triviality") {
  NormalizationOptions opt;
  opt.order = 2;
  auto t = normalized_invariants<Rational>(ode(3, 1, {"0"}), Point(5, 0), opt);
  for (auto& Ki : t.normalized.K) CHECK(all_zero(Ki));
  CHECK(t.transversal == "t");

  auto four = normalized_invariants<Rational>(ode(3, 1, {"x[0,1]"}), Point(5, 0), opt);
  CHECK(four.normalized.K[0][0][0].equals(J::constant(four.normalized.K[0][0][0].chart_ptr(), -1, 2)));
  CHECK(four.f.equals(J::constant(four.f.chart_ptr(), 1, 2)));

  opt.order = 1;
  std::vector<Point> pts{Point(5, 0), Point{1, 0, 0, 0, 0}};
  auto flat = triviality_test<Rational>(ode(3, 1, {"0"}), pts, opt);
  CHECK(flat.flat);
  auto nf = triviality_test<Rational>(ode(3, 1, {"x[0,1]"}), pts, opt);
  CHECK_FALSE(nf.flat);
  REQUIRE_FALSE(nf.witnesses.empty());
  CHECK(nf.witnesses[0].index == 0);

  PairSpec gen = parse_problem_file(R"(pair "mixed" {
  kind = "generic" m = 2 dim = 7
  vars = ["t", "a1", "a2", "b1", "b2", "c1", "c2"]
  X = ["1", "b1", "b2", "c1", "c2", "0", "0"]
  V[1] = ["0", "0", "0", "0", "0", "2", "1"]
  V[2] = ["0", "0", "0", "0", "0", "1", "1"]
})");
  auto gflat = triviality_test<Rational>(build_pair(gen), {Point(7, 0)}, opt);
  CHECK(gflat.flat);
}

TEST_CASE("transversal invariance of normalized invariants") {
  PairFields p = ode(2, 1, {"x[1,1]^2 + t*x[2,1] - x[0,1]"});
  Point pt{Rational(1, 2), 1, 2, Rational(-1, 3)};
  NormalizationOptions a, b;
  a.order = 0;
  b.order = 0;
  b.transversal = "x[0,1]";
  auto ra = normalized_invariants<Rational>(p, pt, a);
  auto rb = normalized_invariants<Rational>(p, pt, b);
  CHECK(rb.transversal == "x[0,1]");
  for (std::size_t i = 0; i < ra.normalized.K.size(); ++i)
    CHECK(ra.normalized.K[i][0][0].constant_term() == rb.normalized.K[i][0][0].constant_term());
}

TEST_CASE("Schwarzian along a reparametrized trajectory") {
  auto pair = build_pair(make_ode_spec(2, 1, {"x[1,1]^2 - t*x[0,1]"}, ScalarMode::floating));
  Point pt{0, Rational(1, 2), -1, Rational(1, 3)};
  auto chk = schwarzian_trajectory_check(pair, pt, parse_expression("1 + t^2 + x[0,1]*x[1,1]/3"));
  REQUIRE(chk.samples.size() == 10);
  CHECK(chk.ok);
  CHECK(chk.max_rel_error < 1e-6);
  CHECK(chk.samples[0].s == 0);
  CHECK(chk.samples[9].tau > chk.samples[0].tau);
}

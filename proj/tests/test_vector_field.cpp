#include <doctest.h>

#include "jetgeom/vector_field.hpp"
#include "support.hpp"

using namespace jetgeom;
using namespace jetgeom::testing;
using J = Jet<Rational>;
using F = FieldJet<Rational>;

namespace {

// Total derivative of x'''' = rhs on the chart (t, x0, x1, x2, x3) at the origin.
F fourth_order_X(const ChartPtr& c, int order, bool rhs_is_x0) {
  F x(c, order);
  x.comps[0] = J::constant(c, 1, order);
  for (std::size_t i = 1; i <= 3; ++i) x.comps[i] = J::coordinate(c, i + 1, 0, order);
  x.comps[4] = rhs_is_x0 ? J::coordinate(c, 1, 0, order) : J(c, order);
  return x;
}

F random_field(std::mt19937& rng, const ChartPtr& c, int order) {
  F f(c, order);
  for (auto& comp : f.comps) comp = random_jet(rng, c, order, 4);
  return f;
}

}  // namespace

TEST_CASE("bracket examples") {
  auto c = make_chart({"t", "x0", "x1"});
  F dt = F::coordinate(c, 0, 3);
  CHECK(lie_bracket(dt, dt).is_zero());

  F X = dt + F::coordinate(c, 1, 3).times(J::coordinate(c, 2, 0, 3));
  F Y = F::coordinate(c, 2, 3);
  F expected = -F::coordinate(c, 1, 2);
  CHECK(lie_bracket(X, Y).equals(expected));
  CHECK(lie_bracket(X, Y).order() == 2);
  CHECK_THROWS_AS(lie_bracket(F::coordinate(c, 0, 0), Y), OrderExhausted);
}

TEST_CASE("ad powers along fourth-order equations") {
  auto c = make_chart({"t", "x0", "x1", "x2", "x3"});
  F V = F::coordinate(c, 4, 6);
  F X0 = fourth_order_X(c, 6, false);
  CHECK(ad_power(X0, V, 0).equals(V));
  for (int s = 1; s <= 3; ++s) {
    F want = F::coordinate(c, 4 - s, 6 - s).scaled(s % 2 ? Rational(-1) : Rational(1));
    CHECK(ad_power(X0, V, s).equals(want));
  }
  CHECK(ad_power(X0, V, 4).is_zero());

  F X1 = fourth_order_X(c, 6, true);
  F ad4 = ad_power(X1, V, 4);
  CHECK(ad4.equals(V.truncated(2)));

  std::vector<F> frame{X1};
  for (int s = 0; s <= 3; ++s) frame.push_back(ad_power(X1, V, s));
  auto ex = frame_expand(ad4, frame);
  for (std::size_t s = 0; s < frame.size(); ++s) CHECK(ex.coefficients[s].equals(J::constant(c, s == 1 ? 1 : 0, 2)));

  auto self = frame_expand(frame[3], frame);
  for (std::size_t s = 0; s < frame.size(); ++s) CHECK(self.coefficients[s].equals(J::constant(c, s == 3 ? 1 : 0, 2)));
}

TEST_CASE("property: antisymmetry, bilinearity, Jacobi (200 cases)") {
  std::mt19937 rng(31);
  auto c = numbered_chart(3);
  int failures = 0;
  for (int trial = 0; trial < 200; ++trial) {
    F a = random_field(rng, c, 4), b = random_field(rng, c, 4), d = random_field(rng, c, 4);
    Rational s = random_rational(rng);
    failures += !lie_bracket(a, b).equals(-lie_bracket(b, a));
    failures += !lie_bracket(a.scaled(s) + d, b).equals(lie_bracket(a, b).scaled(s) + lie_bracket(d, b));
    F jac = lie_bracket(a, lie_bracket(b, d)) + lie_bracket(b, lie_bracket(d, a)) + lie_bracket(d, lie_bracket(a, b));
    failures += !jac.is_zero();
  }
  CHECK(failures == 0);
}

TEST_CASE("property: frame expansion round trip is exact (200 cases)") {
  std::mt19937 rng(8);
  auto c = numbered_chart(3);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<F> frame;
    for (std::size_t s = 0; s < 3; ++s) {
      F f = random_field(rng, c, 3);
      // identity constant part keeps the frame regular; higher terms stay random
      for (std::size_t r = 0; r < 3; ++r)
        f.comps[r] -= J::constant(c, f.comps[r].constant_term() - Rational(r == s ? 1 : 0), 3);
      frame.push_back(f);
    }
    F target = random_field(rng, c, 3);
    auto ex = frame_expand(target, frame);
    CHECK(combine(frame, ex.coefficients).equals(target));
    ++checked;
  }
  CHECK(checked == 200);
}

TEST_CASE("span rank") {
  auto c = numbered_chart(4);
  std::vector<F> units{F::coordinate(c, 0, 2), F::coordinate(c, 1, 2)};
  CHECK(span_rank(units) == 2);
  CHECK(span_rank(std::vector<F>{units[0], units[0]}) == 1);

  std::mt19937 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<F> v{random_field(rng, c, 2), random_field(rng, c, 2), random_field(rng, c, 2)};
    Rational a = random_rational(rng);
    std::vector<F> w{v[0] + v[1].scaled(a), v[1], v[2].scaled(Rational(2)) - v[0]};
    CHECK(span_rank(v) == span_rank(w));
  }
}

TEST_CASE("Cauchy characteristic examples") {
  auto c = make_chart({"z", "q", "p"});
  CHECK(cauchy_characteristic_rank(std::vector<F>{F::coordinate(c, 1, 2), F::coordinate(c, 2, 2)}).rank == 2);
  F dp = F::coordinate(c, 2, 2) + F::coordinate(c, 0, 2).times(J::coordinate(c, 1, 0, 2));
  auto contact = cauchy_characteristic_rank(std::vector<F>{F::coordinate(c, 1, 2), dp});
  CHECK(contact.rank == 0);

  // V^1 = span(X, V, adV) for x'''' = 0: characteristic part is V
  auto e = make_chart({"t", "x0", "x1", "x2", "x3"});
  F X = fourth_order_X(e, 4, false), V = F::coordinate(e, 4, 4);
  auto ch = cauchy_characteristic_rank(std::vector<F>{X, V, lie_bracket(X, V)});
  CHECK(ch.rank == 1);
  REQUIRE(ch.basis.size() == 1);
  CHECK(ch.basis[0][0] == 0);
  CHECK(ch.basis[0][2] == 0);

  CHECK(bracket_closure_defect(std::vector<F>{F::coordinate(c, 1, 2), dp}) == 1);
  CHECK(bracket_closure_defect(std::vector<F>{V, lie_bracket(X, V)}) == 0);
}

#pragma once

// Shared random generators for property tests.

#include <random>
#include <string>
#include <vector>

#include "jetgeom/jet.hpp"

namespace jetgeom::testing {

inline Rational random_rational(std::mt19937& rng, int num_range = 5, int den_range = 3) {
  std::uniform_int_distribution<int> num(-num_range, num_range);
  std::uniform_int_distribution<int> den(1, den_range);
  Rational q(num(rng), den(rng));
  q.canonicalize();
  return q;
}

/// Random sparse jet: `terms` monomials of degree <= order with small rational coefficients.
inline Jet<Rational> random_jet(std::mt19937& rng, const ChartPtr& chart, int order, int terms = 6,
                                bool nonzero_constant = false) {
  std::uniform_int_distribution<int> deg(0, order);
  std::uniform_int_distribution<std::size_t> var(0, chart->dim() - 1);
  std::vector<Jet<Rational>::Term> t;
  for (int i = 0; i < terms; ++i) {
    Monomial m;
    int d = deg(rng);
    for (int j = 0; j < d; ++j) {
      auto v = var(rng);
      m.set(v, m[v] + 1);
    }
    t.emplace_back(m, random_rational(rng));
  }
  auto j = Jet<Rational>::from_terms(chart, order, std::move(t));
  if (nonzero_constant && j.constant_term() == 0) j += Jet<Rational>::constant(chart, 1, order);
  return j;
}

inline ChartPtr numbered_chart(std::size_t dim, const std::string& prefix = "u") {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < dim; ++i) names.push_back(prefix + std::to_string(i));
  return make_chart(names);
}

}  // namespace jetgeom::testing

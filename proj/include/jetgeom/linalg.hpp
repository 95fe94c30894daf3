#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "jetgeom/scalar.hpp"

namespace jetgeom {

template <class S>
using ScalarMatrix = std::vector<std::vector<S>>;

/// Row-reduces `m` in place (column-pivoted in float mode) and returns the
/// pivot columns. Float mode treats entries below `tol * max|entry|` as zero.
template <class S>
std::vector<std::size_t> row_reduce(ScalarMatrix<S>& m, double tol = kDefaultFloatTolerance) {
  std::vector<std::size_t> pivots;
  if (m.empty()) return pivots;
  const std::size_t rows = m.size(), cols = m[0].size();
  double scale = 0.0;
  if constexpr (ScalarTraits<S>::mode == ScalarMode::floating)
    for (const auto& r : m)
      for (double x : r) scale = std::max(scale, std::fabs(x));
  const double thresh = tol * std::max(scale, 1e-300);
  auto negligible = [&](const S& x) {
    if constexpr (ScalarTraits<S>::mode == ScalarMode::rational)
      return sgn(x) == 0;
    else
      return std::fabs(x) <= thresh;
  };
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t best = rows;
    for (std::size_t i = r; i < rows; ++i) {
      if (negligible(m[i][c])) continue;
      if (best == rows) best = i;
      if constexpr (ScalarTraits<S>::mode == ScalarMode::floating)
        if (std::fabs(m[i][c]) > std::fabs(m[best][c])) best = i;
      if constexpr (ScalarTraits<S>::mode == ScalarMode::rational) break;
    }
    if (best == rows) continue;
    std::swap(m[r], m[best]);
    const S inv = ScalarTraits<S>::from_int(1) / m[r][c];
    for (std::size_t j = c; j < cols; ++j) m[r][j] *= inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || negligible(m[i][c])) continue;
      const S f = m[i][c];
      for (std::size_t j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

template <class S>
std::size_t scalar_rank(ScalarMatrix<S> m, double tol = kDefaultFloatTolerance) {
  return row_reduce(m, tol).size();
}

/// Basis of {x : m x = 0}.
template <class S>
std::vector<std::vector<S>> scalar_nullspace(ScalarMatrix<S> m, std::size_t cols, double tol = kDefaultFloatTolerance) {
  if (m.empty()) {
    std::vector<std::vector<S>> basis;
    for (std::size_t c = 0; c < cols; ++c) {
      std::vector<S> e(cols, ScalarTraits<S>::from_int(0));
      e[c] = ScalarTraits<S>::from_int(1);
      basis.push_back(e);
    }
    return basis;
  }
  auto pivots = row_reduce(m, tol);
  std::vector<bool> is_pivot(cols, false);
  for (auto p : pivots) is_pivot[p] = true;
  std::vector<std::vector<S>> basis;
  for (std::size_t free = 0; free < cols; ++free) {
    if (is_pivot[free]) continue;
    std::vector<S> x(cols, ScalarTraits<S>::from_int(0));
    x[free] = ScalarTraits<S>::from_int(1);
    for (std::size_t i = 0; i < pivots.size(); ++i) x[pivots[i]] = -m[i][free];
    basis.push_back(std::move(x));
  }
  return basis;
}

/// Characteristic polynomial coefficients of a square matrix, highest degree
/// first (monic), via the Faddeev-LeVerrier recursion.
template <class S>
std::vector<S> characteristic_polynomial(const ScalarMatrix<S>& a) {
  const std::size_t n = a.size();
  std::vector<S> coeffs{ScalarTraits<S>::from_int(1)};
  ScalarMatrix<S> m(n, std::vector<S>(n, ScalarTraits<S>::from_int(0)));
  for (std::size_t k = 1; k <= n; ++k) {
    // m_k = a m_{k-1} + c_{k-1} I,  c_k = -tr(a m_k) / k
    ScalarMatrix<S> next(n, std::vector<S>(n, ScalarTraits<S>::from_int(0)));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        S acc = ScalarTraits<S>::from_int(0);
        for (std::size_t l = 0; l < n; ++l) acc += a[i][l] * m[l][j];
        if (i == j) acc += coeffs.back();
        next[i][j] = acc;
      }
    m = std::move(next);
    S tr = ScalarTraits<S>::from_int(0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < n; ++l) tr += a[i][l] * m[l][i];
    coeffs.push_back(-tr / ScalarTraits<S>::from_int(static_cast<long>(k)));
  }
  return coeffs;
}

}  // namespace jetgeom

#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "jetgeom/errors.hpp"
#include "jetgeom/scalar.hpp"

namespace jetgeom {

inline constexpr std::size_t kMaxVars = 32;
/// Upper bound for any truncation order (exponents are stored in one byte).
inline constexpr int kMaxOrder = 250;

/// Ordered list of chart variable names, optional per-variable degree caps
/// and the float-mode comparison tolerance. Shared by every jet on the chart.
class Chart {
 public:
  explicit Chart(std::vector<std::string> names, std::vector<int> caps = {},
                 double tolerance = kDefaultFloatTolerance);

  std::size_t dim() const { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<std::size_t> find(const std::string& name) const;
  std::size_t index(const std::string& name) const;

  bool has_caps() const { return !capped_.empty(); }
  /// Degree cap of variable `v`, or -1 when uncapped.
  int cap(std::size_t v) const { return caps_.empty() ? -1 : caps_[v]; }
  const std::vector<std::size_t>& capped_vars() const { return capped_; }
  double tolerance() const { return tolerance_; }

  bool same_as(const Chart& other) const;

 private:
  std::vector<std::string> names_;
  std::vector<int> caps_;
  std::vector<std::size_t> capped_;
  double tolerance_;
};

using ChartPtr = std::shared_ptr<const Chart>;

ChartPtr make_chart(std::vector<std::string> names, std::vector<int> caps = {},
                    double tolerance = kDefaultFloatTolerance);

/// Exponent vector packed one byte per variable. Variable 0 sits in the most
/// significant byte of word 0 so that word comparison is lexicographic.
class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(const std::vector<int>& exponents);
  static Monomial unit(std::size_t var);

  int operator[](std::size_t i) const {
    return static_cast<int>((words_[i / 8] >> (56 - 8 * (i % 8))) & 0xffu);
  }
  void set(std::size_t i, int e);
  int degree() const { return degree_; }
  std::vector<int> exponents(std::size_t dim) const;

  /// Caller guarantees every summed exponent stays below 256.
  Monomial operator+(const Monomial& o) const {
    Monomial r;
    for (std::size_t w = 0; w < words_.size(); ++w) r.words_[w] = words_[w] + o.words_[w];
    r.degree_ = degree_ + o.degree_;
    return r;
  }

  friend bool operator==(const Monomial& a, const Monomial& b) { return a.words_ == b.words_; }
  friend bool operator!=(const Monomial& a, const Monomial& b) { return !(a == b); }
  /// Graded lexicographic: lower degree first, then x0 > x1 > ... within a degree.
  friend bool operator<(const Monomial& a, const Monomial& b) {
    if (a.degree_ != b.degree_) return a.degree_ < b.degree_;
    return a.words_ > b.words_;
  }

  std::size_t hash() const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    for (auto w : words_) h = (h ^ w) * 0x100000001b3ull + (h >> 29);
    return static_cast<std::size_t>(h);
  }

 private:
  std::array<std::uint64_t, kMaxVars / 8> words_{};
  int degree_ = 0;
};

struct MonomialHash {
  std::size_t operator()(const Monomial& m) const { return m.hash(); }
};

/// Truncated multivariate Taylor expansion at a point, in the displacement
/// variables of a chart. Coefficients of degree above `order()` are unknown;
/// stored coefficients are always nonzero and sorted graded-lex.
///
/// On charts with degree caps each capped variable also carries a validity
/// degree: coefficients with a larger exponent in that variable are unknown.
template <class S>
class Jet {
 public:
  using Term = std::pair<Monomial, S>;

  Jet() = default;
  Jet(ChartPtr chart, int order);

  static Jet constant(ChartPtr chart, const S& value, int order);
  /// The coordinate function `value + d_var`.
  static Jet coordinate(ChartPtr chart, std::size_t var, const S& value, int order);
  static Jet monomial(ChartPtr chart, const Monomial& m, const S& coeff, int order);
  /// Terms may be unsorted and contain duplicates; they are merged.
  static Jet from_terms(ChartPtr chart, int order, std::vector<Term> terms);

  const ChartPtr& chart_ptr() const { return chart_; }
  const Chart& chart() const { return *chart_; }
  int order() const { return order_; }
  const std::vector<Term>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }

  S constant_term() const;
  S coefficient(const Monomial& m) const;
  bool is_zero() const { return terms_.empty(); }
  /// Zero up to the float tolerance (exact in rational mode).
  bool is_negligible() const;
  bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_[0].first.degree() == 0); }
  /// Lowest stored degree (order()+1 for the zero jet).
  int valuation() const;

  /// Validity degree of capped variable `v` (kMaxOrder when uncapped).
  int cap_validity(std::size_t v) const;
  /// Smallest validity over all capped variables (kMaxOrder when none).
  int min_cap_validity() const;

  Jet truncated(int order) const;
  Jet with_order(int order) const { return truncated(order); }

  Jet operator-() const;
  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const S& s);

  Jet scaled(const S& s) const;
  Jet partial(std::size_t var) const;
  /// Antiderivative in `var` vanishing where the displacement of `var` is zero.
  Jet integral(std::size_t var) const;
  /// Keeps only the terms whose exponent in `var` equals `degree`.
  Jet slice(std::size_t var, int degree) const;
  Jet inverse() const;
  Jet pow(int exponent) const;

  /// Exact equality of all coefficients up to min(order, limit).
  bool equals(const Jet& o, int limit = kMaxOrder) const;

  // Internal: direct access used by the arithmetic kernels.
  std::vector<Term>& mutable_terms() { return terms_; }
  std::vector<int>& mutable_caps() { return capv_; }
  const std::vector<int>& caps_validity() const { return capv_; }
  void set_order(int order) { order_ = order; }

 private:
  ChartPtr chart_;
  int order_ = 0;
  std::vector<Term> terms_;
  std::vector<int> capv_;  // per-variable validity; empty when the chart is uncapped
};

template <class S>
Jet<S> operator+(Jet<S> a, const Jet<S>& b) {
  a += b;
  return a;
}
template <class S>
Jet<S> operator-(Jet<S> a, const Jet<S>& b) {
  a -= b;
  return a;
}
template <class S>
Jet<S> operator*(const Jet<S>& a, const Jet<S>& b);
template <class S>
Jet<S> operator*(const Jet<S>& a, const S& s) {
  return a.scaled(s);
}
template <class S>
Jet<S> operator*(const S& s, const Jet<S>& a) {
  return a.scaled(s);
}

template <class S>
inline Jet<S> jet_mul(const Jet<S>& a, const Jet<S>& b) {
  return a * b;
}
template <class S>
inline Jet<S> jet_invert(const Jet<S>& a) {
  return a.inverse();
}
template <class S>
inline Jet<S> jet_partial(const Jet<S>& a, std::size_t var) {
  return a.partial(var);
}

template <class S>
using JetMatrix = std::vector<std::vector<Jet<S>>>;

/// Solves A X = B by Gaussian elimination over the jet ring. Pivots must have
/// invertible constant terms; B holds one right-hand side per column.
template <class S>
JetMatrix<S> jet_linear_solve(JetMatrix<S> a, JetMatrix<S> b);

template <class S>
std::vector<Jet<S>> jet_linear_solve(const JetMatrix<S>& a, const std::vector<Jet<S>>& b);

template <class S>
JetMatrix<S> jet_matrix_inverse(const JetMatrix<S>& a);

template <class S>
JetMatrix<S> jet_matrix_mul(const JetMatrix<S>& a, const JetMatrix<S>& b);

template <class S>
JetMatrix<S> jet_identity(ChartPtr chart, std::size_t n, int order);

/// Re-expresses a jet on a larger chart; `var_map[i]` is the index in `target`
/// of source variable i.
template <class S>
Jet<S> embed(const Jet<S>& a, ChartPtr target, const std::vector<std::size_t>& var_map, int order);

/// Sum of order(.) - style lower bound over a matrix.
template <class S>
int min_order(const JetMatrix<S>& m);

}  // namespace jetgeom

#pragma once

#include <vector>

#include "jetgeom/jet.hpp"
#include "jetgeom/linalg.hpp"

namespace jetgeom {

/// Vector field germ: one coefficient jet per chart direction.
template <class S>
struct FieldJet {
  ChartPtr chart;
  std::vector<Jet<S>> comps;

  FieldJet() = default;
  FieldJet(ChartPtr c, int order);
  FieldJet(ChartPtr c, std::vector<Jet<S>> components);
  /// Coordinate field d/d(var).
  static FieldJet coordinate(ChartPtr c, std::size_t var, int order);

  std::size_t dim() const { return comps.size(); }
  int order() const;
  std::vector<S> value_at_point() const;
  bool is_zero() const;
  bool equals(const FieldJet& o, int limit = kMaxOrder) const;
  FieldJet truncated(int order) const;

  FieldJet& operator+=(const FieldJet& o);
  FieldJet& operator-=(const FieldJet& o);
  FieldJet operator-() const;
  FieldJet scaled(const S& s) const;
  /// Multiplication by a function germ.
  FieldJet times(const Jet<S>& f) const;
};

template <class S>
FieldJet<S> operator+(FieldJet<S> a, const FieldJet<S>& b) {
  a += b;
  return a;
}
template <class S>
FieldJet<S> operator-(FieldJet<S> a, const FieldJet<S>& b) {
  a -= b;
  return a;
}

/// X(f) = sum_j X^j d_j f.
template <class S>
Jet<S> derivative(const FieldJet<S>& x, const Jet<S>& f);

template <class S>
FieldJet<S> lie_bracket(const FieldJet<S>& x, const FieldJet<S>& y);

/// ad_X^i Y.
template <class S>
FieldJet<S> ad_power(const FieldJet<S>& x, const FieldJet<S>& y, int i);

/// Sum of coefficients[s] * frame[s].
template <class S>
FieldJet<S> combine(const std::vector<FieldJet<S>>& frame, const std::vector<Jet<S>>& coefficients);

template <class S>
struct FrameExpansion {
  std::vector<FieldJet<S>> frame;
  std::vector<Jet<S>> coefficients;
};

template <class S>
FrameExpansion<S> frame_expand(const FieldJet<S>& target, const std::vector<FieldJet<S>>& frame);

/// Expands several targets against one frame with a single elimination.
template <class S>
std::vector<std::vector<Jet<S>>> frame_expand_many(const std::vector<FieldJet<S>>& targets,
                                                   const std::vector<FieldJet<S>>& frame);

/// Matrix with one column per field holding its value at the point.
template <class S>
ScalarMatrix<S> point_matrix(const std::vector<FieldJet<S>>& fields);

template <class S>
std::size_t span_rank(const std::vector<FieldJet<S>>& vectors);

template <class S>
struct CauchyCharacteristic {
  std::size_t rank = 0;
  /// Each basis element is a coefficient vector a over the spanning list;
  /// sum_s a_s W_s is characteristic at the point.
  std::vector<std::vector<S>> basis;
};

/// Pointwise Cauchy characteristic of span(W): combinations Y of the spanning
/// fields with constant coefficients such that [Y, W_t](p) lies in span W(p).
template <class S>
CauchyCharacteristic<S> cauchy_characteristic_rank(const std::vector<FieldJet<S>>& spanning);

/// Largest rank defect found when testing [W_s, W_t](p) in span W(p) for all
/// pairs; 0 means bracket-closed at the point.
template <class S>
std::size_t bracket_closure_defect(const std::vector<FieldJet<S>>& spanning);

}  // namespace jetgeom

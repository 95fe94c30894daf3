#include "jetgeom/vector_field.hpp"

#include <algorithm>

namespace jetgeom {

template <class S>
FieldJet<S>::FieldJet(ChartPtr c, int order) : chart(std::move(c)) {
  comps.assign(chart->dim(), Jet<S>(chart, order));
}

template <class S>
FieldJet<S>::FieldJet(ChartPtr c, std::vector<Jet<S>> components) : chart(std::move(c)), comps(std::move(components)) {
  if (comps.size() != chart->dim()) throw ChartMismatch("field component count does not match chart dimension");
}

template <class S>
FieldJet<S> FieldJet<S>::coordinate(ChartPtr c, std::size_t var, int order) {
  FieldJet f(c, order);
  f.comps[var] = Jet<S>::constant(c, ScalarTraits<S>::from_int(1), order);
  return f;
}

template <class S>
int FieldJet<S>::order() const {
  int o = kMaxOrder;
  for (const auto& c : comps) o = std::min(o, c.order());
  return o;
}

template <class S>
std::vector<S> FieldJet<S>::value_at_point() const {
  std::vector<S> v;
  v.reserve(comps.size());
  for (const auto& c : comps) v.push_back(c.constant_term());
  return v;
}

template <class S>
bool FieldJet<S>::is_zero() const {
  return std::all_of(comps.begin(), comps.end(), [](const Jet<S>& c) { return c.is_zero(); });
}

template <class S>
bool FieldJet<S>::equals(const FieldJet& o, int limit) const {
  if (comps.size() != o.comps.size()) return false;
  for (std::size_t i = 0; i < comps.size(); ++i)
    if (!comps[i].equals(o.comps[i], limit)) return false;
  return true;
}

template <class S>
FieldJet<S> FieldJet<S>::truncated(int order) const {
  FieldJet r = *this;
  for (auto& c : r.comps) c = c.truncated(order);
  return r;
}

template <class S>
FieldJet<S>& FieldJet<S>::operator+=(const FieldJet& o) {
  for (std::size_t i = 0; i < comps.size(); ++i) comps[i] += o.comps.at(i);
  return *this;
}

template <class S>
FieldJet<S>& FieldJet<S>::operator-=(const FieldJet& o) {
  for (std::size_t i = 0; i < comps.size(); ++i) comps[i] -= o.comps.at(i);
  return *this;
}

template <class S>
FieldJet<S> FieldJet<S>::operator-() const {
  FieldJet r = *this;
  for (auto& c : r.comps) c = -c;
  return r;
}

template <class S>
FieldJet<S> FieldJet<S>::scaled(const S& s) const {
  FieldJet r = *this;
  for (auto& c : r.comps) c *= s;
  return r;
}

template <class S>
FieldJet<S> FieldJet<S>::times(const Jet<S>& f) const {
  FieldJet r = *this;
  for (auto& c : r.comps) c = c * f;
  return r;
}

template <class S>
Jet<S> derivative(const FieldJet<S>& x, const Jet<S>& f) {
  if (f.order() < 1) throw OrderExhausted("derivative of an order-0 jet");
  Jet<S> r(f.chart_ptr(), std::min(x.order(), f.order() - 1));
  if (f.is_constant()) return r;
  for (std::size_t j = 0; j < x.comps.size(); ++j) {
    if (x.comps[j].is_zero()) continue;
    r += x.comps[j] * f.partial(j);
  }
  return r;
}

template <class S>
FieldJet<S> lie_bracket(const FieldJet<S>& x, const FieldJet<S>& y) {
  const int order = std::min(x.order(), y.order()) - 1;
  if (order < 0) throw OrderExhausted("Lie bracket of order-0 fields");
  FieldJet<S> r(x.chart, order);
  for (std::size_t i = 0; i < r.comps.size(); ++i) {
    if (!y.comps[i].is_constant()) r.comps[i] += derivative(x, y.comps[i]);
    if (!x.comps[i].is_constant()) r.comps[i] -= derivative(y, x.comps[i]);
    r.comps[i] = r.comps[i].truncated(order);
  }
  return r;
}

template <class S>
FieldJet<S> ad_power(const FieldJet<S>& x, const FieldJet<S>& y, int i) {
  FieldJet<S> r = y;
  for (int s = 0; s < i; ++s) r = lie_bracket(x, r);
  return r;
}

template <class S>
FieldJet<S> combine(const std::vector<FieldJet<S>>& frame, const std::vector<Jet<S>>& coefficients) {
  FieldJet<S> r(frame.at(0).chart, kMaxOrder);
  for (std::size_t s = 0; s < frame.size(); ++s) {
    if (coefficients[s].is_zero()) {
      for (auto& c : r.comps) c = c.truncated(coefficients[s].order());
      continue;
    }
    r += frame[s].times(coefficients[s]);
  }
  return r;
}

namespace {

template <class S>
JetMatrix<S> column_matrix(const std::vector<FieldJet<S>>& frame) {
  const std::size_t n = frame.at(0).dim();
  JetMatrix<S> a(n);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& f : frame) a[i].push_back(f.comps[i]);
  return a;
}

}  // namespace

template <class S>
std::vector<std::vector<Jet<S>>> frame_expand_many(const std::vector<FieldJet<S>>& targets,
                                                   const std::vector<FieldJet<S>>& frame) {
  if (frame.size() != frame.at(0).dim()) throw Error("frame size must equal the chart dimension");
  const std::size_t n = frame.size();
  JetMatrix<S> b(n);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& t : targets) b[i].push_back(t.comps[i]);
  JetMatrix<S> x = jet_linear_solve(column_matrix(frame), std::move(b));
  std::vector<std::vector<Jet<S>>> out(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t)
    for (std::size_t s = 0; s < n; ++s) out[t].push_back(x[s][t]);
  return out;
}

template <class S>
FrameExpansion<S> frame_expand(const FieldJet<S>& target, const std::vector<FieldJet<S>>& frame) {
  return {frame, frame_expand_many(std::vector<FieldJet<S>>{target}, frame)[0]};
}

template <class S>
ScalarMatrix<S> point_matrix(const std::vector<FieldJet<S>>& fields) {
  const std::size_t n = fields.at(0).dim();
  ScalarMatrix<S> m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& f : fields) m[i].push_back(f.comps[i].constant_term());
  return m;
}

template <class S>
std::size_t span_rank(const std::vector<FieldJet<S>>& vectors) {
  if (vectors.empty()) return 0;
  return scalar_rank(point_matrix(vectors), vectors[0].chart->tolerance());
}

namespace {

template <class S>
ScalarMatrix<S> transpose(const ScalarMatrix<S>& m) {
  if (m.empty()) return {};
  ScalarMatrix<S> t(m[0].size(), std::vector<S>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j) t[j][i] = m[i][j];
  return t;
}

}  // namespace

template <class S>
CauchyCharacteristic<S> cauchy_characteristic_rank(const std::vector<FieldJet<S>>& spanning) {
  const std::size_t count = spanning.size();
  const std::size_t n = spanning.at(0).dim();
  const double tol = spanning[0].chart->tolerance();
  ScalarMatrix<S> w = point_matrix(spanning);
  // annihilator of span W(p): row vectors omega with omega W(p) = 0
  auto annihilator = scalar_nullspace(transpose(w), n, tol);

  // brackets[s][t] evaluated at the point
  std::vector<std::vector<std::vector<S>>> br(count, std::vector<std::vector<S>>(count));
  for (std::size_t s = 0; s < count; ++s)
    for (std::size_t t = s + 1; t < count; ++t) {
      br[s][t] = lie_bracket(spanning[s], spanning[t]).value_at_point();
      br[t][s] = br[s][t];
      for (auto& v : br[t][s]) v = -v;
    }
  const S zero = ScalarTraits<S>::from_int(0);
  ScalarMatrix<S> cond;
  for (std::size_t t = 0; t < count; ++t)
    for (const auto& om : annihilator) {
      std::vector<S> row(count, zero);
      for (std::size_t s = 0; s < count; ++s) {
        if (s == t) continue;
        S acc = zero;
        for (std::size_t i = 0; i < n; ++i) acc += om[i] * br[s][t][i];
        row[s] = acc;
      }
      cond.push_back(std::move(row));
    }
  auto solutions = scalar_nullspace(cond, count, tol);

  // keep solutions whose point values are independent
  CauchyCharacteristic<S> out;
  ScalarMatrix<S> images;  // rows
  for (const auto& a : solutions) {
    std::vector<S> img(n, zero);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t s = 0; s < count; ++s) img[i] += w[i][s] * a[s];
    images.push_back(img);
    if (scalar_rank(images, tol) > out.rank) {
      ++out.rank;
      out.basis.push_back(a);
    } else {
      images.pop_back();
    }
  }
  return out;
}

template <class S>
std::size_t bracket_closure_defect(const std::vector<FieldJet<S>>& spanning) {
  std::vector<FieldJet<S>> all = spanning;
  for (std::size_t s = 0; s < spanning.size(); ++s)
    for (std::size_t t = s + 1; t < spanning.size(); ++t) all.push_back(lie_bracket(spanning[s], spanning[t]));
  return span_rank(all) - span_rank(spanning);
}

#define JETGEOM_INSTANTIATE_FIELD(S)                                                                            \
  template struct FieldJet<S>;                                                                                  \
  template Jet<S> derivative(const FieldJet<S>&, const Jet<S>&);                                                \
  template FieldJet<S> lie_bracket(const FieldJet<S>&, const FieldJet<S>&);                                     \
  template FieldJet<S> ad_power(const FieldJet<S>&, const FieldJet<S>&, int);                                   \
  template FieldJet<S> combine(const std::vector<FieldJet<S>>&, const std::vector<Jet<S>>&);                    \
  template std::vector<std::vector<Jet<S>>> frame_expand_many(const std::vector<FieldJet<S>>&,                  \
                                                              const std::vector<FieldJet<S>>&);                 \
  template FrameExpansion<S> frame_expand(const FieldJet<S>&, const std::vector<FieldJet<S>>&);                 \
  template ScalarMatrix<S> point_matrix(const std::vector<FieldJet<S>>&);                                       \
  template std::size_t span_rank(const std::vector<FieldJet<S>>&);                                              \
  template CauchyCharacteristic<S> cauchy_characteristic_rank(const std::vector<FieldJet<S>>&);                 \
  template std::size_t bracket_closure_defect(const std::vector<FieldJet<S>>&);

JETGEOM_INSTANTIATE_FIELD(Rational)
JETGEOM_INSTANTIATE_FIELD(double)

}  // namespace jetgeom

#include "jetgeom/normalization.hpp"

#include <algorithm>

#include "jetgeom/errors.hpp"

namespace jetgeom {

namespace {

template <class S>
S binom(int n, int r) {
  mpz_class b;
  mpz_bin_uiui(b.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(r));
  return ScalarTraits<S>::from_rational(Rational(b));
}

template <class S>
int matrix_order(const JetMatrix<S>& a) {
  int o = kMaxOrder;
  for (const auto& row : a)
    for (const auto& x : row) o = std::min(o, x.order());
  return o;
}

template <class S>
JetMatrix<S> mat_add(JetMatrix<S> a, const JetMatrix<S>& b, const S& scale) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j)
      if (!b[i][j].is_zero()) {
        a[i][j] += b[i][j].scaled(scale);
      } else {
        a[i][j] = a[i][j].truncated(b[i][j].order());
      }
  return a;
}

template <class S>
JetMatrix<S> mat_neg(JetMatrix<S> a) {
  for (auto& row : a)
    for (auto& x : row) x = -x;
  return a;
}

template <class S>
JetMatrix<S> mat_derivative(const FieldJet<S>& X, const JetMatrix<S>& a) {
  JetMatrix<S> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (const auto& x : a[i]) r[i].push_back(derivative(X, x));
  return r;
}

template <class S>
const S& one() {
  static const S v = ScalarTraits<S>::from_int(1);
  return v;
}

}  // namespace

template <class S>
JetVector<S> transport_jet(const FieldJet<S>& X, const std::function<JetVector<S>(const JetVector<S>&)>& rhs,
                           JetVector<S> initial, std::size_t tau) {
  const ChartPtr& chart = X.chart;
  Jet<S> inv;
  try {
    inv = X.comps.at(tau).inverse();
  } catch (const NotInvertible&) {
    throw NotInvertible("X(" + chart->name(tau) + ") vanishes at the point; choose another transversal");
  }
  std::vector<std::pair<std::size_t, Jet<S>>> xhat;
  for (std::size_t v = 0; v < X.comps.size(); ++v)
    if (v != tau && !X.comps[v].is_zero()) xhat.emplace_back(v, X.comps[v] * inv);
  int T = inv.order() + 1;
  for (auto& u : initial) {
    u = u.slice(tau, 0);
    T = std::min(T, u.order());
  }
  for (auto& u : initial) u = u.truncated(T);
  if (T == 0) return initial;
  JetVector<S> u = initial;
  // Picard sweeps: sweep a fixes the coefficients of tau-degree a.
  for (int sweep = 0; sweep <= T; ++sweep) {
    JetVector<S> r = rhs(u);
    JetVector<S> next;
    next.reserve(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      Jet<S> d = r[i] * inv;
      for (const auto& [v, c] : xhat) d -= c * u[i].partial(v);
      next.push_back((initial[i] + d.integral(tau)).truncated(T));
    }
    bool same = sweep > 0;
    for (std::size_t i = 0; same && i < u.size(); ++i) same = next[i].equals(u[i]) && next[i].order() == u[i].order();
    u = std::move(next);
    if (same) break;
  }
  return u;
}

template <class S>
JetVector<S> transport_linear(const FieldJet<S>& X, const JetMatrix<S>& A, const JetVector<S>& b,
                              const JetVector<S>& initial, std::size_t tau) {
  auto rhs = [&](const JetVector<S>& u) {
    JetVector<S> r;
    for (std::size_t i = 0; i < u.size(); ++i) {
      Jet<S> acc = b.empty() ? Jet<S>(X.chart, kMaxOrder) : b[i];
      for (std::size_t j = 0; j < u.size(); ++j)
        if (!A[i][j].is_zero()) acc += A[i][j] * u[j];
      acc = acc.truncated(std::min(acc.order(), matrix_order(A)));
      r.push_back(std::move(acc));
    }
    return r;
  };
  return transport_jet<S>(X, rhs, initial, tau);
}

template <class S>
AdExpansion<S> expand_top_adjoint(const FieldJet<S>& X, const std::vector<FieldJet<S>>& W, int k) {
  const std::size_t m = W.size();
  AdExpansion<S> out;
  out.frame.push_back(X);
  std::vector<FieldJet<S>> level = W;
  for (int i = 0; i <= k; ++i) {
    out.frame.insert(out.frame.end(), level.begin(), level.end());
    for (auto& f : level) f = lie_bracket(X, f);
  }
  std::vector<std::vector<Jet<S>>> coeffs;
  try {
    coeffs = frame_expand_many(level, out.frame);
  } catch (const SingularLeadingMatrix&) {
    throw RegularityFailure("(X, W, ad W, ..., ad^k W) is not a frame at the point");
  }
  out.a.assign(k + 1, JetMatrix<S>(m));
  for (std::size_t c = 0; c < m; ++c) {
    out.a_X.push_back(coeffs[c][0]);
    for (int i = 0; i <= k; ++i)
      for (std::size_t r = 0; r < m; ++r) out.a[i][r].push_back(coeffs[c][1 + i * m + r]);
  }
  return out;
}

template <class S>
JetMatrix<S> compute_H(const FieldJet<S>& X, const std::vector<FieldJet<S>>& W, int k) {
  return expand_top_adjoint(X, W, k).a[k];
}

template <class S>
JetMatrix<S> normal_frame(const FieldJet<S>& X, const JetMatrix<S>& H, int k, std::size_t tau) {
  const std::size_t m = H.size();
  const S scale = -one<S>() / ScalarTraits<S>::from_int(k + 1);
  JetMatrix<S> A(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) A[i].push_back(H[i][j].scaled(scale));
  const int init_order = matrix_order(H) + 1;
  // columns of G are transported independently: X(g_c) = A g_c
  JetMatrix<S> G(m, JetVector<S>(m));
  for (std::size_t c = 0; c < m; ++c) {
    JetVector<S> init;
    for (std::size_t r = 0; r < m; ++r)
      init.push_back(Jet<S>::constant(X.chart, r == c ? one<S>() : ScalarTraits<S>::from_int(0), init_order));
    JetVector<S> col = transport_linear<S>(X, A, {}, init, tau);
    for (std::size_t r = 0; r < m; ++r) G[r][c] = std::move(col[r]);
  }
  return G;
}

template <class S>
KResult<S> compute_K(const FieldJet<S>& X, const std::vector<FieldJet<S>>& W, int k, std::size_t tau) {
  const std::size_t m = W.size();
  AdExpansion<S> ex = expand_top_adjoint(X, W, k);
  KResult<S> out;
  out.H = ex.a[k];
  out.G = normal_frame(X, out.H, k, tau);

  // ad^{k+1}(WG) = X a_X G + sum_j (ad^j W) c_j,  c_j = a_j G + C(k+1, k+1-j) X^{k+1-j}(G)
  std::vector<JetMatrix<S>> XG{out.G};
  for (int l = 1; l <= k + 1; ++l) XG.push_back(mat_derivative(X, XG.back()));
  std::vector<JetMatrix<S>> c(k + 1);
  for (int j = 0; j <= k; ++j) c[j] = mat_add(jet_matrix_mul(ex.a[j], out.G), XG[k + 1 - j], binom<S>(k + 1, k + 1 - j));

  // ad^i(WG) = sum_l C(i,l) (ad^{i-l} W) X^l(G); back-substitute from the top level
  JetMatrix<S> Ginv = jet_matrix_inverse(out.G);
  std::vector<JetMatrix<S>> d(k + 1);
  for (int j = k; j >= 0; --j) {
    JetMatrix<S> rhs = c[j];
    for (int i = j + 1; i <= k; ++i) rhs = mat_add(rhs, jet_matrix_mul(XG[i - j], d[i]), S(-binom<S>(i, i - j)));
    d[j] = jet_matrix_mul(Ginv, rhs);
  }
  out.normality_residual = d[k];
  for (int j = 0; j < k; ++j) out.K.push_back(mat_neg(d[j]));
  for (std::size_t col = 0; col < m; ++col) {
    Jet<S> acc(X.chart, kMaxOrder);
    for (std::size_t r = 0; r < m; ++r) acc += ex.a_X[r] * out.G[r][col];
    out.x_residual.push_back(std::move(acc));
  }
  out.trace = Jet<S>(X.chart, kMaxOrder);
  for (std::size_t r = 0; r < m; ++r) out.trace += out.K[k - 1][r][r];
  out.order = kMaxOrder;
  for (const auto& Ki : out.K) out.order = std::min(out.order, matrix_order(Ki));
  return out;
}

template <class S>
KResult<S> compute_K_direct(const FieldJet<S>& X, const std::vector<FieldJet<S>>& W, int k, std::size_t tau) {
  const std::size_t m = W.size();
  KResult<S> out;
  out.H = compute_H(X, W, k);
  out.G = normal_frame(X, out.H, k, tau);
  std::vector<FieldJet<S>> V;
  for (std::size_t c = 0; c < m; ++c) {
    JetVector<S> coeffs;
    for (std::size_t r = 0; r < m; ++r) coeffs.push_back(out.G[r][c]);
    V.push_back(combine(W, coeffs));
  }
  AdExpansion<S> ex = expand_top_adjoint(X, V, k);
  out.normality_residual = ex.a[k];
  for (int j = 0; j < k; ++j) out.K.push_back(mat_neg(ex.a[j]));
  out.x_residual = ex.a_X;
  out.trace = Jet<S>(X.chart, kMaxOrder);
  for (std::size_t r = 0; r < m; ++r) out.trace += out.K[k - 1][r][r];
  out.order = kMaxOrder;
  for (const auto& Ki : out.K) out.order = std::min(out.order, matrix_order(Ki));
  return out;
}

template <class S>
Jet<S> schwarzian(const FieldJet<S>& X, const Jet<S>& f) {
  Jet<S> xf = derivative(X, f);
  Jet<S> xxf = derivative(X, xf);
  return (f * xxf).scaled(ScalarTraits<S>::from_int(2)) - xf * xf;
}

Rational c_k(int k) {
  Rational c(-k * (k + 1) * (k + 2), 24);
  c.canonicalize();
  return c;
}

template <class S>
Jet<S> projective_scaling(const FieldJet<S>& X, const Jet<S>& trace, int k, int m, std::size_t tau) {
  // f = h^2 turns 2 f X^2 f - (X f)^2 = f^2 tr / (m c_k) into X^2 h = tr h / (4 m c_k)
  const S scale = ScalarTraits<S>::from_rational(1 / (4 * m * c_k(k)));
  const Jet<S> q = trace.scaled(scale);
  const int init_order = trace.order() + 1;
  JetVector<S> init{Jet<S>::constant(X.chart, one<S>(), init_order), Jet<S>(X.chart, init_order)};
  auto rhs = [&](const JetVector<S>& u) { return JetVector<S>{u[1], q * u[0]}; };
  JetVector<S> hp = transport_jet<S>(X, rhs, init, tau);
  return hp[0] * hp[0];
}

template <class S>
TraceCheck<S> trace_transform_check(const FieldJet<S>& X, const std::vector<FieldJet<S>>& W, const Jet<S>& f, int k,
                                    std::size_t tau) {
  const int m = static_cast<int>(W.size());
  TraceCheck<S> out;
  out.left = compute_K(X.times(f), W, k, tau).trace;
  Jet<S> base = compute_K(X, W, k, tau).trace;
  out.right = f * f * base - schwarzian(X, f).scaled(ScalarTraits<S>::from_rational(m * c_k(k)));
  const int o = std::min(out.left.order(), out.right.order());
  out.left = out.left.truncated(o);
  out.right = out.right.truncated(o);
  return out;
}

#define JETGEOM_INSTANTIATE_NORM(S)                                                                               \
  template JetVector<S> transport_jet<S>(const FieldJet<S>&,                                                      \
                                         const std::function<JetVector<S>(const JetVector<S>&)>&, JetVector<S>,  \
                                         std::size_t);                                                            \
  template JetVector<S> transport_linear<S>(const FieldJet<S>&, const JetMatrix<S>&, const JetVector<S>&,         \
                                            const JetVector<S>&, std::size_t);                                    \
  template AdExpansion<S> expand_top_adjoint<S>(const FieldJet<S>&, const std::vector<FieldJet<S>>&, int);        \
  template JetMatrix<S> compute_H<S>(const FieldJet<S>&, const std::vector<FieldJet<S>>&, int);                   \
  template JetMatrix<S> normal_frame<S>(const FieldJet<S>&, const JetMatrix<S>&, int, std::size_t);               \
  template KResult<S> compute_K<S>(const FieldJet<S>&, const std::vector<FieldJet<S>>&, int, std::size_t);        \
  template KResult<S> compute_K_direct<S>(const FieldJet<S>&, const std::vector<FieldJet<S>>&, int, std::size_t); \
  template Jet<S> schwarzian<S>(const FieldJet<S>&, const Jet<S>&);                                               \
  template Jet<S> projective_scaling<S>(const FieldJet<S>&, const Jet<S>&, int, int, std::size_t);                \
  template TraceCheck<S> trace_transform_check<S>(const FieldJet<S>&, const std::vector<FieldJet<S>>&,            \
                                                  const Jet<S>&, int, std::size_t);

JETGEOM_INSTANTIATE_NORM(Rational)
JETGEOM_INSTANTIATE_NORM(double)

}  // namespace jetgeom

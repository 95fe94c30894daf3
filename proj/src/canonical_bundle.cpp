#include "jetgeom/canonical_bundle.hpp"

#include <sstream>

#include "jetgeom/errors.hpp"

namespace jetgeom {

void check_bundle_range(int k, int m) {
  if (k > 2 || (k == 2 && m > 1)) return;
  throw GatingViolation("the canonical frame requires k>2 or k=2 and m>1; got k=" + std::to_string(k) +
                        ", m=" + std::to_string(m));
}

namespace {

std::string idx2(const char* base, int a, int b) {
  return std::string(base) + "[" + std::to_string(a + 1) + "," + std::to_string(b + 1) + "]";
}

template <class S>
Jet<S> coord(const BundleChart<S>& bc, std::size_t v) {
  S value = ScalarTraits<S>::from_int(0);
  if (v == bc.f0()) value = ScalarTraits<S>::from_int(1);
  for (int p = 0; p < bc.m; ++p)
    if (v == bc.g(p, p)) value = ScalarTraits<S>::from_int(1);
  if (v < bc.n) value = ScalarTraits<S>::from_rational(bc.base_point.at(v));
  return Jet<S>::coordinate(bc.chart, v, value, kMaxOrder);
}

template <class S>
FieldJet<S> exact_zero(const ChartPtr& c) {
  return FieldJet<S>(c, kMaxOrder);
}

// Base components of [A, B]; the fiber part is not needed for expansions
// modulo X, G, F.
template <class S>
std::vector<Jet<S>> horizontal_bracket(const FieldJet<S>& a, const FieldJet<S>& b, std::size_t n) {
  const int order = std::min(a.order(), b.order()) - 1;
  if (order < 0) throw OrderExhausted("bundle bracket ran out of order");
  std::vector<Jet<S>> comps;
  comps.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Jet<S> c(a.chart, order);
    if (!b.comps[i].is_constant()) c += derivative(a, b.comps[i]);
    if (!a.comps[i].is_constant()) c -= derivative(b, a.comps[i]);
    comps.push_back(c.truncated(order));
  }
  return comps;
}

template <class S>
std::vector<Jet<S>> apply_inverse(const JetMatrix<S>& inv, const std::vector<Jet<S>>& v) {
  std::vector<Jet<S>> out;
  out.reserve(inv.size());
  for (const auto& row : inv) {
    Jet<S> acc(v.at(0).chart_ptr(), kMaxOrder);
    int order = kMaxOrder;
    for (std::size_t j = 0; j < row.size(); ++j) {
      order = std::min({order, row[j].order(), v[j].order()});
      if (row[j].is_zero() || v[j].is_zero()) continue;
      acc += row[j] * v[j];
    }
    out.push_back(acc.truncated(order));
  }
  return out;
}

template <class S>
JetMatrix<S> column_matrix(const std::vector<FieldJet<S>>& fields, std::size_t rows) {
  JetMatrix<S> a(rows);
  for (std::size_t i = 0; i < rows; ++i)
    for (const auto& f : fields) a[i].push_back(f.comps[i]);
  return a;
}

template <class S>
int min_order_of(const std::vector<Jet<S>>& v) {
  int o = kMaxOrder;
  for (const auto& x : v) o = std::min(o, x.order());
  return o;
}

template <class S>
int min_order_of(const std::vector<FieldJet<S>>& v) {
  int o = kMaxOrder;
  for (const auto& x : v) o = std::min(o, x.order());
  return o;
}

// Effective order of a jet: the order, capped by fiber validity.
template <class S>
int effective_order(const Jet<S>& x) {
  return std::min(x.order(), x.min_cap_validity());
}

// The fixed frame (X, ad^l A) projected to the base; V^l differs from
// ad^l A only by multiples of X and vertical fields.
template <class S>
struct ConditionContext {
  const BundleChart<S>* bc;
  FieldJet<S> X;
  JetMatrix<S> frame_inverse;
  int top = 2;
};

template <class S>
FrameConditions<S> frame_conditions(const ConditionContext<S>& ctx, const std::vector<FieldJet<S>>& V0, bool full) {
  const auto& bc = *ctx.bc;
  const int m = bc.m;
  const std::size_t n = bc.n;
  std::vector<std::vector<FieldJet<S>>> V{V0};
  const int depth = full ? ctx.top : 1;
  for (int i = 1; i <= depth; ++i) {
    std::vector<FieldJet<S>> next;
    for (const auto& v : V.back()) next.push_back(lie_bracket(ctx.X, v));
    V.push_back(std::move(next));
  }
  auto coeffs = [&](const FieldJet<S>& a, const FieldJet<S>& b) {
    return apply_inverse(ctx.frame_inverse, horizontal_bracket(a, b, n));
  };
  auto slot = [&](int l, int r) { return static_cast<std::size_t>(1 + l * m + r); };
  FrameConditions<S> out;
  const ChartPtr& c = bc.chart;
  out.c1.assign(static_cast<std::size_t>(m * m * m), Jet<S>(c, kMaxOrder));
  out.c0.assign(static_cast<std::size_t>(m), Jet<S>(c, kMaxOrder));
  out.c2.assign(static_cast<std::size_t>(m), Jet<S>(c, kMaxOrder));
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q) {
      auto e = coeffs(V[0][p], V[1][q]);
      for (int r = 0; r < m; ++r) out.c1[(p * m + q) * m + r] = e[slot(1, r)];
      out.c0[q] += e[slot(0, p)];
      if (!full) continue;
      auto t = coeffs(V[0][p], V[ctx.top][q]);
      out.c2[p] += t[slot(ctx.top, q)];
    }
  for (auto& x : out.c0) x = x.truncated(x.order());
  return out;
}

template <class S>
bool all_negligible(const std::vector<Jet<S>>& v) {
  for (const auto& x : v)
    if (!x.is_negligible()) return false;
  return true;
}

template <class S>
std::vector<Jet<S>> stage_one_vector(const FrameConditions<S>& c) {
  std::vector<Jet<S>> v = c.c1;
  v.insert(v.end(), c.c2.begin(), c.c2.end());
  return v;
}

template <class S>
std::string describe_gamma_placement(const JetMatrix<S>& L, int m) {
  if (m == 1) return "indistinguishable for m = 1";
  // column of gamma_{j0} is m^3 + j; row (p,q,r) of the C^{1r}_{pq1} block
  bool bracket = true, displayed = true;
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q)
      for (int r = 0; r < m; ++r)
        for (int j = 0; j < m; ++j) {
          const S got = L[(p * m + q) * m + r][m * m * m + j].constant_term();
          const long b = -((r == q && j == p) + (r == p && j == q));
          const long d = -((r == p && j == p) + (r == q && j == q));
          if (!ScalarTraits<S>::is_zero(got - ScalarTraits<S>::from_int(b), 1e-9)) bracket = false;
          if (!ScalarTraits<S>::is_zero(got - ScalarTraits<S>::from_int(d), 1e-9)) displayed = false;
        }
  if (bracket && !displayed) return "beta^r_pq - gamma_p0 delta^r_q - gamma_q0 delta^r_p (bracket expansion)";
  if (displayed && !bracket) return "beta^r_pq - delta^r_p gamma_p0 - delta^r_q gamma_q0 (as displayed)";
  return "neither displayed placement";
}

}  // namespace

template <class S>
BundleChart<S> build_bundle_chart(const PairFields& pair, const Point& point, int fiber_cap) {
  check_bundle_range(pair.k, pair.m);
  BundleChart<S> bc;
  bc.k = pair.k;
  bc.m = pair.m;
  bc.n = pair.n;
  bc.base_point = point;
  bc.fiber_cap = fiber_cap;
  std::vector<std::string> names = pair.vars;
  names.push_back("F0");
  names.push_back("F1");
  for (int p = 0; p < pair.m; ++p)
    for (int q = 0; q < pair.m; ++q) names.push_back(idx2("G", p, q));
  for (std::size_t i = 0; i < pair.vars.size(); ++i)
    for (std::size_t j = pair.n; j < names.size(); ++j)
      if (names[i] == names[j]) throw SpecError("chart variable '" + names[i] + "' clashes with a fiber coordinate");
  std::vector<int> caps;
  if (fiber_cap >= 0) {
    caps.assign(names.size(), -1);
    for (std::size_t j = pair.n; j < names.size(); ++j) caps[j] = fiber_cap;
  }
  bc.chart = make_chart(names, caps);

  const int m = pair.m;
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q) {
      // G^p_q = sum_j G^j_q d/dG^j_p
      FieldJet<S> f = exact_zero<S>(bc.chart);
      for (int j = 0; j < m; ++j) f.comps[bc.g(j, p)] = coord(bc, bc.g(j, q));
      bc.G.push_back(std::move(f));
    }
  bc.F0 = exact_zero<S>(bc.chart);
  bc.F0.comps[bc.f0()] = coord(bc, bc.f0());
  bc.F1 = exact_zero<S>(bc.chart);
  bc.F1.comps[bc.f1()] = coord(bc, bc.f0());
  return bc;
}

template <class S>
FieldJet<S> lift_base_field(const BundleChart<S>& bc, const FieldJet<S>& base_field) {
  std::vector<std::size_t> map(bc.n);
  for (std::size_t i = 0; i < bc.n; ++i) map[i] = i;
  FieldJet<S> out = exact_zero<S>(bc.chart);
  for (std::size_t i = 0; i < bc.n; ++i)
    out.comps[i] = embed(base_field.comps.at(i), bc.chart, map, base_field.comps[i].order());
  return out;
}

template <class S>
FieldJet<S> lift_canonical_X(const BundleChart<S>& bc, const FieldJet<S>& X_projective) {
  const int order = X_projective.order();
  Jet<S> inv = coord(bc, bc.f0()).truncated(order).inverse();
  Jet<S> f1 = coord(bc, bc.f1());
  FieldJet<S> X = lift_base_field(bc, X_projective);
  for (std::size_t i = 0; i < bc.n; ++i) X.comps[i] = X.comps[i] * inv;
  X.comps[bc.f0()] = f1.scaled(ScalarTraits<S>::from_int(-2));
  X.comps[bc.f1()] = -(f1 * f1 * inv);
  Jet<S> shift = (f1 * inv).scaled(ScalarTraits<S>::from_int(-bc.k));
  // sum_j G^j_j = sum_{p,q} G^p_q d/dG^p_q
  for (int p = 0; p < bc.m; ++p)
    for (int q = 0; q < bc.m; ++q) X.comps[bc.g(p, q)] = shift * coord(bc, bc.g(p, q));
  return X;
}

template <class S>
std::vector<FieldJet<S>> assemble_V0(const BundleChart<S>& bc, const std::vector<FieldJet<S>>& V_lifted,
                                     const std::vector<JetMatrix<S>>& beta, const JetVector<S>& gamma0,
                                     const JetVector<S>& gamma1) {
  const int m = bc.m;
  std::vector<FieldJet<S>> out;
  for (int j = 0; j < m; ++j) {
    FieldJet<S> v = exact_zero<S>(bc.chart);
    for (int p = 0; p < m; ++p) v += V_lifted[p].times(coord(bc, bc.g(p, j)));
    for (int s = 0; s < m; ++s)
      for (int t = 0; t < m; ++t) {
        const Jet<S>& b = beta.at(j)[s][t];
        if (!b.is_zero() || b.order() < kMaxOrder) v += bc.Gf(t, s).times(b);
      }
    if (!gamma0.at(j).is_zero() || gamma0[j].order() < kMaxOrder) v += bc.F0.times(gamma0[j]);
    if (!gamma1.at(j).is_zero() || gamma1[j].order() < kMaxOrder) v += bc.F1.times(gamma1[j]);
    out.push_back(std::move(v));
  }
  return out;
}

template <class S>
NormalizationSystem<S> solve_normalization_system(const BundleChart<S>& bc, const FieldJet<S>& X_projective,
                                                  const std::vector<FieldJet<S>>& V_normal) {
  const int m = bc.m, k = bc.k;
  const std::size_t mm = static_cast<std::size_t>(m);
  NormalizationSystem<S> sys;
  sys.X = lift_canonical_X(bc, X_projective);
  std::vector<FieldJet<S>> Vl;
  for (const auto& v : V_normal) Vl.push_back(lift_base_field(bc, v));

  const Jet<S> zero(bc.chart, kMaxOrder);
  const Jet<S> one = Jet<S>::constant(bc.chart, ScalarTraits<S>::from_int(1), kMaxOrder);
  sys.beta.assign(mm, JetMatrix<S>(mm, std::vector<Jet<S>>(mm, zero)));
  sys.gamma0.assign(mm, zero);
  sys.gamma1.assign(mm, zero);
  const auto A = assemble_V0(bc, Vl, sys.beta, sys.gamma0, sys.gamma1);

  ConditionContext<S> ctx;
  ctx.bc = &bc;
  ctx.X = sys.X;
  ctx.top = m > 1 ? 2 : 3;
  {
    std::vector<FieldJet<S>> frame{sys.X};
    std::vector<FieldJet<S>> level = A;
    for (int l = 0; l <= k; ++l) {
      if (l > 0)
        for (auto& v : level) v = lie_bracket(sys.X, v);
      frame.insert(frame.end(), level.begin(), level.end());
    }
    try {
      ctx.frame_inverse = jet_matrix_inverse(column_matrix(frame, bc.n));
    } catch (const NotInvertible&) {
      throw RegularityFailure("X, V, ..., ad^k V do not span the tangent space at the point");
    } catch (const SingularLeadingMatrix&) {
      throw RegularityFailure("X, V, ..., ad^k V do not span the tangent space at the point");
    }
  }

  // Stage 1: beta and gamma0 from C^{1r}_{pq1} = 0 and the top trace condition.
  // Both are affine in the values of beta, gamma0 with no derivatives, so unit
  // trials recover the coefficient matrix.
  const std::size_t nb = mm * mm * mm, nu = nb + mm;
  const auto base = stage_one_vector(frame_conditions(ctx, A, true));
  JetMatrix<S> L(nu, std::vector<Jet<S>>(nu, zero));
  for (std::size_t u = 0; u < nu; ++u) {
    auto trial = A;
    if (u < nb) {
      const int j = static_cast<int>(u / (mm * mm)), s = static_cast<int>(u / mm % mm), t = static_cast<int>(u % mm);
      trial[j] += bc.Gf(t, s);
    } else {
      trial[u - nb] += bc.F0;
    }
    auto col = stage_one_vector(frame_conditions(ctx, trial, true));
    for (std::size_t e = 0; e < nu; ++e) L[e][u] = col[e] - base[e];
  }
  sys.gamma_placement = describe_gamma_placement(L, m);
  std::vector<Jet<S>> rhs;
  for (const auto& x : base) rhs.push_back(-x);
  std::vector<Jet<S>> sol;
  try {
    sol = jet_linear_solve(L, rhs);
  } catch (const Error& e) {
    throw SingularLeadingMatrix(std::string("normalization system for beta, gamma0 is degenerate: ") + e.what());
  }
  for (std::size_t u = 0; u < nb; ++u) sys.beta[u / (mm * mm)][u / mm % mm][u % mm] = sol[u];
  for (std::size_t j = 0; j < mm; ++j) sys.gamma0[j] = sol[nb + j];

  // Stage 2: gamma1 from sum_p C^{1p}_{pq0} = 0, which involves X(beta).
  const auto B = assemble_V0(bc, Vl, sys.beta, sys.gamma0, sys.gamma1);
  const auto base2 = frame_conditions(ctx, B, false).c0;
  JetMatrix<S> L2(mm, std::vector<Jet<S>>(mm, zero));
  for (std::size_t u = 0; u < mm; ++u) {
    auto trial = B;
    trial[u] += bc.F1.times(one);
    auto col = frame_conditions(ctx, trial, false).c0;
    for (std::size_t e = 0; e < mm; ++e) L2[e][u] = col[e] - base2[e];
  }
  rhs.clear();
  for (const auto& x : base2) rhs.push_back(-x);
  try {
    sys.gamma1 = jet_linear_solve(L2, rhs);
  } catch (const Error& e) {
    throw SingularLeadingMatrix(std::string("normalization system for gamma1 is degenerate: ") + e.what());
  }

  sys.V0 = assemble_V0(bc, Vl, sys.beta, sys.gamma0, sys.gamma1);
  sys.residual = frame_conditions(ctx, sys.V0, true);
  sys.conditions_hold =
      all_negligible(sys.residual.c1) && all_negligible(sys.residual.c0) && all_negligible(sys.residual.c2);
  sys.order = min_order_of(sys.V0);
  return sys;
}

template <class S>
CanonicalFrame<S> canonical_frame(const BundleChart<S>& bc, const NormalizationSystem<S>& sys) {
  CanonicalFrame<S> f;
  f.k = bc.k;
  f.m = bc.m;
  for (int p = 0; p < bc.m; ++p)
    for (int q = 0; q < bc.m; ++q) {
      f.names.push_back(idx2("G", p, q));
      f.fields.push_back(bc.Gf(p, q));
    }
  f.names.insert(f.names.end(), {"F0", "F1", "X"});
  f.fields.insert(f.fields.end(), {bc.F0, bc.F1, sys.X});
  std::vector<FieldJet<S>> level = sys.V0;
  for (int i = 0; i <= bc.k; ++i) {
    if (i > 0)
      for (auto& v : level) v = lie_bracket(sys.X, v);
    for (int j = 0; j < bc.m; ++j) {
      f.names.push_back("V[" + std::to_string(i) + "," + std::to_string(j + 1) + "]");
      f.fields.push_back(level[j]);
    }
  }
  f.rank_at_section = span_rank(f.fields);
  if (f.rank_at_section != f.fields.size())
    throw RegularityFailure("canonical frame is degenerate at the section point (rank " +
                            std::to_string(f.rank_at_section) + " of " + std::to_string(f.fields.size()) + ")");
  return f;
}

namespace {

template <class S>
using Table = std::vector<std::vector<std::vector<Jet<S>>>>;

template <class S>
bool matches(const std::vector<Jet<S>>& got, const std::vector<Rational>& want, int order) {
  for (std::size_t c = 0; c < got.size(); ++c) {
    Jet<S> d = got[c] - Jet<S>::constant(got[c].chart_ptr(), ScalarTraits<S>::from_rational(want[c]), order);
    if (!d.truncated(order).is_negligible()) return false;
  }
  return true;
}

template <class S>
void expect(IdentityCheck& chk, const Table<S>& t, const std::vector<std::string>& names, std::size_t a,
            std::size_t b, const std::vector<Rational>& want, int order) {
  if (matches(t[a][b], want, order)) return;
  chk.ok = false;
  if (chk.failures.size() < 8) chk.failures.push_back("[" + names[a] + "," + names[b] + "]");
}

}  // namespace

template <class S>
StructureReport<S> structure_functions(const CanonicalFrame<S>& frame, int order) {
  const std::size_t D = frame.fields.size();
  const int k = frame.k, m = frame.m;
  StructureReport<S> rep;
  rep.k = k;
  rep.m = m;
  rep.names = frame.names;
  const ChartPtr& chart = frame.fields[0].chart;
  // coefficients to `order` only need the fields to order + 1
  std::vector<FieldJet<S>> fields;
  for (const auto& f : frame.fields) fields.push_back(f.truncated(order + 1));
  JetMatrix<S> inv = jet_matrix_inverse(column_matrix(fields, D));
  for (auto& row : inv)
    for (auto& x : row) x = x.truncated(order);
  const Jet<S> zero(chart, kMaxOrder);
  rep.table.assign(D, std::vector<std::vector<Jet<S>>>(D, std::vector<Jet<S>>(D, zero)));
  int got = kMaxOrder;
  for (std::size_t a = 0; a < D; ++a)
    for (std::size_t b = a + 1; b < D; ++b) {
      auto coeffs = apply_inverse(inv, lie_bracket(fields[a], fields[b]).comps);
      for (std::size_t c = 0; c < D; ++c) {
        got = std::min(got, effective_order(coeffs[c]));
        rep.table[a][b][c] = coeffs[c].truncated(order);
        rep.table[b][a][c] = -rep.table[a][b][c];
      }
    }
  if (got < order)
    throw OrderExhausted("structure functions valid to order " + std::to_string(got) + " only (deepest chain: [V^k, V^k] brackets); need " +
                         std::to_string(order));
  rep.order = order;

  auto vec = [&]() { return std::vector<Rational>(D, Rational(0)); };
  const std::size_t iX = frame.index_X(), iF0 = frame.index_F0(), iF1 = frame.index_F1();
  auto iG = [&](int p, int q) { return frame.index_G(p, q); };
  auto iV = [&](int i, int j) { return frame.index_V(i, j); };

  IdentityCheck s0{"fiber brackets"};
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q) {
      for (int s = 0; s < m; ++s)
        for (int t = 0; t < m; ++t) {
          auto w = vec();
          if (p == t) w[iG(s, q)] += 1;
          if (s == q) w[iG(p, t)] -= 1;
          expect(s0, rep.table, rep.names, iG(p, q), iG(s, t), w, order);
        }
      expect(s0, rep.table, rep.names, iG(p, q), iF0, vec(), order);
      expect(s0, rep.table, rep.names, iG(p, q), iF1, vec(), order);
    }
  {
    auto w = vec();
    w[iF1] = 1;
    expect(s0, rep.table, rep.names, iF0, iF1, w, order);
  }

  IdentityCheck s1{"fiber-X brackets"};
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q) expect(s1, rep.table, rep.names, iG(p, q), iX, vec(), order);
  {
    auto w = vec();
    w[iX] = -1;
    expect(s1, rep.table, rep.names, iF0, iX, w, order);
    auto w1 = vec();
    w1[iF0] = -2;
    for (int j = 0; j < m; ++j) w1[iG(j, j)] = -k;
    expect(s1, rep.table, rep.names, iF1, iX, w1, order);
  }

  IdentityCheck def{"V^{i+1} = [X, V^i]"};
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < m; ++j) {
      auto w = vec();
      w[iV(i + 1, j)] = 1;
      expect(def, rep.table, rep.names, iX, iV(i, j), w, order);
    }

  IdentityCheck s2{"fiber-V brackets"};
  for (int i = 0; i <= k; ++i)
    for (int j = 0; j < m; ++j) {
      for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q) {
          auto w = vec();
          if (p == j) w[iV(i, q)] = 1;
          expect(s2, rep.table, rep.names, iG(p, q), iV(i, j), w, order);
        }
      auto w0 = vec();
      w0[iV(i, j)] = -i;
      expect(s2, rep.table, rep.names, iF0, iV(i, j), w0, order);
      auto w1 = vec();
      if (i > 0) w1[iV(i - 1, j)] = i * (i - 1 - k);
      expect(s2, rep.table, rep.names, iF1, iV(i, j), w1, order);
    }
  rep.checks = {s0, s1, def, s2};

  rep.w.assign(static_cast<std::size_t>(k + 1),
               JetMatrix<S>(static_cast<std::size_t>(m), std::vector<Jet<S>>(static_cast<std::size_t>(m), zero)));
  for (int l = 0; l <= k; ++l)
    for (int r = 0; r < m; ++r)
      for (int j = 0; j < m; ++j) rep.w[l][r][j] = rep.table[iX][iV(k, j)][iV(l, r)];

  for (std::size_t a = 0; a < D && rep.flat; ++a)
    for (std::size_t b = 0; b < D && rep.flat; ++b)
      for (std::size_t c = 0; c < D; ++c) {
        const auto& x = rep.table[a][b][c];
        if (!(x - Jet<S>::constant(chart, x.constant_term(), order)).truncated(order).is_negligible()) {
          rep.flat = false;
          break;
        }
      }
  if (rep.flat) {
    rep.jacobi_checked = true;
    const double tol = chart->tolerance();
    auto cst = [&](std::size_t a, std::size_t b, std::size_t c) { return rep.table[a][b][c].constant_term(); };
    for (std::size_t a = 0; a < D && rep.jacobi_ok; ++a)
      for (std::size_t b = a + 1; b < D && rep.jacobi_ok; ++b)
        for (std::size_t c = b + 1; c < D && rep.jacobi_ok; ++c)
          for (std::size_t f = 0; f < D; ++f) {
            S acc = ScalarTraits<S>::from_int(0);
            for (std::size_t e = 0; e < D; ++e)
              acc += cst(a, b, e) * cst(e, c, f) + cst(b, c, e) * cst(e, a, f) + cst(c, a, e) * cst(e, b, f);
            if (!ScalarTraits<S>::is_zero(acc, tol)) {
              rep.jacobi_ok = false;
              break;
            }
          }
    // constant structure functions satisfy Jacobi; at order 0 this is the only
    // evidence of constancy
    rep.flat = rep.jacobi_ok;
  }
  return rep;
}

std::vector<std::string> cartan_basis_names(int k, int m) {
  std::vector<std::string> names{"H", "Y", "X"};
  for (int i = 0; i <= k; ++i)
    for (int j = 0; j < m; ++j) names.push_back("W[" + std::to_string(i) + "," + std::to_string(j + 1) + "]");
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q) names.push_back(idx2("G", p, q));
  return names;
}

std::vector<std::vector<std::vector<Rational>>> model_algebra(int k, int m) {
  const std::size_t D = static_cast<std::size_t>(3 + (k + 1) * m + m * m);
  std::vector<std::vector<std::vector<Rational>>> c(
      D, std::vector<std::vector<Rational>>(D, std::vector<Rational>(D, Rational(0))));
  const std::size_t H = 0, Y = 1, X = 2;
  auto W = [&](int i, int j) { return static_cast<std::size_t>(3 + i * m + j); };
  auto G = [&](int p, int q) { return static_cast<std::size_t>(3 + (k + 1) * m + p * m + q); };
  auto set = [&](std::size_t a, std::size_t b, std::size_t e, Rational v) {
    c[a][b][e] += v;
    c[b][a][e] -= v;
  };
  set(X, Y, H, 1);
  set(H, X, X, -2);
  set(H, Y, Y, 2);
  for (int i = 0; i <= k; ++i)
    for (int j = 0; j < m; ++j) {
      if (i < k) set(X, W(i, j), W(i + 1, j), i + 1);
      if (i > 0) set(Y, W(i, j), W(i - 1, j), -(k - i + 1));
      // weight k - 2i, forced by [X,Y] = H acting on W^i (see the ledger)
      set(H, W(i, j), W(i, j), k - 2 * i);
      for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q)
          if (p == j) set(G(p, q), W(i, j), W(i, q), 1);
    }
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q)
      for (int s = 0; s < m; ++s)
        for (int t = 0; t < m; ++t) {
          if (G(p, q) >= G(s, t)) continue;
          if (p == t) set(G(p, q), G(s, t), G(s, q), 1);
          if (s == q) set(G(p, q), G(s, t), G(p, t), -1);
        }
  return c;
}

template <class S>
void cartan_report(StructureReport<S>& rep) {
  const int k = rep.k, m = rep.m;
  const std::size_t D = rep.names.size();
  const std::size_t mm = static_cast<std::size_t>(m * m);
  const std::size_t oF0 = mm, oF1 = mm + 1, oX = mm + 2;
  auto oV = [&](int i, int j) { return mm + 3 + static_cast<std::size_t>(i * m + j); };
  auto oG = [&](int p, int q) { return static_cast<std::size_t>(p * m + q); };
  auto nW = [&](int i, int j) { return static_cast<std::size_t>(3 + i * m + j); };
  auto nG = [&](int p, int q) { return static_cast<std::size_t>(3 + (k + 1) * m + p * m + q); };

  // new basis vector a = sum_i T[i][a] old_i
  ScalarMatrix<Rational> T(D, std::vector<Rational>(D, Rational(0)));
  T[oF0][0] = 2;
  for (int j = 0; j < m; ++j) T[oG(j, j)][0] = k;
  T[oF1][1] = 1;
  T[oX][2] = 1;
  Rational fact = 1;
  for (int i = 0; i <= k; ++i) {
    if (i > 0) fact *= i;
    for (int j = 0; j < m; ++j) T[oV(i, j)][nW(i, j)] = 1 / fact;
  }
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q) T[oG(p, q)][nG(p, q)] = 1;
  ScalarMatrix<Rational> aug(D, std::vector<Rational>(2 * D, Rational(0)));
  for (std::size_t i = 0; i < D; ++i) {
    for (std::size_t j = 0; j < D; ++j) aug[i][j] = T[i][j];
    aug[i][D + i] = 1;
  }
  row_reduce(aug);
  ScalarMatrix<Rational> Tinv(D, std::vector<Rational>(D));
  for (std::size_t i = 0; i < D; ++i)
    for (std::size_t j = 0; j < D; ++j) Tinv[i][j] = aug[i][D + j];

  CartanBlock<S>& cb = rep.cartan;
  cb.names = cartan_basis_names(k, m);
  const ChartPtr chart = rep.table[0][0][0].chart_ptr();
  const Jet<S> zero(chart, kMaxOrder);
  const auto model = model_algebra(k, m);
  cb.constants.assign(D, std::vector<std::vector<S>>(D, std::vector<S>(D)));
  cb.model.assign(D, std::vector<std::vector<S>>(D, std::vector<S>(D)));
  cb.residual.assign(D, std::vector<std::vector<Jet<S>>>(D, std::vector<Jet<S>>(D, zero)));
  auto conv = [](const Rational& q) { return ScalarTraits<S>::from_rational(q); };
  cb.flat = true;
  for (std::size_t a = 0; a < D; ++a)
    for (std::size_t b = 0; b < D; ++b) {
      // bracket of new a, b in the old frame
      std::vector<Jet<S>> old(D, zero);
      for (std::size_t i = 0; i < D; ++i) {
        if (sgn(T[i][a]) == 0) continue;
        for (std::size_t j = 0; j < D; ++j) {
          if (sgn(T[j][b]) == 0) continue;
          const S w = conv(T[i][a] * T[j][b]);
          for (std::size_t l = 0; l < D; ++l)
            if (!rep.table[i][j][l].is_zero()) old[l] += rep.table[i][j][l].scaled(w);
        }
      }
      for (std::size_t c = 0; c < D; ++c) {
        Jet<S> x = zero;
        for (std::size_t l = 0; l < D; ++l)
          if (sgn(Tinv[c][l]) != 0 && !old[l].is_zero()) x += old[l].scaled(conv(Tinv[c][l]));
        x = x.truncated(rep.order);
        cb.constants[a][b][c] = x.constant_term();
        cb.model[a][b][c] = conv(model[a][b][c]);
        cb.residual[a][b][c] = x - Jet<S>::constant(chart, cb.model[a][b][c], rep.order);
        if (!cb.residual[a][b][c].is_negligible()) cb.flat = false;
      }
    }

  auto holds = [&](IdentityCheck& chk, std::size_t a, std::size_t b) {
    for (std::size_t c = 0; c < D; ++c)
      if (!cb.residual[a][b][c].is_negligible()) {
        chk.ok = false;
        if (chk.failures.size() < 8) chk.failures.push_back("[" + cb.names[a] + "," + cb.names[b] + "]");
        return;
      }
  };
  IdentityCheck sl2{"sl(2): [X,Y]=H, [H,X]=-2X, [H,Y]=2Y; G commutes with H, Y, X"};
  holds(sl2, 2, 1);
  holds(sl2, 0, 2);
  holds(sl2, 0, 1);
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q)
      for (std::size_t a = 0; a < 3; ++a) holds(sl2, nG(p, q), a);
  IdentityCheck xw{"[X,W^i]=(i+1)W^{i+1}, i<k"}, yw{"[Y,W^i]=-(k-i+1)W^{i-1}"}, hw{"[H,W^i]=(k-2i)W^i"},
      gw{"[G^p_q,W^i_j]=delta^p_j W^i_q"}, ww{"[W,W]=0 and [X,W^k]=0"};
  for (int i = 0; i <= k; ++i)
    for (int j = 0; j < m; ++j) {
      holds(i < k ? xw : ww, 2, nW(i, j));
      holds(yw, 1, nW(i, j));
      holds(hw, 0, nW(i, j));
      for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q) holds(gw, nG(p, q), nW(i, j));
      for (int i2 = 0; i2 <= k; ++i2)
        for (int j2 = 0; j2 < m; ++j2) holds(ww, nW(i, j), nW(i2, j2));
    }
  cb.relations = {sl2, xw, yw, hw, gw, ww};
  rep.cartan_computed = true;
}

template <class S>
Jet<S> fiber_euler(const BundleChart<S>& bc, const Jet<S>& f) {
  Jet<S> acc(bc.chart, kMaxOrder);
  for (int p = 0; p < bc.m; ++p)
    for (int q = 0; q < bc.m; ++q) {
      const std::size_t v = bc.g(p, q);
      acc += coord(bc, v) * f.partial(v);
    }
  return acc;
}

template <class S>
BundleResult<S> canonical_bundle(const PairFields& pair, const Point& point, const BundleOptions& opt) {
  check_bundle_range(pair.k, pair.m);
  if (!pair.is_equation()) {
    FiltrationReport fr = regularity_report<S>(pair, point, pair.k + 1);
    if (!fr.regular()) throw RegularityFailure("pair is not regular at the point: " + fr.failure);
  }
  const int k = pair.k, m = pair.m, r = opt.order;
  if (r < 0) throw OrderExhausted("report order must be non-negative");
  const int top = m > 1 ? 2 : 3;
  int bundle_order = r + k + top + 4;
  for (int attempt = 0; attempt < 4; ++attempt) {
    BundleResult<S> out;
    out.bundle_order = bundle_order;
    // base: projective field and its normal frame
    int N = bundle_order + 3 * k + 2;
    FieldJet<S> Xp;
    std::vector<FieldJet<S>> Vn;
    for (int tries = 0;; ++tries) {
      if (N > kMaxOrder || tries > 4) throw OrderExhausted("base jets cannot reach order " + std::to_string(bundle_order));
      RealizedPair<S> rp = realize<S>(pair, point, N);
      const std::size_t tau = choose_transversal(pair, rp, opt.transversal);
      out.transversal = rp.chart->name(tau);
      KResult<S> KX = compute_K(rp.X, rp.V, k, tau);
      Jet<S> f = projective_scaling(rp.X, KX.trace, k, m, tau);
      Xp = rp.X.times(f);
      KResult<S> Kp = compute_K(Xp, rp.V, k, tau);
      Vn.clear();
      for (int j = 0; j < m; ++j) {
        std::vector<Jet<S>> col;
        for (int i = 0; i < m; ++i) col.push_back(Kp.G[i][j]);
        Vn.push_back(combine(rp.V, col));
      }
      const int got = std::min(Xp.order(), min_order_of(Vn));
      if (got >= bundle_order) {
        out.base_order = N;
        out.audit.add("base input expressions", N);
        out.audit.add("projective X", Xp.order());
        out.audit.add("normal frame V (projective X)", min_order_of(Vn));
        break;
      }
      N += bundle_order - got;
    }
    Xp = Xp.truncated(bundle_order);
    for (auto& v : Vn) v = v.truncated(bundle_order);

    out.chart = build_bundle_chart<S>(pair, point, opt.fiber_cap);
    out.audit.add("bundle chart", bundle_order);
    out.system = solve_normalization_system(out.chart, Xp, Vn);
    out.audit.add("V0 (beta, gamma solved)", out.system.order);
    out.frame = canonical_frame(out.chart, out.system);
    out.audit.add("canonical frame", min_order_of(out.frame.fields));
    try {
      out.structure = structure_functions(out.frame, r);
    } catch (const OrderExhausted&) {
      bundle_order += 2;
      continue;
    }
    out.audit.add("structure functions", r);
    if (opt.cartan) cartan_report(out.structure);
    return out;
  }
  throw OrderExhausted("structure functions could not reach order " + std::to_string(r) +
                       (opt.fiber_cap >= 0 ? "; raise --fiber-cap" : ""));
}

#define JETGEOM_INSTANTIATE_BUNDLE(S)                                                                            \
  template BundleChart<S> build_bundle_chart<S>(const PairFields&, const Point&, int);                          \
  template FieldJet<S> lift_base_field<S>(const BundleChart<S>&, const FieldJet<S>&);                           \
  template FieldJet<S> lift_canonical_X<S>(const BundleChart<S>&, const FieldJet<S>&);                          \
  template std::vector<FieldJet<S>> assemble_V0<S>(const BundleChart<S>&, const std::vector<FieldJet<S>>&,      \
                                                   const std::vector<JetMatrix<S>>&, const JetVector<S>&,       \
                                                   const JetVector<S>&);                                        \
  template NormalizationSystem<S> solve_normalization_system<S>(const BundleChart<S>&, const FieldJet<S>&,      \
                                                                const std::vector<FieldJet<S>>&);               \
  template CanonicalFrame<S> canonical_frame<S>(const BundleChart<S>&, const NormalizationSystem<S>&);          \
  template StructureReport<S> structure_functions<S>(const CanonicalFrame<S>&, int);                            \
  template void cartan_report<S>(StructureReport<S>&);                                                          \
  template Jet<S> fiber_euler<S>(const BundleChart<S>&, const Jet<S>&);                                         \
  template BundleResult<S> canonical_bundle<S>(const PairFields&, const Point&, const BundleOptions&);

JETGEOM_INSTANTIATE_BUNDLE(Rational)
JETGEOM_INSTANTIATE_BUNDLE(double)

}  // namespace jetgeom

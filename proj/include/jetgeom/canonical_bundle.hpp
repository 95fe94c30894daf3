#pragma once

#include <string>
#include <utility>
#include <vector>

#include "jetgeom/normalization.hpp"

namespace jetgeom {

/// Throws GatingViolation unless k > 2, or k = 2 and m > 1.
void check_bundle_range(int k, int m);

/// Base chart extended by the fiber coordinates F0, F1, G[p,q] (G^p_q, row p).
/// The section point is F0 = 1, F1 = 0, G = Id.
template <class S>
struct BundleChart {
  ChartPtr chart;
  ChartPtr base;
  int k = 0, m = 0;
  std::size_t n = 0;  // base dimension
  Point base_point;
  int fiber_cap = -1;
  std::vector<FieldJet<S>> G;  // fundamental fields G^p_q at index p*m + q
  FieldJet<S> F0, F1;

  std::size_t f0() const { return n; }
  std::size_t f1() const { return n + 1; }
  std::size_t g(int p, int q) const { return n + 2 + static_cast<std::size_t>(p * m + q); }
  std::size_t dim() const { return chart->dim(); }
  const FieldJet<S>& Gf(int p, int q) const { return G[static_cast<std::size_t>(p * m + q)]; }
};

template <class S>
BundleChart<S> build_bundle_chart(const PairFields& pair, const Point& point, int fiber_cap = -1);

/// Base field pulled back to the bundle chart (fiber independent).
template <class S>
FieldJet<S> lift_base_field(const BundleChart<S>& bc, const FieldJet<S>& base_field);

/// (1/F0) X - 2 (F1/F0) F^0 - (F1/F0)^2 F^1 - k (F1/F0) sum_j G^j_j for a
/// projective field X.
template <class S>
FieldJet<S> lift_canonical_X(const BundleChart<S>& bc, const FieldJet<S>& X_projective);

/// V^0_j = sum_p G^p_j V_p + sum_{s,t} beta[j][s][t] G^t_s + gamma0_j F^0 + gamma1_j F^1.
/// beta[j][s][t] is beta^s_{jt} (upper s, lower j t).
template <class S>
std::vector<FieldJet<S>> assemble_V0(const BundleChart<S>& bc, const std::vector<FieldJet<S>>& V_lifted,
                                     const std::vector<JetMatrix<S>>& beta, const JetVector<S>& gamma0,
                                     const JetVector<S>& gamma1);

/// Left-hand sides of the normalization conditions for a candidate V^0.
template <class S>
struct FrameConditions {
  JetVector<S> c1;  // C^{1r}_{pq1}, index (p*m + q)*m + r
  JetVector<S> c0;  // sum_p C^{1p}_{pq0}, index q
  JetVector<S> c2;  // sum_q C^{lq}_{pql} with l = 2 (m > 1) or 3 (m = 1), index p
};

template <class S>
struct NormalizationSystem {
  std::vector<JetMatrix<S>> beta;
  JetVector<S> gamma0, gamma1;
  FieldJet<S> X;                // lifted canonical X
  std::vector<FieldJet<S>> V0;  // assembled V^0
  FrameConditions<S> residual;  // conditions recomputed from the assembled V^0
  bool conditions_hold = false;
  // placement of the gamma0 terms realized by the computed brackets, see the ledger
  std::string gamma_placement;
  int order = 0;
};

/// Coordinates of the base projective field and normal frame are taken as
/// given (jets on the base chart).
template <class S>
NormalizationSystem<S> solve_normalization_system(const BundleChart<S>& bc, const FieldJet<S>& X_projective,
                                                  const std::vector<FieldJet<S>>& V_normal);

/// G^p_q, F^0, F^1, X, V^i_j in this order.
template <class S>
struct CanonicalFrame {
  std::vector<std::string> names;
  std::vector<FieldJet<S>> fields;
  std::size_t index_G(int p, int q) const { return static_cast<std::size_t>(p * m + q); }
  std::size_t index_F0() const { return static_cast<std::size_t>(m * m); }
  std::size_t index_F1() const { return index_F0() + 1; }
  std::size_t index_X() const { return index_F0() + 2; }
  std::size_t index_V(int i, int j) const { return index_F0() + 3 + static_cast<std::size_t>(i * m + j); }
  int k = 0, m = 0;
  std::size_t rank_at_section = 0;
};

template <class S>
CanonicalFrame<S> canonical_frame(const BundleChart<S>& bc, const NormalizationSystem<S>& sys);

struct IdentityCheck {
  IdentityCheck() = default;
  explicit IdentityCheck(std::string n) : name(std::move(n)) {}
  std::string name;
  bool ok = true;
  std::vector<std::string> failures;  // first few offending brackets
};

template <class S>
struct CartanBlock {
  std::vector<std::string> names;            // H, Y, X, W[i,j], G[p,q]
  std::vector<std::vector<std::vector<S>>> constants;  // [a][b][c] at the section point
  std::vector<std::vector<std::vector<S>>> model;
  std::vector<std::vector<std::vector<Jet<S>>>> residual;  // computed minus model, as jets
  bool flat = true;                          // residual identically zero to the report order
  std::vector<IdentityCheck> relations;
};

template <class S>
struct StructureReport {
  int k = 0, m = 0;
  int order = 0;  // order of the reported coefficient jets
  std::vector<std::string> names;
  std::vector<std::vector<std::vector<Jet<S>>>> table;  // [E_a, E_b] = sum_c table[a][b][c] E_c
  std::vector<JetMatrix<S>> w;  // [X, V^k_j] = sum_{l,r} w[l][r][j] V^l_r
  std::vector<IdentityCheck> checks;  // fiber, fiber-X, X-chain and fiber-V bracket identities
  bool flat = true;
  bool jacobi_checked = false, jacobi_ok = true;
  bool cartan_computed = false;
  CartanBlock<S> cartan;
};

/// Brackets over the frame, truncated to `order`.
template <class S>
StructureReport<S> structure_functions(const CanonicalFrame<S>& frame, int order);

/// Fills the Cartan block of a structure report.
template <class S>
void cartan_report(StructureReport<S>& report);

/// Structure constants of the model algebra in the basis (H, Y, X, W^i_j, G^p_q).
std::vector<std::vector<std::vector<Rational>>> model_algebra(int k, int m);
std::vector<std::string> cartan_basis_names(int k, int m);

/// sum_{p,q} G^p_q d/dG^p_q.
template <class S>
Jet<S> fiber_euler(const BundleChart<S>& bc, const Jet<S>& f);

struct BundleOptions {
  int order = 0;  // order of the reported structure function jets
  std::string transversal;
  int fiber_cap = -1;  // < 0 : chosen from the bracket depth
  bool cartan = true;
};

template <class S>
struct BundleResult {
  BundleChart<S> chart;
  NormalizationSystem<S> system;
  CanonicalFrame<S> frame;
  StructureReport<S> structure;
  std::string transversal;
  int base_order = 0, bundle_order = 0;
  OrderAudit audit;
};

/// Full pipeline: projective field and normal frame on the base, bundle
/// chart, normalization system, canonical frame, structure functions.
template <class S>
BundleResult<S> canonical_bundle(const PairFields& pair, const Point& point, const BundleOptions& opt);

}  // namespace jetgeom

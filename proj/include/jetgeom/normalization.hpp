#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "jetgeom/ode_pair.hpp"

namespace jetgeom {

template <class S>
using JetVector = std::vector<Jet<S>>;

/// Solves X(u) = rhs(u) for a vector of jets with u = initial on the
/// hypersurface where the displacement of chart variable `tau` vanishes.
/// rhs must not differentiate u along tau; X(tau) must be invertible.
template <class S>
JetVector<S> transport_jet(const FieldJet<S>& X, const std::function<JetVector<S>(const JetVector<S>&)>& rhs,
                           JetVector<S> initial, std::size_t tau);

/// Linear case X(u) = A u + b.
template <class S>
JetVector<S> transport_linear(const FieldJet<S>& X, const JetMatrix<S>& A, const JetVector<S>& b,
                              const JetVector<S>& initial, std::size_t tau);

/// ad_X^{k+1} W = X a_X + sum_i (ad^i W) a_i, with a_i[r][c] the coefficient
/// of ad^i W_r in the expansion of ad^{k+1} W_c.
template <class S>
struct AdExpansion {
  std::vector<FieldJet<S>> frame;  // X, W, ad W, ..., ad^k W
  JetVector<S> a_X;
  std::vector<JetMatrix<S>> a;  // a[0..k]
};

template <class S>
AdExpansion<S> expand_top_adjoint(const FieldJet<S>& X, const std::vector<FieldJet<S>>& W, int k);

template <class S>
JetMatrix<S> compute_H(const FieldJet<S>& X, const std::vector<FieldJet<S>>& W, int k);

/// G with H G + (k+1) X(G) = 0 and G = Id on the transversal.
template <class S>
JetMatrix<S> normal_frame(const FieldJet<S>& X, const JetMatrix<S>& H, int k, std::size_t tau);

template <class S>
struct KResult {
  JetMatrix<S> H;
  JetMatrix<S> G;
  std::vector<JetMatrix<S>> K;    // K_0 .. K_{k-1}
  JetMatrix<S> normality_residual;  // ad^k block of the expansion for V = WG
  JetVector<S> x_residual;          // X block
  Jet<S> trace;                     // tr K_{k-1}
  int order = 0;                    // valid order of K
};

/// ad_X^{k+1}V + (ad_X^{k-1}V)K_{k-1} + ... + V K_0 = 0 for the normal frame
/// V = WG through the transversal. Uses the Leibniz rule in the W-frame.
template <class S>
KResult<S> compute_K(const FieldJet<S>& X, const std::vector<FieldJet<S>>& W, int k, std::size_t tau);

/// Same quantities computed from brackets of V = WG directly (test oracle).
template <class S>
KResult<S> compute_K_direct(const FieldJet<S>& X, const std::vector<FieldJet<S>>& W, int k, std::size_t tau);

/// S^X(f) = 2 f X^2(f) - X(f)^2.
template <class S>
Jet<S> schwarzian(const FieldJet<S>& X, const Jet<S>& f);

/// c_k = -k(k+1)(k+2)/24.
Rational c_k(int k);

/// f with tr K_{k-1}^{fX} = 0, f = 1 and X(f) = 0 on the transversal.
template <class S>
Jet<S> projective_scaling(const FieldJet<S>& X, const Jet<S>& trace, int k, int m, std::size_t tau);

struct SchwarzianSample {
  double s = 0;          // parameter of fX
  double tau = 0;        // parameter of X at the same point
  double from_jets = 0;  // S^X(f) at the trajectory point
  double from_flow = 0;  // 2 tau'''/tau' - 3 (tau''/tau')^2
  double rel_error = 0;
};

struct SchwarzianCheck {
  std::vector<SchwarzianSample> samples;
  double max_rel_error = 0;
  double tolerance = 1e-6;
  bool ok = false;
};

/// Float-mode cross-check of S^X(f) along the integral curve of fX through the
/// point. tau(s) is the X-parameter as a function of the fX-parameter, so
/// tau' = f; its higher derivatives come from 5-point differences of f along
/// an RK4 flow. Relative errors use max(|a|, |b|, 1e-8) as the scale.
SchwarzianCheck schwarzian_trajectory_check(const PairFields& pair, const Point& point, const ExprPtr& f,
                                            int samples = 10, double ds = 0.05, double tolerance = 1e-6);

template <class S>
struct TraceCheck {
  Jet<S> left, right;
};

/// tr K_{k-1}^{fX} by the pipeline against f^2 tr K_{k-1}^X - m c_k S^X(f).
template <class S>
TraceCheck<S> trace_transform_check(const FieldJet<S>& X, const std::vector<FieldJet<S>>& W, const Jet<S>& f, int k,
                                    std::size_t tau);

/// Resolves a transversal coordinate: `name` when given, else t for equation
/// pairs, else the first variable whose X-component is invertible at p.
template <class S>
std::size_t choose_transversal(const PairFields& pair, const RealizedPair<S>& rp, const std::string& name);

struct NormalizationOptions {
  int order = 4;  // order of the reported invariant jets
  std::string transversal;
  bool normalize = true;  // also run the projective rescaling
};

struct OrderAudit {
  std::vector<std::pair<std::string, int>> entries;
  void add(std::string what, int order) { entries.emplace_back(std::move(what), order); }
};

template <class S>
struct InvariantReport {
  std::string point;
  std::string transversal;
  int k = 0, m = 0;
  int report_order = 0;
  KResult<S> input;        // for the given X
  Jet<S> f;               // projective scaling
  KResult<S> normalized;  // for fX
  bool normalized_computed = false;
  OrderAudit audit;
};

template <class S>
InvariantReport<S> normalized_invariants(const PairFields& pair, const Point& point, const NormalizationOptions& opt);

struct TrivialityWitness {
  std::string point;
  int index = 0;  // K_index
  int row = 0, col = 0;
  std::string coefficient;
};

struct TrivialityVerdict {
  bool flat = true;
  int order = 0;
  std::vector<std::string> points;
  std::vector<TrivialityWitness> witnesses;  // at most one per point
  std::string summary;
};

/// Evaluates the normalized invariants at every point (concurrently).
template <class S>
TrivialityVerdict triviality_test(const PairFields& pair, const std::vector<Point>& points,
                                  const NormalizationOptions& opt);

}  // namespace jetgeom

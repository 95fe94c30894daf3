#include <future>
#include <sstream>

#include "jetgeom/errors.hpp"
#include "jetgeom/normalization.hpp"

namespace jetgeom {

template <class S>
std::size_t choose_transversal(const PairFields& pair, const RealizedPair<S>& rp, const std::string& name) {
  const double tol = rp.chart->tolerance();
  auto invertible = [&](std::size_t v) { return !ScalarTraits<S>::is_zero(rp.X.comps[v].constant_term(), tol); };
  if (!name.empty()) {
    auto idx = rp.chart->find(name);
    if (!idx) throw SpecError("transversal '" + name + "' is not a chart variable");
    if (!invertible(*idx)) throw NotInvertible("X(" + name + ") vanishes at the point; choose another transversal");
    return *idx;
  }
  if (pair.is_equation()) return 0;
  for (std::size_t v = 0; v < rp.chart->dim(); ++v)
    if (invertible(v)) return v;
  throw EvaluationError(EvaluationError::Kind::degenerate_field, "X vanishes at the point");
}

namespace {

template <class S>
void truncate_result(KResult<S>& r, int order) {
  auto cut = [&](JetMatrix<S>& a) {
    for (auto& row : a)
      for (auto& x : row) x = x.truncated(order);
  };
  cut(r.H);
  cut(r.G);
  cut(r.normality_residual);
  for (auto& K : r.K) cut(K);
  for (auto& x : r.x_residual) x = x.truncated(order);
  r.trace = r.trace.truncated(order);
  r.order = std::min(r.order, order);
}

template <class S>
int jet_matrix_order(const JetMatrix<S>& a) {
  int o = kMaxOrder;
  for (const auto& row : a)
    for (const auto& x : row) o = std::min(o, x.order());
  return o;
}

}  // namespace

template <class S>
InvariantReport<S> normalized_invariants(const PairFields& pair, const Point& point, const NormalizationOptions& opt) {
  const int k = pair.k, r = opt.order;
  if (r < 0) throw OrderExhausted("report order must be non-negative");
  // each compute_K consumes 2k+1 orders; the projective rescaling adds 2k more
  int N = r + (opt.normalize ? 4 * k + 1 : 2 * k + 1);
  for (int attempt = 0; attempt < 4; ++attempt) {
    if (N > kMaxOrder) break;
    InvariantReport<S> rep;
    rep.point = point_string(point, pair.vars);
    rep.k = k;
    rep.m = pair.m;
    rep.report_order = r;
    rep.audit.add("input expressions", N);
    RealizedPair<S> rp = realize<S>(pair, point, N);
    const std::size_t tau = choose_transversal(pair, rp, opt.transversal);
    rep.transversal = rp.chart->name(tau);

    rep.input = compute_K(rp.X, rp.V, k, tau);
    rep.audit.add("H", jet_matrix_order(rep.input.H));
    rep.audit.add("normal frame G", jet_matrix_order(rep.input.G));
    rep.audit.add("K (input X)", rep.input.order);
    int got = rep.input.order;
    if (opt.normalize) {
      rep.f = projective_scaling(rp.X, rep.input.trace, k, pair.m, tau);
      rep.audit.add("projective scaling f", rep.f.order());
      rep.normalized = compute_K(rp.X.times(rep.f), rp.V, k, tau);
      rep.normalized_computed = true;
      rep.audit.add("K (projective fX)", rep.normalized.order);
      got = rep.normalized.order;
    }
    if (got < r) {
      N += r - got;
      continue;
    }
    truncate_result(rep.input, r);
    if (opt.normalize) {
      truncate_result(rep.normalized, r);
      rep.f = rep.f.truncated(r);
    }
    rep.audit.add("reported", r);
    return rep;
  }
  throw OrderExhausted("could not reach report order " + std::to_string(r));
}

template <class S>
TrivialityVerdict triviality_test(const PairFields& pair, const std::vector<Point>& points,
                                  const NormalizationOptions& opt) {
  std::vector<std::future<InvariantReport<S>>> jobs;
  for (const auto& p : points)
    jobs.push_back(std::async(std::launch::async, [&pair, p, opt] { return normalized_invariants<S>(pair, p, opt); }));
  TrivialityVerdict v;
  v.order = opt.order;
  for (auto& job : jobs) {
    InvariantReport<S> rep = job.get();
    v.points.push_back(rep.point);
    const auto& K = opt.normalize ? rep.normalized.K : rep.input.K;
    bool found = false;
    for (std::size_t i = 0; i < K.size() && !found; ++i)
      for (std::size_t a = 0; a < K[i].size() && !found; ++a)
        for (std::size_t b = 0; b < K[i][a].size() && !found; ++b) {
          const Jet<S>& x = K[i][a][b];
          if (x.is_negligible()) continue;
          found = true;
          std::ostringstream s;
          const auto& t = x.terms().front();
          for (std::size_t var = 0; var < x.chart().dim(); ++var)
            if (t.first[var]) s << "d" << x.chart().name(var) << "^" << int(t.first[var]) << " ";
          s << "coefficient " << ScalarTraits<S>::to_string(t.second);
          v.witnesses.push_back({rep.point, static_cast<int>(i), static_cast<int>(a), static_cast<int>(b), s.str()});
        }
    if (found) v.flat = false;
  }
  if (v.flat) {
    v.summary = "flat to order " + std::to_string(opt.order) + " at all " + std::to_string(points.size()) + " points";
  } else {
    const auto& w = v.witnesses.front();
    v.summary = "not flat: K_" + std::to_string(w.index) + "[" + std::to_string(w.row + 1) + "][" +
                std::to_string(w.col + 1) + "] nonzero at " + w.point + " (" + w.coefficient + ")";
  }
  return v;
}

#define JETGEOM_INSTANTIATE_PIPE(S)                                                                            \
  template std::size_t choose_transversal<S>(const PairFields&, const RealizedPair<S>&, const std::string&);   \
  template InvariantReport<S> normalized_invariants<S>(const PairFields&, const Point&,                        \
                                                       const NormalizationOptions&);                           \
  template TrivialityVerdict triviality_test<S>(const PairFields&, const std::vector<Point>&,                  \
                                                const NormalizationOptions&);

JETGEOM_INSTANTIATE_PIPE(Rational)
JETGEOM_INSTANTIATE_PIPE(double)

}  // namespace jetgeom

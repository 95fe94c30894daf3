#include "jetgeom/report.hpp"

#include <algorithm>

namespace jetgeom {

template <class S>
Json jet_json(const Jet<S>& x) {
  Json out;
  out["order"] = x.order();
  Json terms = Json::array();
  auto sorted = x.terms();
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [mono, c] : sorted) {
    Json e = Json::object();
    for (std::size_t v = 0; v < x.chart().dim(); ++v)
      if (mono[v]) e[x.chart().name(v)] = mono[v];
    terms.push_back({{"exponents", e}, {"coefficient", ScalarTraits<S>::to_string(c)}});
  }
  out["terms"] = terms;
  return out;
}

template <class S>
Json jet_matrix_json(const JetMatrix<S>& a) {
  Json rows = Json::array();
  for (const auto& row : a) {
    Json r = Json::array();
    for (const auto& x : row) r.push_back(jet_json(x));
    rows.push_back(r);
  }
  return rows;
}

Json audit_json(const OrderAudit& audit) {
  Json a = Json::array();
  for (const auto& [what, order] : audit.entries) a.push_back({{"stage", what}, {"order", order}});
  return a;
}

Json gauge_json(const std::string& transversal, bool projective) {
  Json g;
  g["transversal"] = transversal;
  g["normal_frame"] = "G = Id on the hypersurface " + transversal + " = const through the point";
  if (projective) g["projective_scaling"] = "f = 1 and X(f) = 0 on the same hypersurface";
  return g;
}

Json filtration_json(const FiltrationReport& r) {
  Json out;
  out["point"] = r.point;
  out["k"] = r.k;
  out["m"] = r.m;
  out["n"] = r.n;
  Json levels = Json::array();
  for (const auto& l : r.levels)
    levels.push_back({{"level", l.level}, {"rank", l.rank}, {"expected", l.expected}, {"ok", l.ok}});
  out["levels"] = levels;
  out["g1"] = r.g1;
  out["g2"] = r.g2;
  out["regular"] = r.regular();
  if (!r.failure.empty()) out["failure"] = r.failure;
  return out;
}

Json equation_type_json(const EquationTypeReport& r) {
  Json out;
  out["filtration"] = filtration_json(r.filtration);
  Json levels = Json::array();
  for (const auto& l : r.levels)
    levels.push_back({{"level", l.level},
                      {"ch_rank", l.ch_rank},
                      {"expected", l.expected},
                      {"contained_in_lower", l.contained_in_lower},
                      {"closure_defect", l.closure_defect},
                      {"applicable", l.applicable},
                      {"ok", l.ok}});
  out["characteristics"] = levels;
  out["w0_closure_defect"] = r.w0_closure_defect;
  out["w0_matches_ch"] = r.w0_matches_ch;
  out["consistent"] = r.consistent;
  out["verdict"] = r.verdict;
  return out;
}

namespace {

template <class S>
Json k_result_json(const KResult<S>& r) {
  Json out;
  out["order"] = r.order;
  out["H"] = jet_matrix_json(r.H);
  out["normal_frame_G"] = jet_matrix_json(r.G);
  Json K = Json::array();
  for (const auto& Ki : r.K) K.push_back(jet_matrix_json(Ki));
  out["K"] = K;
  out["trace_K_top"] = jet_json(r.trace);
  Json xr = Json::array();
  for (const auto& x : r.x_residual) xr.push_back(jet_json(x));
  out["x_component"] = xr;
  out["normality_residual"] = jet_matrix_json(r.normality_residual);
  return out;
}

template <class S>
Json scalars(const std::vector<std::vector<std::vector<S>>>& c, const std::vector<std::string>& names) {
  Json out = Json::object();
  for (std::size_t a = 0; a < c.size(); ++a)
    for (std::size_t b = a + 1; b < c.size(); ++b) {
      Json e = Json::object();
      for (std::size_t d = 0; d < c.size(); ++d)
        if (!exactly_zero(c[a][b][d])) e[names[d]] = ScalarTraits<S>::to_string(c[a][b][d]);
      if (!e.empty()) out["[" + names[a] + "," + names[b] + "]"] = e;
    }
  return out;
}

template <class S>
Json jets(const std::vector<std::vector<std::vector<Jet<S>>>>& c, const std::vector<std::string>& names) {
  Json out = Json::object();
  for (std::size_t a = 0; a < c.size(); ++a)
    for (std::size_t b = a + 1; b < c.size(); ++b) {
      Json e = Json::object();
      for (std::size_t d = 0; d < c.size(); ++d)
        if (!c[a][b][d].is_zero()) e[names[d]] = jet_json(c[a][b][d]);
      if (!e.empty()) out["[" + names[a] + "," + names[b] + "]"] = e;
    }
  return out;
}

Json checks_json(const std::vector<IdentityCheck>& checks) {
  Json out = Json::array();
  for (const auto& c : checks) out.push_back({{"name", c.name}, {"ok", c.ok}, {"failures", c.failures}});
  return out;
}

}  // namespace

template <class S>
Json invariants_json(const InvariantReport<S>& r) {
  Json out;
  out["point"] = r.point;
  out["k"] = r.k;
  out["m"] = r.m;
  out["report_order"] = r.report_order;
  out["gauge"] = gauge_json(r.transversal, r.normalized_computed);
  out["input"] = k_result_json(r.input);
  if (r.normalized_computed) {
    out["projective_scaling_f"] = jet_json(r.f);
    out["normalized"] = k_result_json(r.normalized);
  }
  out["order_audit"] = audit_json(r.audit);
  return out;
}

Json triviality_json(const TrivialityVerdict& v) {
  Json out;
  out["flat"] = v.flat;
  out["order"] = v.order;
  out["points"] = v.points;
  Json w = Json::array();
  for (const auto& x : v.witnesses)
    w.push_back({{"point", x.point},
                 {"invariant", "K_" + std::to_string(x.index)},
                 {"row", x.row + 1},
                 {"col", x.col + 1},
                 {"coefficient", x.coefficient}});
  out["witnesses"] = w;
  out["summary"] = v.summary;
  return out;
}

template <class S>
Json trace_check_json(const TraceCheck<S>& c, int order) {
  Json out;
  out["order"] = order;
  out["left"] = jet_json(c.left.truncated(order));
  out["right"] = jet_json(c.right.truncated(order));
  out["agree"] = c.left.equals(c.right, order);
  return out;
}

Json schwarzian_json(const SchwarzianCheck& c) {
  Json out;
  Json s = Json::array();
  for (const auto& x : c.samples)
    s.push_back({{"s", x.s},
                 {"tau", x.tau},
                 {"from_jets", x.from_jets},
                 {"from_flow", x.from_flow},
                 {"rel_error", x.rel_error}});
  out["samples"] = s;
  out["max_rel_error"] = c.max_rel_error;
  out["tolerance"] = c.tolerance;
  out["ok"] = c.ok;
  return out;
}

template <class S>
Json bundle_json(const BundleResult<S>& r) {
  const auto& sys = r.system;
  const auto& st = r.structure;
  const int m = r.chart.m;
  const int order = st.order;
  Json out;
  out["k"] = r.chart.k;
  out["m"] = m;
  out["gauge"] = gauge_json(r.transversal, true);
  out["fiber_cap"] = r.chart.fiber_cap;
  out["base_order"] = r.base_order;
  out["bundle_order"] = r.bundle_order;

  // frame unknowns, namespaced apart from the coframe components below
  Json frame_unknowns;
  Json beta = Json::array(), g0 = Json::array(), g1 = Json::array();
  for (int j = 0; j < m; ++j) {
    Json bj = Json::array();
    for (int s = 0; s < m; ++s) {
      Json row = Json::array();
      for (int t = 0; t < m; ++t) row.push_back(jet_json(sys.beta[j][s][t].truncated(order)));
      bj.push_back(row);
    }
    beta.push_back(bj);
    g0.push_back(jet_json(sys.gamma0[j].truncated(order)));
    g1.push_back(jet_json(sys.gamma1[j].truncated(order)));
  }
  frame_unknowns["frame.beta"] = beta;
  frame_unknowns["frame.gamma0"] = g0;
  frame_unknowns["frame.gamma1"] = g1;
  frame_unknowns["gamma_placement"] = sys.gamma_placement;
  frame_unknowns["conditions_hold"] = sys.conditions_hold;
  out["normalization"] = frame_unknowns;

  Json frame;
  frame["members"] = r.frame.names;
  frame["rank_at_section"] = r.frame.rank_at_section;
  out["frame"] = frame;

  Json s;
  s["order"] = order;
  s["table"] = jets(st.table, st.names);
  Json w = Json::array();
  for (const auto& wl : st.w) w.push_back(jet_matrix_json(wl));
  s["w"] = w;
  s["checks"] = checks_json(st.checks);
  s["flat"] = st.flat;
  s["jacobi_checked"] = st.jacobi_checked;
  s["jacobi_ok"] = st.jacobi_ok;

  // dw^c = -sum_{a<b} c^c_ab w^a ^ w^b for the dual coframe, constant parts
  Json coframe = Json::object();
  const std::size_t D = st.names.size();
  for (std::size_t c = 0; c < D; ++c) {
    Json terms = Json::array();
    for (std::size_t a = 0; a < D; ++a)
      for (std::size_t b = a + 1; b < D; ++b) {
        const S v = st.table[a][b][c].constant_term();
        if (!exactly_zero(v))
          terms.push_back({{"wedge", {"coframe." + st.names[a], "coframe." + st.names[b]}},
                           {"coefficient", ScalarTraits<S>::to_string(-v)}});
      }
    coframe["d coframe." + st.names[c]] = terms;
  }
  s["coframe"] = coframe;
  out["structure"] = s;

  if (st.cartan_computed) {
    const auto& cb = st.cartan;
    Json c;
    c["basis"] = cb.names;
    c["constants"] = scalars(cb.constants, cb.names);
    c["model"] = scalars(cb.model, cb.names);
    c["residual"] = jets(cb.residual, cb.names);
    c["flat"] = cb.flat;
    c["relations"] = checks_json(cb.relations);
    out["cartan"] = c;
  }
  out["order_audit"] = audit_json(r.audit);
  return out;
}

#define JETGEOM_INSTANTIATE_REPORT(S)                                 \
  template Json jet_json<S>(const Jet<S>&);                           \
  template Json jet_matrix_json<S>(const JetMatrix<S>&);              \
  template Json invariants_json<S>(const InvariantReport<S>&);        \
  template Json trace_check_json<S>(const TraceCheck<S>&, int);       \
  template Json bundle_json<S>(const BundleResult<S>&);

JETGEOM_INSTANTIATE_REPORT(Rational)
JETGEOM_INSTANTIATE_REPORT(double)

}  // namespace jetgeom

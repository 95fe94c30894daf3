#include "jetgeom/ode_pair.hpp"

#include <sstream>

#include "jetgeom/errors.hpp"

namespace jetgeom {

namespace {

ExprPtr var(int i, int j) { return Expr::make_variable("x[" + std::to_string(i) + "," + std::to_string(j) + "]"); }

bool is_zero_constant(const ExprPtr& e) { return e->kind == ExprKind::constant && sgn(e->value) == 0; }

// -sum_{p,q} Gamma^i_{pq} x1_p x1_q
std::vector<ExprPtr> geodesic_rhs(const PairSpec& spec) {
  std::vector<ExprPtr> F;
  for (int i = 1; i <= spec.m; ++i) {
    ExprPtr acc;
    for (int p = 1; p <= spec.m; ++p)
      for (int q = 1; q <= spec.m; ++q) {
        const ExprPtr& g = spec.Gamma(i, p, q);
        if (is_zero_constant(g)) continue;
        ExprPtr term = Expr::make_binary(ExprKind::product, g,
                                         p == q ? Expr::make_power(var(1, p), 2)
                                                : Expr::make_binary(ExprKind::product, var(1, p), var(1, q)));
        acc = acc ? Expr::make_binary(ExprKind::sum, acc, term) : term;
      }
    F.push_back(acc ? Expr::make_unary(ExprKind::negate, acc) : Expr::make_constant(0));
  }
  return F;
}

}  // namespace

PairFields build_equation_pair(const PairSpec& spec) {
  if (spec.kind == PairKind::generic) throw SpecError("build_equation_pair needs an ode or geodesic spec");
  PairFields p;
  p.spec = spec;
  p.k = spec.k;
  p.m = spec.m;
  p.n = (spec.k + 1) * spec.m + 1;
  p.vars = equation_variable_names(spec.k, spec.m);
  p.F = spec.kind == PairKind::geodesic ? geodesic_rhs(spec) : spec.F;
  p.X.push_back(Expr::make_constant(1));
  for (int i = 0; i <= spec.k; ++i)
    for (int j = 1; j <= spec.m; ++j) p.X.push_back(i < spec.k ? var(i + 1, j) : p.F[j - 1]);
  for (int j = 1; j <= spec.m; ++j) {
    std::vector<ExprPtr> col(p.n, Expr::make_constant(0));
    col[p.x_index(spec.k, j)] = Expr::make_constant(1);
    p.V.push_back(std::move(col));
  }
  return p;
}

PairFields build_generic_pair(const PairSpec& spec) {
  if (spec.kind != PairKind::generic) throw SpecError("build_generic_pair needs a generic spec");
  PairFields p;
  p.spec = spec;
  p.k = spec.k;
  p.m = spec.m;
  p.n = spec.dim;
  if (p.n != (p.k + 1) * p.m + 1) throw SpecError("generic pair dimension must be (k+1)m+1");
  p.vars = spec.vars;
  p.X = spec.X;
  p.V = spec.V;
  return p;
}

PairFields build_pair(const PairSpec& spec) {
  return spec.kind == PairKind::generic ? build_generic_pair(spec) : build_equation_pair(spec);
}

Point parse_point(const std::string& text, const std::vector<std::string>& vars) {
  Point p(vars.size(), Rational(0));
  if (text.empty()) return p;
  // split on commas that are not inside brackets
  std::vector<std::string> parts;
  std::string cur;
  int depth = 0;
  for (char c : text) {
    if (c == '[') ++depth;
    if (c == ']') --depth;
    if (c == ',' && depth == 0) {
      parts.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  parts.push_back(cur);
  const bool named = text.find('=') != std::string::npos;
  if (!named) {
    if (parts.size() != vars.size())
      throw SpecError("point needs " + std::to_string(vars.size()) + " values, got " + std::to_string(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) p[i] = parse_rational(parts[i]);
    return p;
  }
  for (const auto& part : parts) {
    auto eq = part.find('=');
    if (eq == std::string::npos) throw SpecError("point entry '" + part + "' is not name=value");
    std::string name = part.substr(0, eq);
    std::size_t idx = vars.size();
    for (std::size_t i = 0; i < vars.size(); ++i)
      if (vars[i] == name) idx = i;
    if (idx == vars.size()) throw SpecError("point names unknown coordinate '" + name + "'");
    try {
      p[idx] = parse_rational(part.substr(eq + 1));
    } catch (const std::exception&) {
      throw SpecError("bad point value '" + part.substr(eq + 1) + "'");
    }
  }
  return p;
}

std::string point_string(const Point& p, const std::vector<std::string>& vars) {
  std::ostringstream s;
  for (std::size_t i = 0; i < p.size(); ++i) s << (i ? "," : "") << vars[i] << "=" << p[i].get_str();
  return s.str();
}

ChartPtr pair_chart(const PairFields& pair, ScalarMode) { return make_chart(pair.vars); }

template <class S>
std::vector<S> convert_point(const Point& p) {
  std::vector<S> out;
  for (const auto& q : p) out.push_back(ScalarTraits<S>::from_rational(q));
  return out;
}

template <class S>
RealizedPair<S> realize(const PairFields& pair, const Point& point, int order, ChartPtr chart) {
  if (!chart) chart = pair_chart(pair, ScalarTraits<S>::mode);
  if (point.size() != chart->dim()) throw SpecError("point dimension does not match the chart");
  RealizedPair<S> r;
  r.chart = chart;
  r.point = convert_point<S>(point);
  std::vector<Jet<S>> coords;
  for (std::size_t v = 0; v < chart->dim(); ++v) coords.push_back(Jet<S>::coordinate(chart, v, r.point[v], order));
  JetLookup<S> lookup = [&](const std::string& name) -> const Jet<S>* {
    auto idx = chart->find(name);
    return idx ? &coords[*idx] : nullptr;
  };
  auto field = [&](const std::vector<ExprPtr>& exprs) {
    FieldJet<S> f(chart, order);
    for (std::size_t i = 0; i < exprs.size(); ++i)
      if (!is_zero_constant(exprs[i])) f.comps[i] = evaluate<S>(*exprs[i], chart, order, lookup);
    return f;
  };
  r.X = field(pair.X);
  const double tol = chart->tolerance();
  bool vanishing = true;
  for (const auto& c : r.X.value_at_point())
    if (!ScalarTraits<S>::is_zero(c, tol)) vanishing = false;
  if (vanishing)
    throw EvaluationError(EvaluationError::Kind::degenerate_field, "X vanishes at the point; the line field is degenerate");
  for (const auto& col : pair.V) r.V.push_back(field(col));
  return r;
}

namespace {

template <class S>
std::vector<std::vector<FieldJet<S>>> ad_blocks(const RealizedPair<S>& rp, int depth) {
  std::vector<std::vector<FieldJet<S>>> blocks{rp.V};
  for (int i = 1; i <= depth; ++i) {
    std::vector<FieldJet<S>> next;
    for (const auto& v : blocks.back()) next.push_back(lie_bracket(rp.X, v));
    blocks.push_back(std::move(next));
  }
  return blocks;
}

template <class S>
std::vector<FieldJet<S>> level_span(const RealizedPair<S>& rp, const std::vector<std::vector<FieldJet<S>>>& blocks,
                                    int level) {
  std::vector<FieldJet<S>> span{rp.X};
  for (int i = 0; i <= level; ++i) span.insert(span.end(), blocks[i].begin(), blocks[i].end());
  return span;
}

template <class S>
FiltrationReport filtration(const PairFields& pair, const RealizedPair<S>& rp,
                            const std::vector<std::vector<FieldJet<S>>>& blocks, const Point& point) {
  FiltrationReport rep;
  rep.point = point_string(point, pair.vars);
  rep.k = pair.k;
  rep.m = pair.m;
  rep.n = pair.n;
  rep.g1 = true;
  for (int i = 0; i <= pair.k; ++i) {
    LevelRank lr{i, span_rank(level_span(rp, blocks, i)), static_cast<std::size_t>((i + 1) * pair.m + 1), false};
    lr.ok = lr.rank == lr.expected;
    if (!lr.ok && rep.g1) {
      rep.g1 = false;
      rep.failure = "G1 fails at level " + std::to_string(i) + ": rank " + std::to_string(lr.rank) + ", expected " +
                    std::to_string(lr.expected);
    }
    rep.levels.push_back(lr);
  }
  rep.g2 = rep.levels.back().rank == static_cast<std::size_t>(pair.n);
  if (!rep.g2 && rep.failure.empty())
    rep.failure = "G2 fails: rank of V^k is " + std::to_string(rep.levels.back().rank) + ", expected " +
                  std::to_string(pair.n);
  return rep;
}

}  // namespace

template <class S>
FiltrationReport regularity_report(const PairFields& pair, const Point& point, int order) {
  if (order < pair.k + 1)
    throw OrderExhausted("regularity check needs jet order at least k+1 = " + std::to_string(pair.k + 1));
  auto rp = realize<S>(pair, point, order);
  return filtration(pair, rp, ad_blocks(rp, pair.k), point);
}

template <class S>
EquationTypeReport equation_type_report(const PairFields& pair, const Point& point, int order) {
  if (order < pair.k + 1)
    throw OrderExhausted("equation-type check needs jet order at least k+1 = " + std::to_string(pair.k + 1));
  auto rp = realize<S>(pair, point, order);
  auto blocks = ad_blocks(rp, pair.k);
  EquationTypeReport rep;
  rep.filtration = filtration(pair, rp, blocks, point);
  if (!rep.filtration.regular()) throw RegularityFailure("pair is not regular: " + rep.filtration.failure);

  rep.w0_closure_defect = bracket_closure_defect(rp.V);
  rep.consistent = rep.w0_closure_defect == 0;
  std::string failure = rep.consistent ? "" : "W^0 = V is not bracket-closed at the point";
  const std::size_t m = pair.m;
  for (int i = 0; i < pair.k; ++i) {
    auto span = level_span(rp, blocks, i + 1);
    auto ch = cauchy_characteristic_rank(span);
    CharacteristicLevel lvl{i, ch.rank, (i + 1) * m, false, 0, false};
    std::vector<FieldJet<S>> ch_fields;
    for (const auto& a : ch.basis) {
      std::vector<Jet<S>> coeffs;
      for (const auto& x : a) coeffs.push_back(Jet<S>::constant(rp.chart, x, span[0].order()));
      ch_fields.push_back(combine(span, coeffs));
    }
    auto lower = level_span(rp, blocks, i);
    auto with_ch = lower;
    with_ch.insert(with_ch.end(), ch_fields.begin(), ch_fields.end());
    lvl.contained_in_lower = span_rank(with_ch) == span_rank(lower);
    lvl.closure_defect = ch_fields.empty() ? 0 : bracket_closure_defect(ch_fields);
    lvl.applicable = rep.filtration.levels[i + 1].rank < static_cast<std::size_t>(pair.n);
    lvl.ok = !lvl.applicable || (lvl.ch_rank == lvl.expected && lvl.contained_in_lower && lvl.closure_defect == 0);
    if (i == 0) {
      auto v_and_ch = rp.V;
      v_and_ch.insert(v_and_ch.end(), ch_fields.begin(), ch_fields.end());
      rep.w0_matches_ch = ch.rank == m && span_rank(v_and_ch) == m;
      lvl.ok = lvl.ok && rep.w0_matches_ch;
    }
    if (!lvl.ok && failure.empty()) {
      failure = "Ch(V^" + std::to_string(i + 1) + ") check fails: rank " + std::to_string(lvl.ch_rank) +
                " (expected " + std::to_string(lvl.expected) + ")" +
                (lvl.contained_in_lower ? "" : ", not contained in V^" + std::to_string(i)) +
                (lvl.closure_defect ? ", not bracket-closed" : "");
    }
    rep.levels.push_back(lvl);
  }
  rep.consistent = failure.empty();
  rep.verdict = rep.consistent ? "consistent with equation type at this point to tested order (necessary conditions only)"
                               : failure;
  return rep;
}

ScalarMatrix<Rational> curvature_oracle(const PairSpec& spec, const Point& point) {
  if (spec.kind != PairKind::geodesic) throw SpecError("curvature oracle needs a geodesic spec");
  const int m = spec.m;
  auto names = equation_variable_names(1, m);
  auto chart = make_chart(names);
  if (point.size() != names.size()) throw SpecError("point dimension does not match the chart");
  using J = Jet<Rational>;
  // symmetrized Gamma as order-1 jets
  std::vector<J> g(static_cast<std::size_t>(m) * m * m);
  auto G = [&](int j, int p, int q) -> J& { return g[(j * m + p) * m + q]; };
  for (int j = 0; j < m; ++j)
    for (int p = 0; p < m; ++p)
      for (int q = 0; q < m; ++q) {
        J a = evaluate_jet<Rational>(*spec.Gamma(j + 1, p + 1, q + 1), chart, point, 1);
        J b = evaluate_jet<Rational>(*spec.Gamma(j + 1, q + 1, p + 1), chart, point, 1);
        G(j, p, q) = (a + b).scaled(Rational(1, 2));
      }
  auto x0 = [&](int i) { return static_cast<std::size_t>(1 + i); };
  auto val = [](const J& a) { return a.constant_term(); };
  ScalarMatrix<Rational> out(m, std::vector<Rational>(m, 0));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      Rational acc = 0;
      for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q) {
          Rational r = val(G(j, p, q).partial(x0(i))) - val(G(j, i, p).partial(x0(q)));
          for (int s = 0; s < m; ++s) r += val(G(j, i, s)) * val(G(s, p, q)) - val(G(s, i, p)) * val(G(j, s, q));
          acc += r * point[1 + m + p] * point[1 + m + q];
        }
      out[j][i] = acc;
    }
  return out;
}

#define JETGEOM_INSTANTIATE_PAIR(S)                                                                     \
  template std::vector<S> convert_point<S>(const Point&);                                               \
  template RealizedPair<S> realize<S>(const PairFields&, const Point&, int, ChartPtr);                  \
  template FiltrationReport regularity_report<S>(const PairFields&, const Point&, int);                 \
  template EquationTypeReport equation_type_report<S>(const PairFields&, const Point&, int);

JETGEOM_INSTANTIATE_PAIR(Rational)
JETGEOM_INSTANTIATE_PAIR(double)

}  // namespace jetgeom

#include "jetgeom/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <sstream>

#include "jetgeom/errors.hpp"

namespace jetgeom {

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"check-regular", "equation-type",   "invariants", "trivial-test",
                                              "canonical-frame", "cartan",        "lemma2-check",
                                              "schwarzian-check"};
  return names;
}

std::string dump_report(const Json& report) { return report.dump(2) + "\n"; }

namespace {

struct Failure {
  int code;
  std::string type;
};

Failure classify(const std::exception& e) {
  auto* err = dynamic_cast<const Error*>(&e);
  const int code = err ? err->exit_code() : kExitInternal;
  const char* type = "InternalError";
  if (dynamic_cast<const ParseError*>(&e)) type = "ParseError";
  else if (dynamic_cast<const SpecError*>(&e)) type = "SpecError";
  else if (dynamic_cast<const EvaluationError*>(&e)) type = "EvaluationError";
  else if (dynamic_cast<const RegularityFailure*>(&e)) type = "RegularityFailure";
  else if (dynamic_cast<const NotInvertible*>(&e)) type = "NotInvertible";
  else if (dynamic_cast<const SingularLeadingMatrix*>(&e)) type = "SingularLeadingMatrix";
  else if (dynamic_cast<const OrderExhausted*>(&e)) type = "OrderExhausted";
  else if (dynamic_cast<const GatingViolation*>(&e)) type = "GatingViolation";
  else if (err) type = "Error";
  return {code, type};
}

template <class S>
std::string matrix_constants(const JetMatrix<S>& a) {
  std::ostringstream s;
  const bool scalar = a.size() == 1 && a[0].size() == 1;
  if (scalar) return ScalarTraits<S>::to_string(a[0][0].constant_term());
  s << "[";
  for (std::size_t i = 0; i < a.size(); ++i) {
    s << (i ? ",[" : "[");
    for (std::size_t j = 0; j < a[i].size(); ++j) s << (j ? "," : "") << ScalarTraits<S>::to_string(a[i][j].constant_term());
    s << "]";
  }
  s << "]";
  return s.str();
}

struct Context {
  const RunConfig& cfg;
  PairFields pair;
  std::vector<Point> points;
  Json payload;
  std::string summary;
  int code = kExitOk;
};

template <class S>
void run_typed(Context& cx) {
  const RunConfig& cfg = cx.cfg;
  const PairFields& pair = cx.pair;
  const Point& point = cx.points.front();
  const std::string at = point_string(point, pair.vars);
  const std::string& cmd = cfg.command;

  if (cmd == "check-regular") {
    FiltrationReport r = regularity_report<S>(pair, point, pair.k + 1);
    cx.payload = filtration_json(r);
    cx.payload["order_audit"] = audit_json(OrderAudit{{{"field jets", pair.k + 1}}});
    std::ostringstream s;
    s << (r.regular() ? "regular" : "not regular") << " at " << at << ": ranks";
    for (const auto& l : r.levels) s << " " << l.rank << "/" << l.expected;
    if (!r.regular()) s << " (" << r.failure << ")";
    cx.summary = s.str();
    if (!r.regular()) cx.code = kExitRegularity;
  } else if (cmd == "equation-type") {
    EquationTypeReport r = equation_type_report<S>(pair, point, pair.k + 2);
    cx.payload = equation_type_json(r);
    cx.payload["order_audit"] = audit_json(OrderAudit{{{"field jets", pair.k + 2}}});
    cx.summary = (r.filtration.regular() ? "" : "not regular; ") + r.verdict;
    if (!r.filtration.regular()) cx.code = kExitRegularity;
  } else if (cmd == "invariants") {
    NormalizationOptions opt;
    opt.order = cfg.order;
    opt.transversal = cfg.transversal;
    InvariantReport<S> r = normalized_invariants<S>(pair, point, opt);
    cx.payload = invariants_json(r);
    std::ostringstream s;
    s << "normalized invariants at " << at << " (constant terms, jets to order " << cfg.order << "):";
    for (std::size_t i = 0; i < r.normalized.K.size(); ++i) s << " K_" << i << "=" << matrix_constants(r.normalized.K[i]);
    cx.summary = s.str();
  } else if (cmd == "trivial-test") {
    NormalizationOptions opt;
    opt.order = cfg.order;
    opt.transversal = cfg.transversal;
    TrivialityVerdict v = triviality_test<S>(pair, cx.points, opt);
    cx.payload = triviality_json(v);
    cx.summary = v.summary;
  } else if (cmd == "canonical-frame" || cmd == "cartan") {
    BundleOptions opt;
    opt.order = cfg.order;
    opt.transversal = cfg.transversal;
    opt.fiber_cap = cfg.fiber_cap;
    opt.cartan = cmd == "cartan";
    BundleResult<S> r = canonical_bundle<S>(pair, point, opt);
    cx.payload = bundle_json(r);
    std::ostringstream s;
    bool ids = true;
    for (const auto& c : r.structure.checks) ids = ids && c.ok;
    if (opt.cartan) {
      bool rel = true;
      for (const auto& c : r.structure.cartan.relations) rel = rel && c.ok;
      s << "Cartan block at " << at << ": " << (r.structure.cartan.flat ? "flat (residual zero)" : "curved")
        << " to order " << cfg.order << "; model relations " << (rel ? "hold" : "fail");
    } else {
      s << "canonical frame of " << r.frame.fields.size() << " fields at " << at << ", structure functions "
        << (r.structure.flat ? "constant" : "non-constant") << " to order " << cfg.order << "; identities "
        << (ids ? "hold" : "fail") << "; conditions " << (r.system.conditions_hold ? "hold" : "fail");
    }
    cx.summary = s.str();
  } else if (cmd == "lemma2-check") {
    ExprPtr f = parse_expression(cfg.scale);
    const int k = pair.k;
    int N = cfg.order + 2 * k + 3;
    for (int attempt = 0;; ++attempt) {
      if (attempt > 4 || N > kMaxOrder) throw OrderExhausted("trace law could not reach order " + std::to_string(cfg.order));
      RealizedPair<S> rp = realize<S>(pair, point, N);
      const std::size_t tau = choose_transversal(pair, rp, cfg.transversal);
      Jet<S> fj = evaluate_jet<S>(*f, rp.chart, rp.point, N);
      if (ScalarTraits<S>::is_zero(fj.constant_term(), rp.chart->tolerance()))
        throw NotInvertible("the scale function vanishes at the point");
      TraceCheck<S> tc = trace_transform_check(rp.X, rp.V, fj, k, tau);
      const int got = std::min(tc.left.order(), tc.right.order());
      if (got < cfg.order) {
        N += cfg.order - got;
        continue;
      }
      cx.payload = trace_check_json(tc, cfg.order);
      cx.payload["scale"] = cfg.scale;
      cx.payload["gauge"] = gauge_json(rp.chart->name(tau), false);
      cx.payload["order_audit"] = audit_json(OrderAudit{{{"field jets", N}, {"trace law", got}}});
      const bool ok = tc.left.equals(tc.right, cfg.order);
      cx.summary = std::string("trace law for f = ") + cfg.scale + " at " + at + ": " + (ok ? "holds" : "FAILS") +
                   " to order " + std::to_string(cfg.order);
      if (!ok) cx.code = kExitInternal;
      break;
    }
  } else if (cmd == "schwarzian-check") {
    SchwarzianCheck c = schwarzian_trajectory_check(pair, point, parse_expression(cfg.scale));
    cx.payload = schwarzian_json(c);
    cx.payload["scale"] = cfg.scale;
    std::ostringstream s;
    s << "Schwarzian of f = " << cfg.scale << " along the trajectory from " << at << ": max relative error "
      << c.max_rel_error << (c.ok ? " (ok)" : " (exceeds tolerance)");
    cx.summary = s.str();
    if (!c.ok) cx.code = kExitInternal;
  }
}

Json config_json(const RunConfig& c, const std::string& mode) {
  Json j;
  j["command"] = c.command;
  j["input"] = c.input;
  j["points"] = c.points;
  j["order"] = c.order;
  j["mode"] = mode;
  j["transversal"] = c.transversal;
  j["fiber_cap"] = c.fiber_cap;
  if (c.command == "lemma2-check" || c.command == "schwarzian-check") j["scale"] = c.scale;
  return j;
}

// parsed --point values, the origin when none are given
std::vector<Point> sample_points(const PairFields& pair, const std::vector<std::string>& given) {
  std::vector<Point> pts;
  for (const auto& g : given) pts.push_back(parse_point(g, pair.vars));
  if (pts.empty()) pts.emplace_back(pair.vars.size(), Rational(0));
  return pts;
}

}  // namespace

RunOutcome run_config(const RunConfig& cfg) {
  RunOutcome out;
  out.config = cfg;
  Json doc;
  doc["tool"] = "jetgeom";
  doc["version"] = kToolVersion;
  doc["schema_version"] = kReportSchemaVersion;
  const auto t0 = std::chrono::steady_clock::now();
  std::string mode = cfg.mode;
  try {
    if (std::find(command_names().begin(), command_names().end(), cfg.command) == command_names().end())
      throw SpecError("unknown command '" + cfg.command + "'");
    if (cfg.order < 1) throw SpecError("--order must be at least 1");
    if (!cfg.mode.empty() && cfg.mode != "rational" && cfg.mode != "float")
      throw SpecError("--mode must be rational or float");
    PairSpec spec = load_problem_file(cfg.input);
    if (cfg.mode == "float") spec.mode = ScalarMode::floating;
    if (cfg.mode == "rational") spec.mode = ScalarMode::rational;
    if (cfg.command == "schwarzian-check") spec.mode = ScalarMode::floating;
    mode = mode_name(spec.mode);
    doc["config"] = config_json(cfg, mode);
    Context cx{cfg, build_pair(spec), {}, Json(), "", kExitOk};
    doc["pair"] = {{"name", spec.name}, {"kind", kind_name(spec.kind)}, {"k", cx.pair.k}, {"m", cx.pair.m},
                   {"n", cx.pair.n}, {"vars", cx.pair.vars}};
    cx.points = sample_points(cx.pair, cfg.points);
    if (cfg.command == "trivial-test" && cfg.points.size() <= 1) {
      // two further deterministic sample points
      const std::size_t n = cx.pair.vars.size();
      Point half(n, Rational(1, 2)), alt(n);
      for (std::size_t i = 0; i < n; ++i) alt[i] = i % 2 ? Rational(-1, 3) : Rational(1);
      cx.points.push_back(half);
      cx.points.push_back(alt);
    }
    if (spec.mode == ScalarMode::rational)
      run_typed<Rational>(cx);
    else
      run_typed<double>(cx);
    doc["result"] = cx.payload;
    out.exit_code = cx.code;
    out.summary = cx.summary;
  } catch (const std::exception& e) {
    if (!doc.contains("config")) doc["config"] = config_json(cfg, mode);
    Failure f = classify(e);
    out.exit_code = f.code;
    out.summary = f.type + ": " + e.what();
    doc["error"] = {{"type", f.type}, {"message", e.what()}};
  }
  doc["verdict"] = out.summary;
  doc["exit_code"] = out.exit_code;
  if (cfg.timing)
    doc["timing_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.report = std::move(doc);
  return out;
}

RunOutcome run_command(const std::vector<std::string>& args) {
  RunConfig cfg;
  CLI::App app{"Jet-level invariants and canonical frames of pairs (X, V)", "jetgeom"};
  app.add_option("command", cfg.command, "command")->required()->check(CLI::IsMember(command_names()));
  app.add_option("input", cfg.input, "problem file (.pair)")->required();
  app.add_option("--point", cfg.points, "point assignment, e.g. \"t=0,x[0,1]=1\"; repeat for trivial-test");
  app.add_option("--order", cfg.order, "report jet order (default 4)");
  app.add_option("--mode", cfg.mode, "rational or float (default: problem file)");
  app.add_option("--transversal", cfg.transversal, "transversal coordinate");
  app.add_option("--fiber-cap", cfg.fiber_cap, "fiber degree cap for the bundle chart (default: none)");
  app.add_option("--scale", cfg.scale, "scale function f for lemma2-check and schwarzian-check");
  app.add_option("--out", cfg.out, "JSON report path (default: standard output)");
  app.add_flag("--timing", cfg.timing, "record wall time in the report");
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    RunOutcome out;
    out.summary = app.help();
    out.exit_code = kExitOk;
    return out;
  } catch (const CLI::ParseError& e) {
    RunOutcome out;
    out.config = cfg;
    out.exit_code = kExitParse;
    out.summary = std::string("usage error: ") + e.what();
    out.report = {{"tool", "jetgeom"},
                  {"version", kToolVersion},
                  {"schema_version", kReportSchemaVersion},
                  {"error", {{"type", "UsageError"}, {"message", e.what()}}},
                  {"verdict", out.summary},
                  {"exit_code", out.exit_code}};
    return out;
  }
  return run_config(cfg);
}

}  // namespace jetgeom

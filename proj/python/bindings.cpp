#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "jetgeom/cli.hpp"
#include "jetgeom/errors.hpp"

namespace py = pybind11;
using namespace jetgeom;

namespace {

py::exception<Error>* jetgeom_error = nullptr;

PairFields load(const std::string& text) { return build_pair(parse_problem_file(text)); }

Point point_of(const PairFields& pair, const std::string& text) {
  return text.empty() ? Point(pair.vars.size(), Rational(0)) : parse_point(text, pair.vars);
}

bool rational(const PairFields& pair) { return pair.spec.mode == ScalarMode::rational; }

std::string py_invariants(const std::string& text, const std::string& point, int order, const std::string& transversal) {
  PairFields pair = load(text);
  NormalizationOptions opt;
  opt.order = order;
  opt.transversal = transversal;
  const Point p = point_of(pair, point);
  Json j = rational(pair) ? invariants_json(normalized_invariants<Rational>(pair, p, opt))
                          : invariants_json(normalized_invariants<double>(pair, p, opt));
  return j.dump();
}

std::string py_regularity(const std::string& text, const std::string& point) {
  PairFields pair = load(text);
  const Point p = point_of(pair, point);
  return filtration_json(rational(pair) ? regularity_report<Rational>(pair, p, pair.k + 1)
                                        : regularity_report<double>(pair, p, pair.k + 1))
      .dump();
}

std::string py_bundle(const std::string& text, const std::string& point, int order, bool cartan, int fiber_cap) {
  PairFields pair = load(text);
  BundleOptions opt;
  opt.order = order;
  opt.cartan = cartan;
  opt.fiber_cap = fiber_cap;
  const Point p = point_of(pair, point);
  Json j = rational(pair) ? bundle_json(canonical_bundle<Rational>(pair, p, opt))
                          : bundle_json(canonical_bundle<double>(pair, p, opt));
  return j.dump();
}

std::string py_schwarzian(const std::string& text, const std::string& point, const std::string& f) {
  PairFields pair = load(text);
  return schwarzian_json(schwarzian_trajectory_check(pair, point_of(pair, point), parse_expression(f))).dump();
}

py::list py_model(int k, int m) {
  auto c = model_algebra(k, m);
  auto names = cartan_basis_names(k, m);
  py::list out;
  for (std::size_t a = 0; a < c.size(); ++a)
    for (std::size_t b = a + 1; b < c.size(); ++b)
      for (std::size_t e = 0; e < c.size(); ++e)
        if (!exactly_zero(c[a][b][e])) out.append(py::make_tuple(names[a], names[b], names[e], c[a][b][e].get_str()));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "jet-level invariants and canonical frames of pairs (X, V)";

  // leaked on purpose: the translator may run during interpreter teardown
  jetgeom_error = new py::exception<Error>(m, "JetgeomError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(jetgeom_error->ptr())(e.what());
      exc.attr("exit_code") = e.exit_code();
      PyErr_SetObject(jetgeom_error->ptr(), exc.ptr());
    }
  });

  m.def("run_command", [](const std::vector<std::string>& args) {
    RunOutcome r = run_command(args);
    return py::make_tuple(r.exit_code, r.summary, r.report.is_null() ? std::string() : r.report.dump());
  }, py::arg("args"), "Runs the command line; returns (exit code, verdict, report JSON).");
  m.def("parse_expression", [](const std::string& s) { return to_string(*parse_expression(s)); },
        "Canonical form of an expression.");
  m.def("invariants", &py_invariants, py::arg("problem"), py::arg("point") = "", py::arg("order") = 4,
        py::arg("transversal") = "");
  m.def("regularity", &py_regularity, py::arg("problem"), py::arg("point") = "");
  m.def("canonical_bundle", &py_bundle, py::arg("problem"), py::arg("point") = "", py::arg("order") = 1,
        py::arg("cartan") = true, py::arg("fiber_cap") = -1);
  m.def("schwarzian_check", &py_schwarzian, py::arg("problem"), py::arg("point"), py::arg("f"));
  m.def("model_algebra", &py_model, py::arg("k"), py::arg("m"),
        "Nonzero structure constants (a, b, c, value) with a before b in the basis H, Y, X, W, G.");
  m.attr("__version__") = kToolVersion;
}

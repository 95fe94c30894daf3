#pragma once

#include <functional>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "jetgeom/jet.hpp"

namespace jetgeom {

enum class ExprKind { constant, decimal, variable, negate, sum, product, quotient, power, function };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprKind kind;
  Rational value;     // constant
  double decimal = 0; // decimal literal (float mode only)
  std::string text;   // variable name, function name, or decimal literal spelling
  int exponent = 0;   // power
  std::vector<ExprPtr> args;

  static ExprPtr make_constant(Rational q);
  static ExprPtr make_decimal(std::string spelling);
  static ExprPtr make_variable(std::string name);
  static ExprPtr make_unary(ExprKind kind, ExprPtr a);
  static ExprPtr make_binary(ExprKind kind, ExprPtr a, ExprPtr b);
  static ExprPtr make_power(ExprPtr base, int exponent);
  static ExprPtr make_function(std::string name, ExprPtr arg);
};

bool structurally_equal(const Expr& a, const Expr& b);

/// Parses one expression. Quotients and negations of literal constants are
/// folded, so "1/2" is the rational constant one half.
ExprPtr parse_expression(std::string_view text);

/// Canonical printer; parse_expression(to_string(e)) is structurally equal to e.
std::string to_string(const Expr& e);

/// Debug form such as "sum(product(1/2,t),3)".
std::string tree_string(const Expr& e);

void collect_variables(const Expr& e, std::set<std::string>& out);
bool uses_functions(const Expr& e);
bool uses_decimals(const Expr& e);

template <class S>
using JetLookup = std::function<const Jet<S>*(const std::string&)>;

/// Evaluates with jet arithmetic; each variable is replaced by the jet the
/// lookup returns. Constants live on `chart` at `order`.
template <class S>
Jet<S> evaluate(const Expr& e, const ChartPtr& chart, int order, const JetLookup<S>& lookup);

/// Jet of the expression at `point`: variable v becomes point[v] + d_v.
template <class S>
Jet<S> evaluate_jet(const Expr& e, const ChartPtr& chart, const std::vector<S>& point, int order);

template <class S>
S evaluate_scalar(const Expr& e, const std::function<S(const std::string&)>& lookup);

// ---------------------------------------------------------------------------
// Problem files

enum class PairKind { ode, generic, geodesic };
std::string kind_name(PairKind k);

struct PairSpec {
  std::string name;
  PairKind kind = PairKind::ode;
  ScalarMode mode = ScalarMode::rational;
  int k = 0;
  int m = 0;
  std::vector<ExprPtr> F;      // ode: m entries
  std::vector<ExprPtr> gamma;  // geodesic: m^3 entries, index ((i-1)*m + p-1)*m + q-1
  int dim = 0;                 // generic
  std::vector<std::string> vars;
  std::vector<ExprPtr> X;               // generic: dim entries
  std::vector<std::vector<ExprPtr>> V;  // generic: m columns of dim entries

  const ExprPtr& Gamma(int i, int p, int q) const { return gamma[((i - 1) * m + p - 1) * m + q - 1]; }
};

/// Chart variable names of the equation manifold: t, x[0,1..m], ..., x[k,1..m].
std::vector<std::string> equation_variable_names(int k, int m);

PairSpec parse_problem_file(std::string_view text);
PairSpec load_problem_file(const std::string& path);

/// Builds an ode spec directly from expression strings (tests, bindings).
PairSpec make_ode_spec(int k, int m, const std::vector<std::string>& F, ScalarMode mode = ScalarMode::rational,
                       std::string name = "ode");

}  // namespace jetgeom

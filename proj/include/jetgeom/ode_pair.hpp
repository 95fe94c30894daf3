#pragma once

#include <string>
#include <vector>

#include "jetgeom/expression.hpp"
#include "jetgeom/vector_field.hpp"

namespace jetgeom {

using Point = std::vector<Rational>;

/// The pair (X, V) as coefficient expressions over a chart.
struct PairFields {
  PairSpec spec;
  int k = 0, m = 0, n = 0;
  std::vector<std::string> vars;
  std::vector<ExprPtr> X;               // n coefficients
  std::vector<std::vector<ExprPtr>> V;  // m columns of n coefficients
  std::vector<ExprPtr> F;               // right-hand sides for ode/geodesic kinds

  bool is_equation() const { return spec.kind != PairKind::generic; }
  /// Chart index of x[i,j] (j is 1-based) on equation charts.
  std::size_t x_index(int i, int j) const { return 1 + static_cast<std::size_t>(i) * m + (j - 1); }
};

PairFields build_equation_pair(const PairSpec& spec);
PairFields build_generic_pair(const PairSpec& spec);
/// Dispatches on spec.kind.
PairFields build_pair(const PairSpec& spec);

/// Parses "t=1,x[0,1]=1/2" (unnamed coordinates stay 0) or a plain
/// comma-separated list of values in chart order.
Point parse_point(const std::string& text, const std::vector<std::string>& vars);
std::string point_string(const Point& p, const std::vector<std::string>& vars);

template <class S>
struct RealizedPair {
  ChartPtr chart;
  std::vector<S> point;
  FieldJet<S> X;
  std::vector<FieldJet<S>> V;
};

/// Jets of X and V at the point to the given order. Throws
/// EvaluationError(degenerate_field) if X vanishes at the point.
template <class S>
RealizedPair<S> realize(const PairFields& pair, const Point& point, int order, ChartPtr chart = nullptr);

ChartPtr pair_chart(const PairFields& pair, ScalarMode mode);

template <class S>
std::vector<S> convert_point(const Point& p);

struct LevelRank {
  int level;
  std::size_t rank;
  std::size_t expected;
  bool ok;
};

struct FiltrationReport {
  std::string point;
  int k = 0, m = 0, n = 0;
  std::vector<LevelRank> levels;  // V^0 .. V^k, V^i = span(X, V, ..., ad^i V)
  bool g1 = false, g2 = false;
  bool regular() const { return g1 && g2; }
  std::string failure;  // first failing condition, empty when regular
};

template <class S>
FiltrationReport regularity_report(const PairFields& pair, const Point& point, int order);

struct CharacteristicLevel {
  int level;              // i; the tested distribution is V^{i+1}
  std::size_t ch_rank;    // rank of Ch(V^{i+1}) at the point
  std::size_t expected;   // (i+1) m
  bool contained_in_lower;  // Ch(V^{i+1}) within V^i at the point
  std::size_t closure_defect;  // bracket closure of Ch(V^{i+1}) at the point
  bool ok;
  /// false when V^{i+1} already spans the tangent space (Ch is everything).
  bool applicable = true;
};

struct EquationTypeReport {
  FiltrationReport filtration;
  std::vector<CharacteristicLevel> levels;  // i = 0 .. k-1
  std::size_t w0_closure_defect = 0;        // integrability of V at the point
  bool w0_matches_ch = false;               // V coincides with Ch(V^1) at the point
  bool consistent = false;
  std::string verdict;
};

template <class S>
EquationTypeReport equation_type_report(const PairFields& pair, const Point& point, int order);

/// sum_{p,q} R^j_{ipq} x1_p x1_q at the point as a matrix with row j (upper index) and
/// column i, the layout of K_0. Uses the symmetrized Christoffel symbols.
ScalarMatrix<Rational> curvature_oracle(const PairSpec& spec, const Point& point);

}  // namespace jetgeom

#include <cmath>

#include "jetgeom/errors.hpp"
#include "jetgeom/expression.hpp"

namespace jetgeom {

namespace {

// Taylor coefficients f^(n)(c)/n!, n = 0..order, of the named function.
std::vector<double> function_series(const std::string& name, double c, int order) {
  std::vector<double> d(order + 1);
  if (name == "exp") {
    double e = std::exp(c), fact = 1;
    for (int n = 0; n <= order; ++n) {
      if (n) fact *= n;
      d[n] = e / fact;
    }
  } else if (name == "sin" || name == "cos") {
    const double s = std::sin(c), co = std::cos(c);
    // derivatives of sin cycle through sin, cos, -sin, -cos
    const double cyc_sin[4] = {s, co, -s, -co};
    const double cyc_cos[4] = {co, -s, -co, s};
    double fact = 1;
    for (int n = 0; n <= order; ++n) {
      if (n) fact *= n;
      d[n] = (name == "sin" ? cyc_sin[n % 4] : cyc_cos[n % 4]) / fact;
    }
  } else {  // log
    if (!(c > 0))
      throw EvaluationError(EvaluationError::Kind::division_at_pole, "log evaluated at a non-positive value");
    d[0] = std::log(c);
    double p = 1;
    for (int n = 1; n <= order; ++n) {
      p /= c;
      d[n] = (n % 2 ? 1.0 : -1.0) * p / n;
    }
  }
  return d;
}

template <class S>
Jet<S> eval(const Expr& e, const ChartPtr& chart, int order, const JetLookup<S>& lookup) {
  using T = ScalarTraits<S>;
  switch (e.kind) {
    case ExprKind::constant:
      return Jet<S>::constant(chart, T::from_rational(e.value), order);
    case ExprKind::decimal:
      if constexpr (T::mode == ScalarMode::rational)
        throw EvaluationError(EvaluationError::Kind::decimal_in_rational_mode,
                              "decimal literal '" + e.text + "' requires float mode");
      else
        return Jet<S>::constant(chart, e.decimal, order);
    case ExprKind::variable: {
      const Jet<S>* j = lookup(e.text);
      if (!j) throw EvaluationError(EvaluationError::Kind::unbound_variable, "unbound variable '" + e.text + "'");
      return j->truncated(order);
    }
    case ExprKind::negate:
      return -eval<S>(*e.args[0], chart, order, lookup);
    case ExprKind::sum:
      return eval<S>(*e.args[0], chart, order, lookup) + eval<S>(*e.args[1], chart, order, lookup);
    case ExprKind::product:
      return eval<S>(*e.args[0], chart, order, lookup) * eval<S>(*e.args[1], chart, order, lookup);
    case ExprKind::quotient: {
      Jet<S> den = eval<S>(*e.args[1], chart, order, lookup);
      try {
        den = den.inverse();
      } catch (const NotInvertible&) {
        throw EvaluationError(EvaluationError::Kind::division_at_pole,
                              "denominator '" + to_string(*e.args[1]) + "' vanishes at the point");
      }
      return eval<S>(*e.args[0], chart, order, lookup) * den;
    }
    case ExprKind::power: {
      Jet<S> base = eval<S>(*e.args[0], chart, order, lookup);
      try {
        return base.pow(e.exponent);
      } catch (const NotInvertible&) {
        throw EvaluationError(EvaluationError::Kind::division_at_pole,
                              "negative power of '" + to_string(*e.args[0]) + "' at a zero");
      }
    }
    case ExprKind::function:
      if constexpr (T::mode == ScalarMode::rational) {
        throw EvaluationError(EvaluationError::Kind::function_needs_float_mode,
                              "function '" + e.text + "' requires float mode");
      } else {
        Jet<S> a = eval<S>(*e.args[0], chart, order, lookup);
        const int ord = a.order();
        const double c = a.constant_term();
        Jet<S> h = a - Jet<S>::constant(chart, c, ord);
        auto d = function_series(e.text, c, ord);
        Jet<S> r = Jet<S>::constant(chart, d[ord], ord);
        for (int n = ord - 1; n >= 0; --n) r = r * h + Jet<S>::constant(chart, d[n], ord);
        return r;
      }
  }
  throw Error("unreachable expression kind");
}

template <class S>
S eval_scalar(const Expr& e, const std::function<S(const std::string&)>& lookup) {
  using T = ScalarTraits<S>;
  switch (e.kind) {
    case ExprKind::constant:
      return T::from_rational(e.value);
    case ExprKind::decimal:
      if constexpr (T::mode == ScalarMode::rational)
        throw EvaluationError(EvaluationError::Kind::decimal_in_rational_mode,
                              "decimal literal '" + e.text + "' requires float mode");
      else
        return e.decimal;
    case ExprKind::variable:
      return lookup(e.text);
    case ExprKind::negate:
      return -eval_scalar<S>(*e.args[0], lookup);
    case ExprKind::sum:
      return eval_scalar<S>(*e.args[0], lookup) + eval_scalar<S>(*e.args[1], lookup);
    case ExprKind::product:
      return eval_scalar<S>(*e.args[0], lookup) * eval_scalar<S>(*e.args[1], lookup);
    case ExprKind::quotient: {
      S den = eval_scalar<S>(*e.args[1], lookup);
      if (exactly_zero(den))
        throw EvaluationError(EvaluationError::Kind::division_at_pole, "division by zero");
      return eval_scalar<S>(*e.args[0], lookup) / den;
    }
    case ExprKind::power: {
      S base = eval_scalar<S>(*e.args[0], lookup);
      int n = e.exponent;
      if (n < 0) {
        if (exactly_zero(base))
          throw EvaluationError(EvaluationError::Kind::division_at_pole, "negative power of zero");
        base = T::from_int(1) / base;
        n = -n;
      }
      S r = T::from_int(1);
      while (n > 0) {
        if (n & 1) r *= base;
        base *= base;
        n >>= 1;
      }
      return r;
    }
    case ExprKind::function:
      if constexpr (T::mode == ScalarMode::rational) {
        throw EvaluationError(EvaluationError::Kind::function_needs_float_mode,
                              "function '" + e.text + "' requires float mode");
      } else {
        return function_series(e.text, eval_scalar<S>(*e.args[0], lookup), 0)[0];
      }
  }
  throw Error("unreachable expression kind");
}

}  // namespace

template <class S>
Jet<S> evaluate(const Expr& e, const ChartPtr& chart, int order, const JetLookup<S>& lookup) {
  return eval<S>(e, chart, order, lookup);
}

template <class S>
Jet<S> evaluate_jet(const Expr& e, const ChartPtr& chart, const std::vector<S>& point, int order) {
  std::vector<Jet<S>> coords;
  coords.reserve(chart->dim());
  for (std::size_t v = 0; v < chart->dim(); ++v) coords.push_back(Jet<S>::coordinate(chart, v, point.at(v), order));
  JetLookup<S> lookup = [&](const std::string& name) -> const Jet<S>* {
    auto idx = chart->find(name);
    return idx ? &coords[*idx] : nullptr;
  };
  return eval<S>(e, chart, order, lookup);
}

template <class S>
S evaluate_scalar(const Expr& e, const std::function<S(const std::string&)>& lookup) {
  return eval_scalar<S>(e, lookup);
}

#define JETGEOM_INSTANTIATE_EVAL(S)                                                          \
  template Jet<S> evaluate<S>(const Expr&, const ChartPtr&, int, const JetLookup<S>&);       \
  template Jet<S> evaluate_jet<S>(const Expr&, const ChartPtr&, const std::vector<S>&, int); \
  template S evaluate_scalar<S>(const Expr&, const std::function<S(const std::string&)>&);

JETGEOM_INSTANTIATE_EVAL(Rational)
JETGEOM_INSTANTIATE_EVAL(double)

}  // namespace jetgeom

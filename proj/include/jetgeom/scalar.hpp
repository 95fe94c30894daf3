#pragma once

#include <gmpxx.h>

#include <cmath>
#include <stdexcept>
#include <string>

namespace jetgeom {

using Rational = mpq_class;

enum class ScalarMode { rational, floating };

inline const char* mode_name(ScalarMode m) {
  return m == ScalarMode::rational ? "rational" : "float";
}

/// Relative tolerance used for zero tests in float mode.
inline constexpr double kDefaultFloatTolerance = 1e-9;

/// Parses "p/q", "p" or (float mode only) a decimal literal.
Rational parse_rational(const std::string& text);

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
  static constexpr ScalarMode mode = ScalarMode::rational;
  static bool is_zero(const Rational& x, double = 0.0) { return sgn(x) == 0; }
  static Rational from_rational(const Rational& q) { return q; }
  static Rational from_int(long v) { return Rational(v); }
  static double to_double(const Rational& x) { return x.get_d(); }
  static double magnitude(const Rational& x) { return std::fabs(x.get_d()); }
  static std::string to_string(const Rational& x) { return x.get_str(); }
};

template <>
struct ScalarTraits<double> {
  static constexpr ScalarMode mode = ScalarMode::floating;
  // Absolute test against a caller-supplied scale-adjusted tolerance.
  static bool is_zero(double x, double tol = kDefaultFloatTolerance) { return std::fabs(x) <= tol; }
  static double from_rational(const Rational& q) { return q.get_d(); }
  static double from_int(long v) { return static_cast<double>(v); }
  static double to_double(double x) { return x; }
  static double magnitude(double x) { return std::fabs(x); }
  static std::string to_string(double x);
};

/// Exact zero test regardless of mode (used for storage invariants).
inline bool exactly_zero(const Rational& x) { return sgn(x) == 0; }
inline bool exactly_zero(double x) { return x == 0.0; }

}  // namespace jetgeom

#include "jetgeom/jet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

namespace jetgeom {

// ---------------------------------------------------------------------------
// Scalars

Rational parse_rational(const std::string& text) {
  std::string s;
  for (char c : text)
    if (c != ' ' && c != '\t') s.push_back(c);
  if (s.empty()) throw SpecError("empty number");
  auto dot = s.find_first_of(".eE");
  if (dot != std::string::npos) {
    // Decimal literal: converted exactly from its decimal digits.
    std::size_t pos = 0;
    bool neg = false;
    if (s[pos] == '+' || s[pos] == '-') neg = s[pos++] == '-';
    std::string mant, frac;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) mant.push_back(s[pos++]);
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) frac.push_back(s[pos++]);
    }
    long exp10 = 0;
    if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
      ++pos;
      exp10 = std::stol(s.substr(pos));
      pos = s.size();
    }
    if (pos != s.size() || (mant.empty() && frac.empty())) throw SpecError("malformed number '" + text + "'");
    mpz_class num(mant + frac + (mant.empty() && frac.empty() ? "0" : ""), 10);
    exp10 -= static_cast<long>(frac.size());
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(exp10)));
    Rational q = exp10 >= 0 ? Rational(num * scale) : Rational(num, scale);
    q.canonicalize();
    return neg ? Rational(-q) : q;
  }
  Rational q;
  if (q.set_str(s[0] == '+' ? s.substr(1) : s, 10) != 0) throw SpecError("malformed rational '" + text + "'");
  if (q.get_den() == 0) throw SpecError("zero denominator in '" + text + "'");
  q.canonicalize();
  return q;
}

std::string ScalarTraits<double>::to_string(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Chart and monomials

Chart::Chart(std::vector<std::string> names, std::vector<int> caps, double tolerance)
    : names_(std::move(names)), caps_(std::move(caps)), tolerance_(tolerance) {
  if (names_.size() > kMaxVars) throw Error("chart dimension exceeds " + std::to_string(kMaxVars));
  if (!caps_.empty() && caps_.size() != names_.size()) throw Error("cap vector does not match chart dimension");
  for (std::size_t v = 0; v < caps_.size(); ++v)
    if (caps_[v] >= 0) capped_.push_back(v);
  if (capped_.empty()) caps_.clear();
}

std::optional<std::size_t> Chart::find(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

std::size_t Chart::index(const std::string& name) const {
  auto i = find(name);
  if (!i) throw EvaluationError(EvaluationError::Kind::unbound_variable, "unknown chart variable '" + name + "'");
  return *i;
}

bool Chart::same_as(const Chart& other) const {
  return this == &other || (names_ == other.names_ && caps_ == other.caps_);
}

ChartPtr make_chart(std::vector<std::string> names, std::vector<int> caps, double tolerance) {
  return std::make_shared<const Chart>(std::move(names), std::move(caps), tolerance);
}

Monomial::Monomial(const std::vector<int>& exponents) {
  if (exponents.size() > kMaxVars) throw Error("too many exponents");
  for (std::size_t i = 0; i < exponents.size(); ++i) set(i, exponents[i]);
}

Monomial Monomial::unit(std::size_t var) {
  Monomial m;
  m.set(var, 1);
  return m;
}

void Monomial::set(std::size_t i, int e) {
  if (e < 0 || e > 255) throw Error("exponent out of range");
  int old = (*this)[i];
  std::uint64_t shift = 56 - 8 * (i % 8);
  words_[i / 8] &= ~(std::uint64_t{0xff} << shift);
  words_[i / 8] |= std::uint64_t(e) << shift;
  degree_ += e - old;
}

std::vector<int> Monomial::exponents(std::size_t dim) const {
  std::vector<int> e(dim);
  for (std::size_t i = 0; i < dim; ++i) e[i] = (*this)[i];
  return e;
}

// ---------------------------------------------------------------------------
// Jet helpers

namespace {

void check_same_chart(const ChartPtr& a, const ChartPtr& b) {
  if (!a || !b) throw ChartMismatch("jet without chart");
  if (a != b && !a->same_as(*b)) throw ChartMismatch("jets live on different charts");
}

bool within_caps(const Chart& chart, const Monomial& m) {
  for (auto v : chart.capped_vars())
    if (m[v] > chart.cap(v)) return false;
  return true;
}

/// Minimum exponent of `v` over the stored terms, not beyond validity + 1.
template <class S>
int var_valuation(const Jet<S>& a, std::size_t v) {
  int val = a.cap_validity(v) + 1;
  for (const auto& t : a.terms()) val = std::min(val, t.first[v]);
  return std::max(val, 0);
}

template <class S>
void sort_merge(std::vector<typename Jet<S>::Term>& terms) {
  std::sort(terms.begin(), terms.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  std::size_t out = 0;
  for (std::size_t i = 0; i < terms.size();) {
    std::size_t j = i + 1;
    S acc = terms[i].second;
    while (j < terms.size() && terms[j].first == terms[i].first) acc += terms[j++].second;
    if (!exactly_zero(acc)) {
      terms[out].first = terms[i].first;
      terms[out].second = acc;
      ++out;
    }
    i = j;
  }
  terms.resize(out);
}

}  // namespace

template <class S>
Jet<S>::Jet(ChartPtr chart, int order) : chart_(std::move(chart)), order_(order) {
  if (order_ > kMaxOrder) order_ = kMaxOrder;
  if (chart_->has_caps()) {
    capv_.assign(chart_->dim(), kMaxOrder);
    for (auto v : chart_->capped_vars()) capv_[v] = chart_->cap(v);
  }
}

template <class S>
Jet<S> Jet<S>::constant(ChartPtr chart, const S& value, int order) {
  Jet j(std::move(chart), order);
  if (!exactly_zero(value)) j.terms_.emplace_back(Monomial{}, value);
  return j;
}

template <class S>
Jet<S> Jet<S>::coordinate(ChartPtr chart, std::size_t var, const S& value, int order) {
  if (var >= chart->dim()) throw Error("coordinate index out of range");
  Jet j = constant(chart, value, order);
  if (order >= 1 && chart->cap(var) != 0) j.terms_.emplace_back(Monomial::unit(var), ScalarTraits<S>::from_int(1));
  return j;
}

template <class S>
Jet<S> Jet<S>::monomial(ChartPtr chart, const Monomial& m, const S& coeff, int order) {
  Jet j(std::move(chart), order);
  if (!exactly_zero(coeff) && m.degree() <= j.order_ && within_caps(*j.chart_, m)) j.terms_.emplace_back(m, coeff);
  return j;
}

template <class S>
Jet<S> Jet<S>::from_terms(ChartPtr chart, int order, std::vector<Term> terms) {
  Jet j(std::move(chart), order);
  const bool caps = j.chart_->has_caps();
  std::erase_if(terms, [&](const Term& t) {
    return t.first.degree() > j.order_ || (caps && !within_caps(*j.chart_, t.first)) || exactly_zero(t.second);
  });
  sort_merge<S>(terms);
  j.terms_ = std::move(terms);
  return j;
}

template <class S>
S Jet<S>::constant_term() const {
  if (!terms_.empty() && terms_[0].first.degree() == 0) return terms_[0].second;
  return ScalarTraits<S>::from_int(0);
}

template <class S>
S Jet<S>::coefficient(const Monomial& m) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), m, [](const Term& t, const Monomial& x) { return t.first < x; });
  if (it != terms_.end() && it->first == m) return it->second;
  return ScalarTraits<S>::from_int(0);
}

template <class S>
bool Jet<S>::is_negligible() const {
  if constexpr (ScalarTraits<S>::mode == ScalarMode::rational) {
    return terms_.empty();
  } else {
    for (const auto& t : terms_)
      if (std::fabs(t.second) > chart_->tolerance()) return false;
    return true;
  }
}

template <class S>
int Jet<S>::valuation() const {
  return terms_.empty() ? order_ + 1 : terms_.front().first.degree();
}

template <class S>
int Jet<S>::cap_validity(std::size_t v) const {
  return capv_.empty() ? kMaxOrder : capv_[v];
}

template <class S>
int Jet<S>::min_cap_validity() const {
  int r = kMaxOrder;
  if (!capv_.empty())
    for (auto v : chart_->capped_vars()) r = std::min(r, capv_[v]);
  return r;
}

template <class S>
Jet<S> Jet<S>::truncated(int order) const {
  Jet r = *this;
  if (order >= order_) return r;
  r.order_ = order;
  auto it = std::find_if(r.terms_.begin(), r.terms_.end(), [&](const Term& t) { return t.first.degree() > order; });
  r.terms_.erase(it, r.terms_.end());
  return r;
}

template <class S>
Jet<S> Jet<S>::operator-() const {
  Jet r = *this;
  for (auto& t : r.terms_) t.second = -t.second;
  return r;
}

namespace {

template <class S>
void add_into(Jet<S>& a, const Jet<S>& b, bool subtract) {
  check_same_chart(a.chart_ptr(), b.chart_ptr());
  const int order = std::min(a.order(), b.order());
  using Term = typename Jet<S>::Term;
  const auto& x = a.terms();
  const auto& y = b.terms();
  std::vector<Term> out;
  out.reserve(x.size() + y.size());
  std::size_t i = 0, j = 0;
  while (i < x.size() || j < y.size()) {
    if (j == y.size() || (i < x.size() && x[i].first < y[j].first)) {
      if (x[i].first.degree() <= order) out.push_back(x[i]);
      ++i;
    } else if (i == x.size() || y[j].first < x[i].first) {
      if (y[j].first.degree() <= order) out.emplace_back(y[j].first, subtract ? S(-y[j].second) : y[j].second);
      ++j;
    } else {
      if (x[i].first.degree() <= order) {
        S s = subtract ? S(x[i].second - y[j].second) : S(x[i].second + y[j].second);
        if (!exactly_zero(s)) out.emplace_back(x[i].first, std::move(s));
      }
      ++i;
      ++j;
    }
  }
  a.mutable_terms() = std::move(out);
  a.set_order(order);
  auto& cv = a.mutable_caps();
  for (std::size_t v = 0; v < cv.size(); ++v) cv[v] = std::min(cv[v], b.cap_validity(v));
}

}  // namespace

template <class S>
Jet<S>& Jet<S>::operator+=(const Jet& o) {
  add_into(*this, o, false);
  return *this;
}

template <class S>
Jet<S>& Jet<S>::operator-=(const Jet& o) {
  add_into(*this, o, true);
  return *this;
}

template <class S>
Jet<S>& Jet<S>::operator*=(const S& s) {
  if (exactly_zero(s)) {
    terms_.clear();
    return *this;
  }
  for (auto& t : terms_) t.second *= s;
  return *this;
}

template <class S>
Jet<S> Jet<S>::scaled(const S& s) const {
  Jet r = *this;
  r *= s;
  return r;
}

template <class S>
Jet<S> Jet<S>::partial(std::size_t var) const {
  if (var >= chart_->dim()) throw Error("partial: variable index out of range");
  if (order_ <= 0) throw OrderExhausted("partial derivative of an order-0 jet in '" + chart_->name(var) + "'");
  Jet r(chart_, order_ - 1);
  r.capv_ = capv_;
  if (!r.capv_.empty() && chart_->cap(var) >= 0) r.capv_[var] -= 1;
  r.terms_.reserve(terms_.size());
  for (const auto& [m, c] : terms_) {
    int e = m[var];
    if (e == 0) continue;
    Monomial n = m;
    n.set(var, e - 1);
    r.terms_.emplace_back(n, c * ScalarTraits<S>::from_int(e));
  }
  return r;
}

template <class S>
Jet<S> Jet<S>::integral(std::size_t var) const {
  Jet r(chart_, std::min(order_ + 1, kMaxOrder));
  r.capv_ = capv_;
  const int cap = chart_->cap(var);
  if (!r.capv_.empty() && cap >= 0) r.capv_[var] = std::min(r.capv_[var] + 1, cap);
  r.terms_.reserve(terms_.size());
  for (const auto& [m, c] : terms_) {
    int e = m[var];
    if (cap >= 0 && e + 1 > cap) continue;
    if (m.degree() + 1 > r.order_) continue;
    Monomial n = m;
    n.set(var, e + 1);
    r.terms_.emplace_back(n, c / ScalarTraits<S>::from_int(e + 1));
  }
  return r;
}

template <class S>
Jet<S> Jet<S>::slice(std::size_t var, int degree) const {
  Jet r = *this;
  std::erase_if(r.terms_, [&](const Term& t) { return t.first[var] != degree; });
  return r;
}

template <class S>
Jet<S> operator*(const Jet<S>& a, const Jet<S>& b) {
  check_same_chart(a.chart_ptr(), b.chart_ptr());
  const int order = std::min(a.order(), b.order());
  const Chart& chart = a.chart();
  Jet<S> r(a.chart_ptr(), order);
  if (chart.has_caps()) {
    auto& cv = r.mutable_caps();
    for (auto v : chart.capped_vars()) {
      int va = a.cap_validity(v), vb = b.cap_validity(v);
      int la = var_valuation(a, v), lb = var_valuation(b, v);
      cv[v] = std::min({va + lb, vb + la, chart.cap(v)});
    }
  }
  if (a.is_zero() || b.is_zero()) return r;

  using Term = typename Jet<S>::Term;
  const auto& x = a.size() <= b.size() ? a.terms() : b.terms();
  const auto& y = a.size() <= b.size() ? b.terms() : a.terms();
  const bool caps = chart.has_caps();

  if (x.size() == 1 && x[0].first.degree() == 0) {
    auto& out = r.mutable_terms();
    out.reserve(y.size());
    for (const auto& t : y)
      if (t.first.degree() <= order) out.emplace_back(t.first, t.second * x[0].second);
    return r;
  }
  if (x.size() == 1) {
    auto& out = r.mutable_terms();
    const Monomial& m = x[0].first;
    for (const auto& t : y) {
      if (t.first.degree() + m.degree() > order) break;
      Monomial n = t.first + m;
      if (caps && !within_caps(chart, n)) continue;
      out.emplace_back(n, t.second * x[0].second);
    }
    return r;  // translation preserves the monomial order
  }

  std::vector<Term> out;
  if constexpr (ScalarTraits<S>::mode == ScalarMode::rational) {
    // Integer kernel: clear denominators, accumulate with addmul, divide once.
    auto numerators = [](const std::vector<Term>& t, mpz_class& den) {
      den = 1;
      for (const auto& [m, c] : t) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), c.get_den_mpz_t());
      std::vector<mpz_class> num(t.size());
      for (std::size_t i = 0; i < t.size(); ++i) {
        mpz_divexact(num[i].get_mpz_t(), den.get_mpz_t(), t[i].second.get_den_mpz_t());
        num[i] *= t[i].second.get_num();
      }
      return num;
    };
    mpz_class dx, dy;
    auto nx = numerators(x, dx);
    auto ny = numerators(y, dy);
    std::unordered_map<Monomial, mpz_class, MonomialHash> acc;
    acc.reserve(std::min<std::size_t>(x.size() * y.size(), 1u << 20));
    for (std::size_t i = 0; i < x.size(); ++i) {
      const int di = x[i].first.degree();
      if (di > order) break;
      for (std::size_t j = 0; j < y.size(); ++j) {
        if (di + y[j].first.degree() > order) break;
        Monomial n = x[i].first + y[j].first;
        if (caps && !within_caps(chart, n)) continue;
        mpz_addmul(acc[n].get_mpz_t(), nx[i].get_mpz_t(), ny[j].get_mpz_t());
      }
    }
    mpz_class den = dx * dy;
    out.reserve(acc.size());
    for (auto& [m, n] : acc) {
      if (sgn(n) == 0) continue;
      Rational q(n, den);
      q.canonicalize();
      out.emplace_back(m, std::move(q));
    }
  } else {
    std::unordered_map<Monomial, double, MonomialHash> acc;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const int di = x[i].first.degree();
      if (di > order) break;
      for (std::size_t j = 0; j < y.size(); ++j) {
        if (di + y[j].first.degree() > order) break;
        Monomial n = x[i].first + y[j].first;
        if (caps && !within_caps(chart, n)) continue;
        acc[n] += x[i].second * y[j].second;
      }
    }
    out.reserve(acc.size());
    for (auto& [m, v] : acc)
      if (v != 0.0) out.emplace_back(m, v);
  }
  std::sort(out.begin(), out.end(), [](const Term& p, const Term& q) { return p.first < q.first; });
  r.mutable_terms() = std::move(out);
  return r;
}

template <class S>
Jet<S> Jet<S>::inverse() const {
  const S c = constant_term();
  bool invertible;
  if constexpr (ScalarTraits<S>::mode == ScalarMode::rational)
    invertible = !exactly_zero(c);
  else
    invertible = std::fabs(c) > chart_->tolerance();
  if (!invertible) throw NotInvertible("jet with vanishing constant term is not invertible");
  const S one = ScalarTraits<S>::from_int(1);
  const S two = ScalarTraits<S>::from_int(2);
  Jet y = constant(chart_, one / c, order_);
  int prec = 0;
  while (prec < order_) {
    prec = std::min(2 * prec + 1, order_);
    Jet a = truncated(prec);
    y.order_ = prec;  // y is exact to the old precision; Newton doubles it
    Jet ay = a * y;
    Jet corr = constant(chart_, two, prec) - ay;
    y = y * corr;
  }
  y.order_ = order_;
  y.capv_ = capv_;
  return y;
}

template <class S>
Jet<S> Jet<S>::pow(int exponent) const {
  if (exponent < 0) return inverse().pow(-exponent);
  Jet result = constant(chart_, ScalarTraits<S>::from_int(1), order_);
  result.capv_ = capv_;
  Jet base = *this;
  while (exponent > 0) {
    if (exponent & 1) result = result * base;
    exponent >>= 1;
    if (exponent) base = base * base;
  }
  return result;
}

template <class S>
bool Jet<S>::equals(const Jet& o, int limit) const {
  check_same_chart(chart_, o.chart_);
  const int lim = std::min({order_, o.order_, limit});
  Jet d = truncated(lim) - o.truncated(lim);
  if constexpr (ScalarTraits<S>::mode == ScalarMode::rational) {
    return d.is_zero();
  } else {
    double scale = 1.0;
    for (const auto& t : terms_) scale = std::max(scale, std::fabs(t.second));
    for (const auto& t : d.terms_)
      if (std::fabs(t.second) > chart_->tolerance() * scale) return false;
    return true;
  }
}

// ---------------------------------------------------------------------------
// Linear algebra over the jet ring

namespace {

template <class S>
bool pivot_ok(const Jet<S>& x) {
  const S c = x.constant_term();
  if constexpr (ScalarTraits<S>::mode == ScalarMode::rational)
    return !exactly_zero(c);
  else
    return std::fabs(c) > x.chart().tolerance();
}

}  // namespace

template <class S>
JetMatrix<S> jet_linear_solve(JetMatrix<S> a, JetMatrix<S> b) {
  const std::size_t n = a.size();
  if (b.size() != n) throw Error("jet_linear_solve: right-hand side has wrong row count");
  for (const auto& row : a)
    if (row.size() != n) throw Error("jet_linear_solve: matrix is not square");
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t best = n;
    for (std::size_t r = col; r < n; ++r) {
      if (!pivot_ok(a[r][col])) continue;
      if (best == n) {
        best = r;
        continue;
      }
      if constexpr (ScalarTraits<S>::mode == ScalarMode::rational) {
        if (a[r][col].size() < a[best][col].size()) best = r;
      } else {
        if (std::fabs(a[r][col].constant_term()) > std::fabs(a[best][col].constant_term())) best = r;
      }
    }
    if (best == n) throw SingularLeadingMatrix("constant-term matrix is singular (column " + std::to_string(col) + ")");
    std::swap(a[col], a[best]);
    std::swap(b[col], b[best]);
    const Jet<S> inv = a[col][col].inverse();
    for (std::size_t j = col; j < n; ++j)
      if (!a[col][j].is_zero()) a[col][j] = a[col][j] * inv;
    for (auto& x : b[col])
      if (!x.is_zero()) x = x * inv;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col].is_zero()) continue;
      const Jet<S> f = a[r][col];
      for (std::size_t j = col; j < n; ++j)
        if (!a[col][j].is_zero()) a[r][j] -= f * a[col][j];
      for (std::size_t j = 0; j < b[r].size(); ++j)
        if (!b[col][j].is_zero()) b[r][j] -= f * b[col][j];
      // keep the order bookkeeping of the eliminated entry
      a[r][col] = Jet<S>(a[r][col].chart_ptr(), std::min(a[r][col].order(), f.order()));
    }
  }
  // Orders: carry the pivot-row orders into the solution.
  int ord = kMaxOrder;
  for (const auto& row : a)
    for (const auto& x : row) ord = std::min(ord, x.order());
  for (auto& row : b)
    for (auto& x : row) x = x.truncated(std::min(x.order(), ord));
  return b;
}

template <class S>
std::vector<Jet<S>> jet_linear_solve(const JetMatrix<S>& a, const std::vector<Jet<S>>& b) {
  JetMatrix<S> rhs(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) rhs[i] = {b[i]};
  auto x = jet_linear_solve(a, std::move(rhs));
  std::vector<Jet<S>> out;
  out.reserve(x.size());
  for (auto& row : x) out.push_back(std::move(row[0]));
  return out;
}

template <class S>
JetMatrix<S> jet_identity(ChartPtr chart, std::size_t n, int order) {
  JetMatrix<S> id(n);
  for (std::size_t i = 0; i < n; ++i) {
    id[i].reserve(n);
    for (std::size_t j = 0; j < n; ++j)
      id[i].push_back(Jet<S>::constant(chart, ScalarTraits<S>::from_int(i == j ? 1 : 0), order));
  }
  return id;
}

template <class S>
JetMatrix<S> jet_matrix_inverse(const JetMatrix<S>& a) {
  if (a.empty()) return {};
  int ord = min_order(a);
  return jet_linear_solve(a, jet_identity<S>(a[0][0].chart_ptr(), a.size(), ord));
}

template <class S>
JetMatrix<S> jet_matrix_mul(const JetMatrix<S>& a, const JetMatrix<S>& b) {
  if (a.empty()) return {};
  const std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
  JetMatrix<S> c(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i].size() != k) throw Error("jet_matrix_mul: shape mismatch");
    for (std::size_t j = 0; j < m; ++j) {
      int ord = kMaxOrder;
      for (std::size_t l = 0; l < k; ++l) ord = std::min({ord, a[i][l].order(), b[l][j].order()});
      Jet<S> acc(a[0][0].chart_ptr(), ord);
      for (std::size_t l = 0; l < k; ++l)
        if (!a[i][l].is_zero() && !b[l][j].is_zero()) acc += a[i][l] * b[l][j];
      c[i].push_back(std::move(acc));
    }
  }
  return c;
}

template <class S>
Jet<S> embed(const Jet<S>& a, ChartPtr target, const std::vector<std::size_t>& var_map, int order) {
  std::vector<typename Jet<S>::Term> terms;
  terms.reserve(a.size());
  const std::size_t dim = a.chart().dim();
  for (const auto& [m, c] : a.terms()) {
    Monomial n;
    for (std::size_t v = 0; v < dim; ++v)
      if (m[v]) n.set(var_map.at(v), m[v]);
    terms.emplace_back(n, c);
  }
  return Jet<S>::from_terms(std::move(target), std::min(order, a.order()), std::move(terms));
}

template <class S>
int min_order(const JetMatrix<S>& m) {
  int ord = kMaxOrder;
  for (const auto& row : m)
    for (const auto& x : row) ord = std::min(ord, x.order());
  return ord;
}

#define JETGEOM_INSTANTIATE(S)                                                                        \
  template class Jet<S>;                                                                              \
  template Jet<S> operator*(const Jet<S>&, const Jet<S>&);                                            \
  template JetMatrix<S> jet_linear_solve(JetMatrix<S>, JetMatrix<S>);                                 \
  template std::vector<Jet<S>> jet_linear_solve(const JetMatrix<S>&, const std::vector<Jet<S>>&);     \
  template JetMatrix<S> jet_identity<S>(ChartPtr, std::size_t, int);                                  \
  template JetMatrix<S> jet_matrix_inverse(const JetMatrix<S>&);                                      \
  template JetMatrix<S> jet_matrix_mul(const JetMatrix<S>&, const JetMatrix<S>&);                     \
  template Jet<S> embed(const Jet<S>&, ChartPtr, const std::vector<std::size_t>&, int);               \
  template int min_order(const JetMatrix<S>&);

JETGEOM_INSTANTIATE(Rational)
JETGEOM_INSTANTIATE(double)

}  // namespace jetgeom

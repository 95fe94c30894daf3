#include "jetgeom/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "jetgeom/errors.hpp"

namespace jetgeom {

ExprPtr Expr::make_constant(Rational q) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::constant;
  q.canonicalize();
  e->value = std::move(q);
  return e;
}

ExprPtr Expr::make_decimal(std::string spelling) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::decimal;
  e->decimal = std::strtod(spelling.c_str(), nullptr);
  e->text = std::move(spelling);
  return e;
}

ExprPtr Expr::make_variable(std::string name) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::variable;
  e->text = std::move(name);
  return e;
}

ExprPtr Expr::make_unary(ExprKind kind, ExprPtr a) {
  if (kind == ExprKind::negate && a->kind == ExprKind::constant) return make_constant(-a->value);
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->args = {std::move(a)};
  return e;
}

ExprPtr Expr::make_binary(ExprKind kind, ExprPtr a, ExprPtr b) {
  if (kind == ExprKind::quotient && a->kind == ExprKind::constant && b->kind == ExprKind::constant &&
      sgn(b->value) != 0)
    return make_constant(a->value / b->value);
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->args = {std::move(a), std::move(b)};
  return e;
}

ExprPtr Expr::make_power(ExprPtr base, int exponent) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::power;
  e->exponent = exponent;
  e->args = {std::move(base)};
  return e;
}

ExprPtr Expr::make_function(std::string name, ExprPtr arg) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::function;
  e->text = std::move(name);
  e->args = {std::move(arg)};
  return e;
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  switch (a.kind) {
    case ExprKind::constant:
      if (a.value != b.value) return false;
      break;
    case ExprKind::decimal:
      if (a.decimal != b.decimal) return false;
      break;
    case ExprKind::variable:
    case ExprKind::function:
      if (a.text != b.text) return false;
      break;
    case ExprKind::power:
      if (a.exponent != b.exponent) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!structurally_equal(*a.args[i], *b.args[i])) return false;
  return true;
}

namespace {

bool is_function_name(std::string_view s) { return s == "sin" || s == "cos" || s == "exp" || s == "log"; }

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  ExprPtr parse() {
    ExprPtr e = sum();
    skip_space();
    if (pos_ < s_.size()) fail(std::string("unexpected '") + s_[pos_] + "'");
    return e;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i) {
      if (s_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(msg, line, col);
  }

  void skip_space() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  ExprPtr sum() {
    ExprPtr lhs = product();
    for (;;) {
      if (accept('+')) {
        lhs = Expr::make_binary(ExprKind::sum, lhs, product());
      } else if (accept('-')) {
        lhs = Expr::make_binary(ExprKind::sum, lhs, Expr::make_unary(ExprKind::negate, product()));
      } else {
        return lhs;
      }
    }
  }

  ExprPtr product() {
    ExprPtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = Expr::make_binary(ExprKind::product, lhs, unary());
      } else if (accept('/')) {
        lhs = Expr::make_binary(ExprKind::quotient, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  ExprPtr unary() {
    if (accept('-')) return Expr::make_unary(ExprKind::negate, unary());
    if (accept('+')) return unary();
    return power();
  }

  ExprPtr power() {
    ExprPtr base = primary();
    if (!accept('^')) return base;
    // Right associativity with integer exponents only: a^b^c needs b^c to be an integer literal.
    skip_space();
    bool paren = accept('(');
    bool negative = accept('-');
    skip_space();
    if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_])))
      fail("exponent must be an integer literal");
    long v = 0;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      v = v * 10 + (s_[pos_++] - '0');
      if (v > 100000) fail("exponent too large");
    }
    if (paren) expect(')');
    skip_space();
    if (pos_ < s_.size() && s_[pos_] == '^') fail("exponent must be an integer literal");
    return Expr::make_power(base, static_cast<int>(negative ? -v : v));
  }

  ExprPtr primary() {
    skip_space();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      ExprPtr e = sum();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
    fail(std::string("unexpected '") + c + "'");
  }

  ExprPtr number() {
    std::size_t start = pos_;
    bool decimal = false;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (pos_ < s_.size() && s_[pos_] == '.') {
      decimal = true;
      ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        decimal = true;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    std::string tok(s_.substr(start, pos_ - start));
    if (tok == ".") fail("malformed number");
    if (decimal) return Expr::make_decimal(tok);
    return Expr::make_constant(Rational(mpz_class(tok, 10)));
  }

  ExprPtr name() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    std::string id(s_.substr(start, pos_ - start));
    skip_space();
    if (pos_ < s_.size() && s_[pos_] == '[') {
      // indexed variable such as x[0,1]; whitespace inside is dropped
      ++pos_;
      id += '[';
      bool first = true;
      for (;;) {
        skip_space();
        if (!first) {
          if (accept(']')) break;
          expect(',');
          id += ',';
          skip_space();
        }
        first = false;
        if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_])))
          fail("expected integer index");
        std::size_t ds = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        id += std::to_string(std::stol(std::string(s_.substr(ds, pos_ - ds))));
      }
      id += ']';
      return Expr::make_variable(id);
    }
    if (pos_ < s_.size() && s_[pos_] == '(') {
      if (!is_function_name(id)) fail("unknown function '" + id + "'");
      ++pos_;
      ExprPtr arg = sum();
      expect(')');
      return Expr::make_function(id, arg);
    }
    if (is_function_name(id)) fail("function '" + id + "' needs an argument");
    return Expr::make_variable(id);
  }
};

// Printing precedence: 1 sum, 2 product/quotient, 3 negation, 4 power, 5 atom.
int precedence(const Expr& e) {
  switch (e.kind) {
    case ExprKind::sum:
      return 1;
    case ExprKind::product:
    case ExprKind::quotient:
      return 2;
    case ExprKind::negate:
      return 3;
    case ExprKind::power:
      return 4;
    case ExprKind::constant:
      if (e.value.get_den() != 1) return 2;
      return sgn(e.value) < 0 ? 3 : 5;
    default:
      return 5;
  }
}

void print(const Expr& e, std::string& out);

void print_child(const Expr& e, bool parens, std::string& out) {
  if (parens) out += '(';
  print(e, out);
  if (parens) out += ')';
}

void print(const Expr& e, std::string& out) {
  switch (e.kind) {
    case ExprKind::constant:
      out += e.value.get_str();
      break;
    case ExprKind::decimal:
    case ExprKind::variable:
      out += e.text;
      break;
    case ExprKind::negate:
      out += '-';
      print_child(*e.args[0], precedence(*e.args[0]) < 3, out);
      break;
    case ExprKind::sum:
      print_child(*e.args[0], false, out);
      out += " + ";
      print_child(*e.args[1], precedence(*e.args[1]) <= 1, out);
      break;
    case ExprKind::product:
    case ExprKind::quotient:
      print_child(*e.args[0], precedence(*e.args[0]) < 2, out);
      out += e.kind == ExprKind::product ? "*" : "/";
      print_child(*e.args[1], precedence(*e.args[1]) <= 2, out);
      break;
    case ExprKind::power:
      print_child(*e.args[0], precedence(*e.args[0]) <= 4, out);
      out += '^';
      out += std::to_string(e.exponent);
      break;
    case ExprKind::function:
      out += e.text;
      out += '(';
      print(*e.args[0], out);
      out += ')';
      break;
  }
}

void tree(const Expr& e, std::string& out) {
  static const char* names[] = {"", "", "", "negation", "sum", "product", "quotient", "power", ""};
  switch (e.kind) {
    case ExprKind::constant:
      out += e.value.get_str();
      return;
    case ExprKind::decimal:
    case ExprKind::variable:
      out += e.text;
      return;
    case ExprKind::function:
      out += e.text;
      break;
    default:
      out += names[static_cast<int>(e.kind)];
  }
  out += '(';
  for (std::size_t i = 0; i < e.args.size(); ++i) {
    if (i) out += ',';
    tree(*e.args[i], out);
  }
  if (e.kind == ExprKind::power) out += "," + std::to_string(e.exponent);
  out += ')';
}

}  // namespace

ExprPtr parse_expression(std::string_view text) { return Parser(text).parse(); }

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

std::string tree_string(const Expr& e) {
  std::string out;
  tree(e, out);
  return out;
}

void collect_variables(const Expr& e, std::set<std::string>& out) {
  if (e.kind == ExprKind::variable) out.insert(e.text);
  for (const auto& a : e.args) collect_variables(*a, out);
}

bool uses_functions(const Expr& e) {
  if (e.kind == ExprKind::function) return true;
  for (const auto& a : e.args)
    if (uses_functions(*a)) return true;
  return false;
}

bool uses_decimals(const Expr& e) {
  if (e.kind == ExprKind::decimal) return true;
  for (const auto& a : e.args)
    if (uses_decimals(*a)) return true;
  return false;
}

}  // namespace jetgeom

#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "jetgeom/errors.hpp"
#include "jetgeom/expression.hpp"

namespace jetgeom {

std::string kind_name(PairKind k) {
  switch (k) {
    case PairKind::ode:
      return "ode";
    case PairKind::generic:
      return "generic";
    case PairKind::geodesic:
      return "geodesic";
  }
  return "?";
}

std::vector<std::string> equation_variable_names(int k, int m) {
  std::vector<std::string> names{"t"};
  for (int i = 0; i <= k; ++i)
    for (int j = 1; j <= m; ++j) names.push_back("x[" + std::to_string(i) + "," + std::to_string(j) + "]");
  return names;
}

namespace {

struct Token {
  enum Type { ident, string, integer, symbol, end } type;
  std::string text;
  int line, col;
};

class Lexer {
 public:
  explicit Lexer(std::string_view s) : s_(s) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip();
      if (pos_ >= s_.size()) {
        out.push_back({Token::end, "", line_, col_});
        return out;
      }
      const int l = line_, c = col_;
      const char ch = s_[pos_];
      if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
        std::string id;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
          id += advance();
        out.push_back({Token::ident, id, l, c});
      } else if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '-') {
        std::string num(1, advance());
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) num += advance();
        if (num == "-") throw ParseError("expected digits after '-'", l, c);
        out.push_back({Token::integer, num, l, c});
      } else if (ch == '"') {
        advance();
        std::string str;
        for (;;) {
          if (pos_ >= s_.size() || s_[pos_] == '\n') throw ParseError("unterminated string", l, c);
          char x = advance();
          if (x == '"') break;
          if (x == '\\' && pos_ < s_.size()) x = advance();
          str += x;
        }
        out.push_back({Token::string, str, l, c});
      } else if (std::string_view("{}[]=,").find(ch) != std::string_view::npos) {
        out.push_back({Token::symbol, std::string(1, advance()), l, c});
      } else {
        throw ParseError(std::string("unexpected character '") + ch + "'", l, c);
      }
    }
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;

  char advance() {
    char c = s_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip() {
    while (pos_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
        advance();
      } else if (s_[pos_] == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }
};

struct Value {
  enum Type { string, integer, list } type;
  std::string text;
  std::vector<Token> items;  // list of strings
  Token where;
};

// Key with indices, e.g. F[2] -> ("F", {2}).
using Key = std::pair<std::string, std::vector<int>>;

std::string key_string(const Key& k) {
  std::string s = k.first;
  for (int i : k.second) s += "[" + std::to_string(i) + "]";
  return s;
}

class FileParser {
 public:
  explicit FileParser(std::vector<Token> toks) : t_(std::move(toks)) {}

  PairSpec parse() {
    expect_ident("pair");
    PairSpec spec;
    if (peek().type != Token::string) fail("expected quoted pair name");
    spec.name = next().text;
    expect_symbol("{");
    while (!(peek().type == Token::symbol && peek().text == "}")) {
      if (peek().type == Token::end) fail("missing '}'");
      assignment();
    }
    next();
    if (peek().type != Token::end) fail("only one pair block is allowed per file");
    build(spec);
    return spec;
  }

 private:
  std::vector<Token> t_;
  std::size_t i_ = 0;
  std::map<Key, Value> values_;

  const Token& peek() const { return t_[i_]; }
  const Token& next() { return t_[i_++]; }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, peek().line, peek().col); }

  void expect_ident(const std::string& s) {
    if (peek().type != Token::ident || peek().text != s) fail("expected '" + s + "'");
    next();
  }
  void expect_symbol(const std::string& s) {
    if (peek().type != Token::symbol || peek().text != s) fail("expected '" + s + "'");
    next();
  }
  bool accept_symbol(const std::string& s) {
    if (peek().type == Token::symbol && peek().text == s) {
      next();
      return true;
    }
    return false;
  }

  void assignment() {
    if (peek().type != Token::ident) fail("expected a key");
    Token keytok = next();
    Key key{keytok.text, {}};
    while (accept_symbol("[")) {
      if (peek().type != Token::integer) fail("expected integer index");
      key.second.push_back(std::stoi(next().text));
      expect_symbol("]");
    }
    expect_symbol("=");
    Value v{Value::string, "", {}, peek()};
    if (peek().type == Token::string) {
      v.text = next().text;
    } else if (peek().type == Token::integer) {
      v.type = Value::integer;
      v.text = next().text;
    } else if (accept_symbol("[")) {
      v.type = Value::list;
      if (!accept_symbol("]")) {
        for (;;) {
          if (peek().type != Token::string) fail("list entries must be quoted strings");
          v.items.push_back(next());
          if (accept_symbol("]")) break;
          expect_symbol(",");
        }
      }
    } else {
      fail("expected a value");
    }
    if (values_.count(key)) throw ParseError("duplicate key '" + key_string(key) + "'", keytok.line, keytok.col);
    values_.emplace(key, std::move(v));
  }

  // ---- schema ----

  [[noreturn]] static void schema(const Value& v, const std::string& msg) {
    throw SpecError(msg + " (line " + std::to_string(v.where.line) + ")");
  }

  const Value* get(const std::string& name, std::vector<int> idx = {}) const {
    auto it = values_.find({name, idx});
    return it == values_.end() ? nullptr : &it->second;
  }

  int get_int(const std::string& name, bool required, int fallback = 0) const {
    const Value* v = get(name);
    if (!v) {
      if (required) throw SpecError("missing required key '" + name + "'");
      return fallback;
    }
    if (v->type != Value::integer) schema(*v, "'" + name + "' must be an integer");
    int x = std::stoi(v->text);
    if (x < 1) schema(*v, "'" + name + "' must be positive");
    return x;
  }

  static ExprPtr expr_at(const std::string& text, const Token& where) {
    try {
      return parse_expression(text);
    } catch (const ParseError& e) {
      // expression positions are relative to the opening quote
      int line = where.line + e.line() - 1;
      int col = e.line() == 1 ? where.col + e.column() : e.column();
      std::string msg = e.what();
      msg = msg.substr(0, msg.rfind(" at line "));
      throw ParseError("in expression: " + msg, line, col);
    }
  }

  ExprPtr expr_value(const Value& v, const std::string& key) const {
    if (v.type != Value::string) schema(v, "'" + key + "' must be a quoted expression");
    return expr_at(v.text, v.where);
  }

  std::vector<ExprPtr> expr_list(const Value& v, const std::string& key, std::size_t expected) const {
    if (v.type != Value::list) schema(v, "'" + key + "' must be a list of quoted expressions");
    if (v.items.size() != expected)
      schema(v, "'" + key + "' needs " + std::to_string(expected) + " entries, got " + std::to_string(v.items.size()));
    std::vector<ExprPtr> out;
    for (const auto& it : v.items) out.push_back(expr_at(it.text, it));
    return out;
  }

  void build(PairSpec& spec) const {
    if (const Value* kind = get("kind")) {
      if (kind->type != Value::string) schema(*kind, "'kind' must be a string");
      if (kind->text == "ode")
        spec.kind = PairKind::ode;
      else if (kind->text == "generic")
        spec.kind = PairKind::generic;
      else if (kind->text == "geodesic")
        spec.kind = PairKind::geodesic;
      else
        schema(*kind, "unknown kind '" + kind->text + "'");
    } else {
      throw SpecError("missing required key 'kind'");
    }
    if (const Value* mode = get("mode")) {
      if (mode->type != Value::string || (mode->text != "rational" && mode->text != "float"))
        schema(*mode, "'mode' must be \"rational\" or \"float\"");
      spec.mode = mode->text == "float" ? ScalarMode::floating : ScalarMode::rational;
    }

    std::set<std::string> allowed{"kind", "mode"};
    auto check_keys = [&](const std::set<std::string>& extra) {
      for (const auto& [key, v] : values_) {
        if (allowed.count(key.first) || extra.count(key.first)) continue;
        schema(v, "key '" + key_string(key) + "' is not valid for kind " + kind_name(spec.kind));
      }
    };

    if (spec.kind == PairKind::ode) {
      check_keys({"k", "m", "F"});
      spec.k = get_int("k", true);
      spec.m = get_int("m", true);
      spec.F.assign(spec.m, Expr::make_constant(0));
      for (const auto& [key, v] : values_) {
        if (key.first != "F") continue;
        if (key.second.size() != 1 || key.second[0] < 1 || key.second[0] > spec.m)
          schema(v, "'" + key_string(key) + "' is out of range for m = " + std::to_string(spec.m));
        spec.F[key.second[0] - 1] = expr_value(v, key_string(key));
      }
      validate_equation_vars(spec, spec.F);
    } else if (spec.kind == PairKind::geodesic) {
      check_keys({"k", "m", "Gamma"});
      spec.k = 1;
      if (const Value* kv = get("k"); kv && kv->text != "1") schema(*kv, "geodesic pairs have k = 1");
      spec.m = get_int("m", true);
      const int m = spec.m;
      spec.gamma.assign(static_cast<std::size_t>(m) * m * m, Expr::make_constant(0));
      for (const auto& [key, v] : values_) {
        if (key.first != "Gamma") continue;
        bool ok = key.second.size() == 3;
        for (int x : key.second) ok = ok && x >= 1 && x <= m;
        if (!ok) schema(v, "'" + key_string(key) + "' is out of range for m = " + std::to_string(m));
        spec.gamma[((key.second[0] - 1) * m + key.second[1] - 1) * m + key.second[2] - 1] =
            expr_value(v, key_string(key));
      }
      validate_equation_vars(spec, spec.gamma);
    } else {
      check_keys({"k", "m", "dim", "vars", "X", "V"});
      spec.m = get_int("m", true);
      spec.dim = get_int("dim", true);
      const Value* vars = get("vars");
      if (!vars) throw SpecError("missing required key 'vars'");
      if (vars->type != Value::list) schema(*vars, "'vars' must be a list of names");
      if (vars->items.size() != static_cast<std::size_t>(spec.dim))
        schema(*vars, "'vars' must list dim = " + std::to_string(spec.dim) + " names");
      std::set<std::string> seen;
      for (const auto& it : vars->items) {
        ExprPtr probe;
        try {
          probe = parse_expression(it.text);
        } catch (const ParseError&) {
        }
        if (!probe || probe->kind != ExprKind::variable) schema(*vars, "invalid variable name '" + it.text + "'");
        if (!seen.insert(probe->text).second) schema(*vars, "duplicate variable '" + it.text + "'");
        spec.vars.push_back(probe->text);
      }
      // dim = 1 + (k+1) m for the underlying equation manifold
      if ((spec.dim - 1) % spec.m != 0 || (spec.dim - 1) / spec.m < 2)
        throw SpecError("generic pair needs dim = 1 + (k+1)m with k >= 1");
      const int derived_k = (spec.dim - 1) / spec.m - 1;
      spec.k = get_int("k", false, derived_k);
      if (spec.k != derived_k) throw SpecError("k is inconsistent with dim and m");
      const Value* X = get("X");
      if (!X) throw SpecError("missing required key 'X'");
      spec.X = expr_list(*X, "X", spec.dim);
      spec.V.assign(spec.m, {});
      for (const auto& [key, v] : values_) {
        if (key.first != "V") continue;
        if (key.second.size() != 1 || key.second[0] < 1 || key.second[0] > spec.m)
          schema(v, "'" + key_string(key) + "' is out of range for m = " + std::to_string(spec.m));
        spec.V[key.second[0] - 1] = expr_list(v, key_string(key), spec.dim);
      }
      for (int j = 0; j < spec.m; ++j)
        if (spec.V[j].empty()) throw SpecError("missing V[" + std::to_string(j + 1) + "]");
      std::set<std::string> used;
      for (const auto& e : spec.X) collect_variables(*e, used);
      for (const auto& col : spec.V)
        for (const auto& e : col) collect_variables(*e, used);
      for (const auto& u : used)
        if (!seen.count(u)) throw SpecError("expression references undeclared variable '" + u + "'");
    }
    check_mode(spec);
  }

  static void validate_equation_vars(const PairSpec& spec, const std::vector<ExprPtr>& exprs) {
    auto names = equation_variable_names(spec.k, spec.m);
    std::set<std::string> known(names.begin(), names.end());
    std::set<std::string> used;
    for (const auto& e : exprs) collect_variables(*e, used);
    for (const auto& u : used) {
      if (known.count(u)) continue;
      int i = 0, j = 0;
      if (std::sscanf(u.c_str(), "x[%d,%d]", &i, &j) == 2) {
        if (i > spec.k)
          throw SpecError("variable '" + u + "': derivative index exceeds k = " + std::to_string(spec.k));
        throw SpecError("variable '" + u + "': component index out of range 1.." + std::to_string(spec.m));
      }
      throw SpecError("unknown variable '" + u + "'");
    }
  }

  static void check_mode(const PairSpec& spec) {
    if (spec.mode == ScalarMode::floating) return;
    auto check = [](const ExprPtr& e) {
      if (uses_decimals(*e))
        throw SpecError("decimal literal in rational mode: '" + to_string(*e) + "' (set mode = \"float\")");
      if (uses_functions(*e))
        throw SpecError("transcendental function in rational mode: '" + to_string(*e) + "' (set mode = \"float\")");
    };
    for (const auto& e : spec.F) check(e);
    for (const auto& e : spec.gamma) check(e);
    for (const auto& e : spec.X) check(e);
    for (const auto& c : spec.V)
      for (const auto& e : c) check(e);
  }
};

}  // namespace

PairSpec parse_problem_file(std::string_view text) {
  Lexer lex(text);
  return FileParser(lex.run()).parse();
}

PairSpec load_problem_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpecError("cannot open problem file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_problem_file(ss.str());
}

PairSpec make_ode_spec(int k, int m, const std::vector<std::string>& F, ScalarMode mode, std::string name) {
  if (k < 1 || m < 1 || F.size() != static_cast<std::size_t>(m)) throw SpecError("make_ode_spec: bad dimensions");
  std::ostringstream src;
  src << "pair \"" << name << "\" {\n  kind = \"ode\"\n  mode = \"" << mode_name(mode) << "\"\n  k = " << k
      << "  m = " << m << "\n";
  for (int j = 0; j < m; ++j) src << "  F[" << j + 1 << "] = \"" << F[j] << "\"\n";
  src << "}\n";
  return parse_problem_file(src.str());
}

}  // namespace jetgeom

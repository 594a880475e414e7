#include "mathdsl/parser.hpp"

#include "mathdsl/binding.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <functional>

#include <fmt/format.h>

namespace mathdsl {

namespace {

enum class Tok { Ident, Number, Sym, End };

struct Token {
  Tok kind;
  std::string text;
  SourceSpan span;
};

constexpr std::array<std::string_view, 19> kKeywords = {
    "forall", "exists", "true", "false", "in",   "dom",  "haslimit", "lagrange", "D",   "lim",
    "const",  "expand", "proj", "sin",   "cos",  "exp",  "ln",       "sqrt",     "abs"};

// Common function names that are not primitives of the language.
constexpr std::array<std::string_view, 16> kUnknownPrimitives = {
    "tan",   "cot",    "sec",    "csc",  "log",  "log10", "sinh", "cosh",
    "tanh",  "arcsin", "arccos", "arctan", "asin", "acos",  "atan", "pow"};

bool is_keyword(std::string_view s) {
  return std::find(kKeywords.begin(), kKeywords.end(), s) != kKeywords.end();
}

bool is_unknown_primitive(std::string_view s) {
  return std::find(kUnknownPrimitives.begin(), kUnknownPrimitives.end(), s) !=
         kUnknownPrimitives.end();
}

// Unicode aliases mapped onto their ASCII spelling.
struct Alias {
  std::string_view utf8;
  std::string_view ascii;
  Tok kind;
};

constexpr std::array<Alias, 14> kAliases = {{
    {"\xCE\xBB", "\\", Tok::Sym},          // λ
    {"\xE2\x88\x80", "forall", Tok::Ident},  // ∀
    {"\xE2\x88\x83", "exists", Tok::Ident},  // ∃
    {"\xE2\x87\x92", "=>", Tok::Sym},      // ⇒
    {"\xE2\x86\x92", "->", Tok::Sym},      // →
    {"\xE2\x88\x98", ".", Tok::Sym},       // ∘
    {"\xE2\x89\xA4", "<=", Tok::Sym},      // ≤
    {"\xE2\x89\xA5", ">=", Tok::Sym},      // ≥
    {"\xE2\x89\xA0", "/=", Tok::Sym},      // ≠
    {"\xE2\x88\x88", "in", Tok::Ident},    // ∈
    {"\xE2\x88\xA7", "&&", Tok::Sym},      // ∧
    {"\xC2\xAC", "!", Tok::Sym},           // ¬
    {"\xE2\x84\x9D", "R", Tok::Ident},     // ℝ
    {"\xC2\xB7", "*", Tok::Sym},           // ·
}};

constexpr std::array<std::string_view, 10> kTwoCharSymbols = {"->", "=>", "==", "<=", ">=",
                                                              "/=", "!=", "&&", "::", "\\"};

class Lexer {
 public:
  Lexer(std::string_view text, std::size_t base_offset, std::uint32_t base_line)
      : text_(text), offset_(base_offset), line_(base_line) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      if (pos_ >= text_.size()) break;
      out.push_back(next());
    }
    SourceSpan end = here();
    end.end = end.start;
    out.push_back({Tok::End, "", end});
    return out;
  }

 private:
  SourceSpan here() const {
    return {offset_ + pos_, offset_ + pos_, line_, column_, line_, column_};
  }

  void bump(std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      if (text_[pos_] == '\n') {
        ++line_;
        column_ = 1;
      } else {
        ++column_;
      }
      ++pos_;
    }
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        bump(1);
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') bump(1);
      } else {
        break;
      }
    }
  }

  Token finish(Tok kind, std::string text, SourceSpan start, std::size_t length) {
    bump(length);
    start.end = offset_ + pos_;
    start.end_line = line_;
    start.end_column = column_;
    return {kind, std::move(text), start};
  }

  Token next() {
    const SourceSpan start = here();
    const char c = text_[pos_];
    const std::string_view rest = text_.substr(pos_);

    for (const auto& a : kAliases) {
      if (rest.substr(0, a.utf8.size()) == a.utf8) {
        return finish(a.kind, std::string(a.ascii), start, a.utf8.size());
      }
    }
    if (std::isdigit(static_cast<unsigned char>(c))) return number(start);
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t n = 0;
      while (n < rest.size() &&
             (std::isalnum(static_cast<unsigned char>(rest[n])) || rest[n] == '_')) {
        ++n;
      }
      while (n < rest.size() && rest[n] == '\'') ++n;
      return finish(Tok::Ident, std::string(rest.substr(0, n)), start, n);
    }
    for (auto sym : kTwoCharSymbols) {
      if (rest.substr(0, sym.size()) == sym) {
        std::string text(sym);
        if (text == "!=") text = "/=";
        return finish(Tok::Sym, text, start, sym.size());
      }
    }
    static constexpr std::string_view kSingles = "()[],.+-*/^<>=!:{}";
    if (kSingles.find(c) != std::string_view::npos) {
      return finish(Tok::Sym, std::string(1, c), start, 1);
    }
    SourceSpan bad = start;
    bad.end = bad.start + 1;
    bad.end_column = bad.column + 1;
    fail(DiagKind::SyntaxError, fmt::format("unexpected character `{}`", rest.substr(0, 1)), bad);
  }

  Token number(SourceSpan start) {
    const std::string_view rest = text_.substr(pos_);
    std::size_t n = 0;
    auto digits = [&] {
      while (n < rest.size() && std::isdigit(static_cast<unsigned char>(rest[n]))) ++n;
    };
    digits();
    if (n + 1 < rest.size() && rest[n] == '.' &&
        std::isdigit(static_cast<unsigned char>(rest[n + 1]))) {
      ++n;
      digits();
    }
    if (n < rest.size() && (rest[n] == 'e' || rest[n] == 'E')) {
      std::size_t m = n + 1;
      if (m < rest.size() && (rest[m] == '+' || rest[m] == '-')) ++m;
      if (m < rest.size() && std::isdigit(static_cast<unsigned char>(rest[m]))) {
        n = m;
        digits();
      }
    }
    return finish(Tok::Number, std::string(rest.substr(0, n)), start, n);
  }

  std::string_view text_;
  std::size_t offset_;
  std::size_t pos_ = 0;
  std::uint32_t line_;
  std::uint32_t column_ = 1;
};

std::vector<Token> lex(std::string_view text, std::size_t offset = 0, std::uint32_t line = 1) {
  return Lexer(text, offset, line).run();
}

// Replaces free occurrences of `name` by `make(span-of-occurrence)`. The
// replacement must not mention any name bound inside `e`.
Expr replace_free(const Expr& e, const std::string& name,
                  const std::function<Expr(const SourceSpan&)>& make) {
  if (const auto* v = e.as<expr::Var>()) return v->name == name ? make(e.span()) : e;
  if (const auto* l = e.as<expr::Lam>()) {
    if (l->param == name) return e;
  }
  auto kids = children(e);
  if (kids.empty()) return e;
  for (auto& k : kids) k = replace_free(k, name, make);
  return with_children(e, std::move(kids));
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  // ---- expressions -------------------------------------------------------

  Expr expr() {
    if (at_sym("\\")) return lambda();
    return additive();
  }

  // ---- formulas ----------------------------------------------------------

  Formula formula() {
    if (at_word("forall") || at_word("exists")) return quantified();
    return implication();
  }

  // ---- types -------------------------------------------------------------

  Ty type() {
    Ty lhs = type_atom();
    if (accept_sym("->")) return Ty::arrow(lhs, type());
    return lhs;
  }

  void expect_end() {
    if (peek().kind != Tok::End) error_at(peek(), fmt::format("unexpected `{}`", peek().text));
  }

  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  std::size_t position() const { return pos_; }
  void advance() {
    if (pos_ + 1 < toks_.size()) ++pos_;
  }

  std::string identifier() {
    const Token& t = peek();
    if (t.kind != Tok::Ident || is_reserved(t.text)) error_at(t, "expected an identifier");
    advance();
    return t.text;
  }

  bool accept_sym(std::string_view s) {
    if (at_sym(s)) {
      advance();
      return true;
    }
    return false;
  }

 private:
  // ---- token helpers -----------------------------------------------------

  bool at_sym(std::string_view s) const { return peek().kind == Tok::Sym && peek().text == s; }
  bool at_word(std::string_view s) const {
    return peek().kind == Tok::Ident && peek().text == s;
  }

  void expect_sym(std::string_view s) {
    if (!accept_sym(s)) {
      error_at(peek(), fmt::format("expected `{}`, found {}", s, describe(peek())));
    }
  }

  void expect_word(std::string_view s) {
    if (!at_word(s)) error_at(peek(), fmt::format("expected `{}`, found {}", s, describe(peek())));
    advance();
  }

  static std::string describe(const Token& t) {
    if (t.kind == Tok::End) return "end of input";
    return fmt::format("`{}`", t.text);
  }

  [[noreturn]] void error_at(const Token& t, std::string message) const {
    fail(DiagKind::SyntaxError, std::move(message), t.span);
  }

  SourceSpan span_from(std::size_t start) const {
    const std::size_t last = pos_ > start ? pos_ - 1 : start;
    return SourceSpan::merge(toks_[start].span, toks_[last].span);
  }

  std::size_t index_literal() {
    const Token& t = peek();
    if (t.kind == Tok::Number) {
      auto value = parse_decimal(t.text);
      if (value && is_integer(*value) && *value >= 1 && *value <= 1000000) {
        advance();
        return static_cast<std::size_t>(boost::multiprecision::numerator(*value));
      }
    }
    error_at(t, "expected a positive integer index");
  }

  // ---- expressions -------------------------------------------------------

  Expr lambda() {
    const std::size_t start = pos_;
    expect_sym("\\");
    std::vector<std::string> names;
    std::optional<Ty> annotation;
    bool pattern = false;
    if (accept_sym("(")) {
      names.push_back(identifier());
      if (accept_sym(":")) {
        annotation = type();
      } else if (at_sym(",")) {
        pattern = true;
        while (accept_sym(",")) names.push_back(identifier());
      }
      expect_sym(")");
    } else {
      names.push_back(identifier());
      while (peek().kind == Tok::Ident && !is_reserved(peek().text)) names.push_back(identifier());
      pattern = names.size() > 1;
    }
    expect_sym("->");
    Expr body = expr();
    const SourceSpan span = span_from(start);
    if (!pattern) return Expr::lam(names.front(), body, annotation, {}, span);

    NameSet seen;
    for (const auto& n : names) {
      if (!seen.insert(n).second) {
        fail(DiagKind::SyntaxError, fmt::format("duplicate parameter `{}`", n), span);
      }
    }
    NameSet avoid = all_names(body);
    avoid.insert(names.begin(), names.end());
    const std::string param = fresh_name("s", avoid);
    for (std::size_t i = 0; i < names.size(); ++i) {
      body = replace_free(body, names[i], [&](const SourceSpan& at) {
        return Expr::proj(i + 1, Expr::var(param, at), at);
      });
    }
    return Expr::lam(param, body, std::nullopt, names, span);
  }

  Expr additive() {
    const std::size_t start = pos_;
    Expr lhs = multiplicative();
    while (at_sym("+") || at_sym("-")) {
      const BinaryOp op = peek().text == "+" ? BinaryOp::Add : BinaryOp::Sub;
      advance();
      Expr rhs = multiplicative();
      lhs = Expr::binop(op, lhs, rhs, span_from(start));
    }
    return lhs;
  }

  Expr multiplicative() {
    const std::size_t start = pos_;
    Expr lhs = unary();
    while (at_sym("*") || at_sym("/")) {
      const BinaryOp op = peek().text == "*" ? BinaryOp::Mul : BinaryOp::Div;
      advance();
      Expr rhs = unary();
      lhs = Expr::binop(op, lhs, rhs, span_from(start));
    }
    return lhs;
  }

  Expr unary() {
    const std::size_t start = pos_;
    if (accept_sym("-")) {
      Expr operand = unary();
      return Expr::neg(operand, span_from(start));
    }
    if (at_sym("\\")) return lambda();
    return power();
  }

  Expr power() {
    const std::size_t start = pos_;
    Expr base = composition();
    if (accept_sym("^")) {
      Expr exponent = unary();
      return Expr::binop(BinaryOp::Pow, base, exponent, span_from(start));
    }
    return base;
  }

  Expr composition() {
    const std::size_t start = pos_;
    Expr outer = application();
    if (!no_compose_ && accept_sym(".")) {
      Expr inner = composition();
      return Expr::compose(outer, inner, span_from(start));
    }
    return outer;
  }

  bool starts_atom() const {
    const Token& t = peek();
    if (t.kind == Tok::Number) return true;
    if (t.kind == Tok::Sym) return t.text == "(";
    if (t.kind != Tok::Ident) return false;
    if (!is_reserved(t.text)) return true;
    static constexpr std::array<std::string_view, 11> kAtomWords = {
        "D", "lim", "const", "expand", "proj", "sin", "cos", "exp", "ln", "sqrt", "abs"};
    return std::find(kAtomWords.begin(), kAtomWords.end(), t.text) != kAtomWords.end() ||
           is_unknown_primitive(t.text);
  }

  Expr application() {
    const std::size_t start = pos_;
    Expr fun = atom();
    while (starts_atom()) {
      Expr arg = atom();
      fun = Expr::app(fun, arg, span_from(start));
    }
    return fun;
  }

  // Parses `( expr )` with compose re-enabled inside the parentheses.
  Expr parenthesized_expr() {
    const bool saved = no_compose_;
    no_compose_ = false;
    expect_sym("(");
    Expr e = expr();
    expect_sym(")");
    no_compose_ = saved;
    return e;
  }

  Expr atom() {
    const std::size_t start = pos_;
    const Token& t = peek();
    if (t.kind == Tok::Number) {
      auto value = parse_decimal(t.text);
      if (!value) error_at(t, fmt::format("malformed number `{}`", t.text));
      advance();
      return Expr::lit(*value, t.span);
    }
    if (at_sym("(")) {
      const bool saved = no_compose_;
      no_compose_ = false;
      advance();
      if (at_sym(")")) error_at(peek(), "tuple arity must be at least 2");
      std::vector<Expr> items{expr()};
      while (accept_sym(",")) items.push_back(expr());
      expect_sym(")");
      no_compose_ = saved;
      if (items.size() == 1) return items.front();
      return Expr::tuple(std::move(items), span_from(start));
    }
    if (t.kind != Tok::Ident) error_at(t, fmt::format("expected an expression, found {}", describe(t)));

    const std::string word = t.text;
    if (is_unknown_primitive(word)) {
      error_at(t, fmt::format("unknown primitive `{}`; available: sin, cos, exp, ln, sqrt, abs",
                              word));
    }
    if (!is_reserved(word)) {
      advance();
      return Expr::var(word, t.span);
    }
    advance();
    if (word == "D") {
      if (accept_sym("[")) {
        const std::size_t index = index_literal();
        expect_sym("]");
        Expr fun = parenthesized_expr();
        return Expr::partial_d(index, fun, span_from(start));
      }
      Expr fun = parenthesized_expr();
      return Expr::total_d(fun, span_from(start));
    }
    if (word == "proj") {
      expect_sym("[");
      const std::size_t index = index_literal();
      expect_sym("]");
      Expr tuple = parenthesized_expr();
      return Expr::proj(index, tuple, span_from(start));
    }
    if (word == "lim") {
      const bool saved = no_compose_;
      no_compose_ = false;
      expect_sym("(");
      Expr point = expr();
      expect_sym(",");
      Expr fun = expr();
      expect_sym(")");
      no_compose_ = saved;
      return Expr::lim(point, fun, span_from(start));
    }
    if (word == "const") {
      Expr value = parenthesized_expr();
      return Expr::const_fun(value, span_from(start));
    }
    if (word == "expand") {
      Expr path = parenthesized_expr();
      return mk_expand(path, span_from(start));
    }
    if (auto fn = primitive_from_name(word)) {
      if (starts_atom()) {
        Expr arg = atom();
        return Expr::prim(*fn, arg, span_from(start));
      }
      // A bare primitive denotes the function itself.
      return Expr::lam("x", Expr::prim(*fn, Expr::var("x", t.span), t.span), std::nullopt, {},
                       t.span);
    }
    error_at(t, fmt::format("unexpected keyword `{}`", word));
  }

  // ---- formulas ----------------------------------------------------------

  std::optional<CmpOp> cmp_op() const {
    if (peek().kind != Tok::Sym) return std::nullopt;
    const auto& s = peek().text;
    if (s == "<") return CmpOp::Lt;
    if (s == "<=") return CmpOp::Le;
    if (s == ">") return CmpOp::Gt;
    if (s == ">=") return CmpOp::Ge;
    if (s == "=") return CmpOp::Eq;
    if (s == "/=") return CmpOp::Ne;
    return std::nullopt;
  }

  Formula quantified() {
    const std::size_t start = pos_;
    const Quantifier q = peek().text == "forall" ? Quantifier::Forall : Quantifier::Exists;
    advance();
    const std::string name = identifier();
    std::optional<BinderBound> bound;
    if (auto op = cmp_op()) {
      advance();
      const bool saved = no_compose_;
      no_compose_ = true;
      Expr value = additive();
      no_compose_ = saved;
      bound = BinderBound{*op, value};
    }
    expect_sym(".");
    Formula body = formula();
    return Formula::quant(q, name, bound, body, span_from(start));
  }

  Formula implication() {
    const std::size_t start = pos_;
    Formula premise = conjunction();
    if (accept_sym("=>")) {
      Formula conclusion = formula();
      return Formula::implies(premise, conclusion, span_from(start));
    }
    return premise;
  }

  Formula conjunction() {
    const std::size_t start = pos_;
    Formula lhs = negation();
    while (accept_sym("&&")) {
      Formula rhs = negation();
      lhs = Formula::conj(lhs, rhs, span_from(start));
    }
    return lhs;
  }

  Formula negation() {
    const std::size_t start = pos_;
    if (accept_sym("!")) {
      Formula operand = negation();
      return Formula::negation(operand, span_from(start));
    }
    return formula_atom();
  }

  Formula formula_atom() {
    const std::size_t start = pos_;
    if (at_word("true") || at_word("false")) {
      const bool value = peek().text == "true";
      advance();
      return Formula::truth(value, span_from(start));
    }
    if (at_word("haslimit")) {
      advance();
      expect_sym("(");
      Expr fun = expr();
      expect_sym(",");
      Expr point = expr();
      expect_sym(",");
      Expr limit = expr();
      expect_sym(")");
      return Formula::has_limit(fun, point, limit, span_from(start));
    }
    if (at_word("lagrange")) {
      advance();
      expect_sym("(");
      Expr lagrangian = expr();
      expect_sym(",");
      Expr path = expr();
      expect_sym(")");
      return Formula::lagrange_eq(lagrangian, path, span_from(start));
    }
    if (at_sym("(")) {
      // Either a comparison whose left operand is parenthesized, or a
      // parenthesized formula.
      try {
        return comparison();
      } catch (const DiagnosticError& first) {
        const std::size_t failed_at = first.diagnostic().span.start;
        pos_ = start;
        try {
          expect_sym("(");
          Formula inner = formula();
          expect_sym(")");
          return inner;
        } catch (const DiagnosticError& second) {
          if (second.diagnostic().span.start >= failed_at) throw;
          throw first;
        }
      }
    }
    return comparison();
  }

  Formula comparison() {
    const std::size_t start = pos_;
    Expr lhs = expr();
    if (at_word("in")) {
      advance();
      expect_word("dom");
      Expr fun = parenthesized_expr();
      return Formula::in_dom(lhs, fun, span_from(start));
    }
    if (accept_sym("==")) {
      Expr rhs = expr();
      return Formula::fun_eq(lhs, rhs, span_from(start));
    }
    auto op = cmp_op();
    if (!op) {
      error_at(peek(), fmt::format("expected a comparison, `==` or `in dom(...)`, found {}",
                                   describe(peek())));
    }
    advance();
    Expr mid = expr();
    auto op2 = cmp_op();
    if (!op2) return Formula::cmp(*op, lhs, mid, span_from(start));

    const Token& second = peek();
    std::vector<CmpOp> ops{*op};
    std::vector<Expr> operands{lhs, mid};
    while (auto next = cmp_op()) {
      advance();
      ops.push_back(*next);
      operands.push_back(expr());
    }
    const SourceSpan span = span_from(start);
    auto link = [&](std::size_t i) {
      return Formula::cmp(ops[i], operands[i], operands[i + 1],
                          SourceSpan::merge(operands[i].span(), operands[i + 1].span()));
    };
    Formula chain = link(0);
    for (std::size_t i = 1; i < ops.size(); ++i) chain = Formula::conj(chain, link(i), span);
    if (ops.size() == 2 && ops[0] == CmpOp::Lt && ops[1] == CmpOp::Lt) return chain;
    Diagnostic d = make_diagnostic(
        Severity::Error, DiagKind::SyntaxError,
        "chained comparison is ambiguous; only `a < b < c` is expanded, write the conjunction "
        "explicitly (`a < b && b < c`)",
        second.span);
    d.suggestion = chain;
    throw DiagnosticError(std::move(d));
  }

  // ---- types -------------------------------------------------------------

  Ty type_atom() {
    const Token& t = peek();
    if (t.kind == Tok::Ident && t.text == "R") {
      advance();
      if (accept_sym("{")) {
        std::string label = identifier();
        expect_sym("}");
        return Ty::real(label);
      }
      return Ty::real();
    }
    if (t.kind == Tok::Ident && (t.text == "T" || t.text == "Q" || t.text == "V")) {
      advance();
      return Ty::real(t.text);
    }
    if (accept_sym("(")) {
      std::vector<Ty> items{type()};
      while (accept_sym(",")) items.push_back(type());
      expect_sym(")");
      if (items.size() == 1) return items.front();
      return Ty::prod(std::move(items));
    }
    error_at(t, fmt::format("expected a type, found {}", describe(t)));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  bool no_compose_ = false;
};

}  // namespace

bool is_reserved(std::string_view name) {
  return is_keyword(name) || is_unknown_primitive(name);
}

bool is_identifier(std::string_view name) {
  if (name.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_')) return false;
  std::size_t i = 1;
  while (i < name.size() &&
         (std::isalnum(static_cast<unsigned char>(name[i])) || name[i] == '_')) {
    ++i;
  }
  while (i < name.size() && name[i] == '\'') ++i;
  return i == name.size();
}

Expr parse_expr(std::string_view text) {
  Parser p(lex(text));
  Expr e = p.expr();
  p.expect_end();
  return e;
}

Formula parse_formula(std::string_view text) {
  Parser p(lex(text));
  Formula f = p.formula();
  p.expect_end();
  return f;
}

Term parse_term(std::string_view text) {
  auto tokens = lex(text);
  try {
    Parser p(tokens);
    Expr e = p.expr();
    p.expect_end();
    return e;
  } catch (const DiagnosticError& as_expr) {
    try {
      Parser p(tokens);
      Formula f = p.formula();
      p.expect_end();
      return f;
    } catch (const DiagnosticError& as_formula) {
      if (as_formula.diagnostic().span.start >= as_expr.diagnostic().span.start) throw;
      throw as_expr;
    }
  }
}

Ty parse_type(std::string_view text) {
  Parser p(lex(text));
  Ty t = p.type();
  p.expect_end();
  return t;
}

std::pair<std::string, Ty> parse_declaration(std::string_view text) {
  Parser p(lex(text));
  std::string name = p.identifier();
  if (!p.accept_sym(":")) {
    fail(DiagKind::SyntaxError, "expected `name : type`", p.peek().span);
  }
  Ty t = p.type();
  p.expect_end();
  return {name, t};
}

std::vector<Binding> parse_bindings(std::string_view text) {
  std::vector<Binding> out;
  std::size_t offset = 0;
  std::uint32_t line = 1;
  while (offset <= text.size()) {
    std::size_t eol = text.find('\n', offset);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view content = text.substr(offset, eol - offset);
    auto tokens = lex(content, offset, line);
    if (tokens.front().kind != Tok::End) {
      Parser p(tokens);
      const std::size_t first = p.position();
      std::string name = p.identifier();
      Term value = [&]() -> Term {
        if (p.accept_sym("::")) return p.formula();
        if (p.accept_sym("=")) return p.expr();
        fail(DiagKind::SyntaxError, "expected `name = expr` or `name :: formula`",
             p.peek().span);
      }();
      p.expect_end();
      SourceSpan span = SourceSpan::merge(tokens[first].span, tokens[tokens.size() - 2].span);
      out.push_back({std::move(name), std::move(value), span});
    }
    if (eol == text.size()) break;
    offset = eol + 1;
    ++line;
  }
  return out;
}

std::string_view grammar_text() {
  return R"EBNF(# mathdsl surface syntax (EBNF)
# Unicode aliases accepted on input: λ=\  ∀=forall  ∃=exists  ⇒==>  →=->
#   ∘=.  ≤=<=  ≥=>=  ≠=/=  ∈=in  ∧=&&  ¬=!  ℝ=R  ·=*

file        = { line } ;
line        = [ ident "=" expr | ident "::" formula ] [ "#" comment ] NEWLINE ;

formula     = quantified | implication ;
quantified  = ( "forall" | "exists" ) ident [ cmpop additive ] "." formula ;
implication = conjunction [ "=>" formula ] ;                 (* right-assoc *)
conjunction = negation { "&&" negation } ;                   (* left-assoc *)
negation    = "!" negation | fatom ;
fatom       = "true" | "false"
            | "haslimit" "(" expr "," expr "," expr ")"      (* f, point, limit *)
            | "lagrange" "(" expr "," expr ")"               (* lagrangian, path *)
            | "(" formula ")"
            | comparison ;
comparison  = expr "in" "dom" "(" expr ")"
            | expr "==" expr                                 (* function equality *)
            | expr cmpop expr [ "<" expr ] ;                 (* only a < b < c chains *)
cmpop       = "<" | "<=" | ">" | ">=" | "=" | "/=" | "!=" ;

expr        = lambda | additive ;
lambda      = "\" params "->" expr ;
params      = ident                                          (* one argument *)
            | "(" ident ":" type ")"                         (* annotated *)
            | "(" ident "," ident { "," ident } ")"          (* tuple argument *)
            | ident ident { ident } ;                        (* sugar for a tuple argument *)
additive    = multiplicative { ( "+" | "-" ) multiplicative } ;
multiplicative = unary { ( "*" | "/" ) unary } ;
unary       = "-" unary | lambda | power ;
power       = composition [ "^" unary ] ;                    (* right-assoc *)
composition = application [ "." composition ] ;              (* right-assoc *)
application = atom { atom } ;                                (* left-assoc *)
atom        = number | ident | "(" expr ")" | "(" expr "," expr { "," expr } ")"
            | "D" "(" expr ")"                               (* derivative *)
            | "D" "[" index "]" "(" expr ")"                 (* partial derivative *)
            | "lim" "(" expr "," expr ")"                    (* point, function *)
            | "const" "(" expr ")"
            | "expand" "(" expr ")"                          (* \t -> (t, w t, D(w) t) *)
            | "proj" "[" index "]" "(" expr ")"
            | prim [ atom ] ;                                (* bare prim = the function *)
prim        = "sin" | "cos" | "exp" | "ln" | "sqrt" | "abs" ;
number      = digit { digit } [ "." digit { digit } ] [ ( "e" | "E" ) [ "+" | "-" ] digit { digit } ] ;
index       = digit { digit } ;                              (* >= 1 *)
ident       = ( letter | "_" ) { letter | digit | "_" } { "'" } ;

type        = tatom [ "->" type ] ;                          (* right-assoc *)
tatom       = "R" [ "{" ident "}" ] | "T" | "Q" | "V" | "(" type { "," type } ")" ;
)EBNF";
}

}  // namespace mathdsl

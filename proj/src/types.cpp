#include "mathdsl/types.hpp"

#include "mathdsl/binding.hpp"
#include "mathdsl/parser.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include <fmt/format.h>

namespace mathdsl {

std::string_view to_string(StateRole role) {
  switch (role) {
    case StateRole::Time: return "time";
    case StateRole::Coordinate: return "coordinate";
    case StateRole::Velocity: return "velocity";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// State signatures

StateSignature::StateSignature(std::vector<StateEntry> entries) : entries_(std::move(entries)) {
  std::size_t times = 0, coords = 0, vels = 0;
  NameSet seen;
  for (const auto& e : entries_) {
    if (!seen.insert(e.name).second) {
      fail(DiagKind::SyntaxError, fmt::format("state signature repeats `{}`", e.name));
    }
    switch (e.role) {
      case StateRole::Time: ++times; break;
      case StateRole::Coordinate: ++coords; break;
      case StateRole::Velocity: ++vels; break;
    }
  }
  if (times != 1) fail(DiagKind::SyntaxError, "state signature needs exactly one time entry");
  if (coords == 0 || coords != vels) {
    fail(DiagKind::SyntaxError,
         "state signature needs as many velocities as coordinates (at least one)");
  }
}

StateSignature StateSignature::parse(std::string_view text) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    std::string part(text.substr(pos, comma - pos));
    part.erase(0, part.find_first_not_of(" \t"));
    part.erase(part.find_last_not_of(" \t") + 1);
    parts.push_back(part);
    pos = comma + 1;
  }
  const bool explicit_roles =
      std::any_of(parts.begin(), parts.end(), [](const auto& p) { return p.find(':') != std::string::npos; });
  std::vector<StateEntry> entries;
  if (explicit_roles) {
    for (const auto& p : parts) {
      const auto colon = p.find(':');
      if (colon == std::string::npos) {
        fail(DiagKind::SyntaxError, fmt::format("state entry `{}` lacks a role", p));
      }
      std::string name = p.substr(0, colon);
      std::string role = p.substr(colon + 1);
      StateRole r;
      if (role == "time") r = StateRole::Time;
      else if (role == "coordinate") r = StateRole::Coordinate;
      else if (role == "velocity") r = StateRole::Velocity;
      else fail(DiagKind::SyntaxError, fmt::format("unknown state role `{}`", role));
      entries.push_back({name, r});
    }
  } else {
    if (parts.size() < 3 || parts.size() % 2 == 0) {
      fail(DiagKind::SyntaxError,
           "state signature must list time, then n coordinates, then n velocities");
    }
    const std::size_t n = (parts.size() - 1) / 2;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const StateRole r = i == 0 ? StateRole::Time
                                 : (i <= n ? StateRole::Coordinate : StateRole::Velocity);
      entries.push_back({parts[i], r});
    }
  }
  for (const auto& e : entries) {
    if (!is_identifier(e.name) || is_reserved(e.name)) {
      fail(DiagKind::SyntaxError, fmt::format("`{}` is not a valid state name", e.name));
    }
  }
  return StateSignature(std::move(entries));
}

std::size_t StateSignature::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return i + 1;
  }
  return 0;
}

const StateEntry* StateSignature::find(std::string_view name) const {
  const std::size_t i = index_of(name);
  return i ? &entries_[i - 1] : nullptr;
}

// ---------------------------------------------------------------------------
// Inference

namespace {

struct OccursFailure {
  int id;
};

Ty default_metas(const Ty& t) {
  switch (t.kind()) {
    case Ty::Kind::Meta: return Ty::real();
    case Ty::Kind::Prod: {
      std::vector<Ty> cs;
      for (const auto& c : t.components()) cs.push_back(default_metas(c));
      return Ty::prod(std::move(cs));
    }
    case Ty::Kind::Arrow: return Ty::arrow(default_metas(t.dom()), default_metas(t.cod()));
    default: return t;
  }
}

std::optional<int> first_meta(const Ty& t) {
  switch (t.kind()) {
    case Ty::Kind::Meta: return t.meta_id();
    case Ty::Kind::Prod:
      for (const auto& c : t.components()) {
        if (auto m = first_meta(c)) return m;
      }
      return std::nullopt;
    case Ty::Kind::Arrow:
      if (auto m = first_meta(t.dom())) return m;
      return first_meta(t.cod());
    default: return std::nullopt;
  }
}

const Ty& real_to_real() {
  static const Ty t = Ty::arrow(Ty::real(), Ty::real());
  return t;
}

class Inference {
 public:
  Inference(const TypeEnv& env, int meta_base) : env_(env), next_(meta_base) {}

  Ty fresh(const SourceSpan& origin) {
    const int id = next_++;
    origin_[id] = origin;
    return Ty::meta(id);
  }

  Ty resolve(const Ty& t) const {
    switch (t.kind()) {
      case Ty::Kind::Meta: {
        auto it = subst_.find(t.meta_id());
        return it == subst_.end() ? t : resolve(it->second);
      }
      case Ty::Kind::Prod: {
        std::vector<Ty> cs;
        for (const auto& c : t.components()) cs.push_back(resolve(c));
        return Ty::prod(std::move(cs));
      }
      case Ty::Kind::Arrow: return Ty::arrow(resolve(t.dom()), resolve(t.cod()));
      default: return t;
    }
  }

  // Reports `found` against `expected` at span when they do not unify.
  void unify(const Ty& expected, const Ty& found, const SourceSpan& span,
             std::string_view context = {}) {
    bool ok = false;
    try {
      ok = unify_inner(expected, found);
    } catch (const OccursFailure&) {
      fail(DiagKind::OccursCheck,
           fmt::format("occurs check: a type would contain itself (unifying {} with {})",
                       pretty(resolve(expected)), pretty(resolve(found))),
           span);
    }
    if (ok) return;
    const Ty e = default_metas(resolve(expected));
    const Ty f = default_metas(resolve(found));
    std::string message = fmt::format("expected {}, found {}", pretty(e), pretty(f));
    if (!context.empty()) message = fmt::format("{}: {}", context, message);
    Diagnostic d = make_diagnostic(Severity::Error, DiagKind::TypeMismatch, message, span);
    d.expected = e;
    d.found = f;
    throw DiagnosticError(std::move(d));
  }

  Ty infer(const Expr& e) {
    const SourceSpan& span = e.span();
    switch (e.kind()) {
      case Expr::Kind::Var: {
        const auto& name = e.as<expr::Var>()->name;
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it) {
          if (it->first == name) return it->second;
        }
        if (auto it = env_.find(name); it != env_.end()) return it->second;
        fail(DiagKind::FreeVariable, fmt::format("`{}` is not bound or declared", name), span);
      }
      case Expr::Kind::Lit:
        return Ty::real();
      case Expr::Kind::Lam: {
        const auto& l = *e.as<expr::Lam>();
        Ty param = param_type(l, span);
        scope_.emplace_back(l.param, param);
        Ty body = infer(l.body);
        scope_.pop_back();
        return Ty::arrow(param, body);
      }
      case Expr::Kind::App: {
        const auto& a = *e.as<expr::App>();
        Ty fun = resolve(infer(a.fun));
        if (fun.is(Ty::Kind::Arrow)) {
          check(a.arg, fun.dom(), "argument");
          return fun.cod();
        }
        Ty arg = infer(a.arg);
        Ty result = fresh(span);
        unify(Ty::arrow(arg, result), fun, a.fun.span(), "applied value is not a function");
        return result;
      }
      case Expr::Kind::Tuple: {
        std::vector<Ty> cs;
        for (const auto& item : e.as<expr::Tuple>()->items) cs.push_back(infer(item));
        return Ty::prod(std::move(cs));
      }
      case Expr::Kind::Proj: {
        const auto& p = *e.as<expr::Proj>();
        Ty t = resolve(infer(p.tuple));
        if (t.is(Ty::Kind::Prod) && p.index <= t.components().size()) {
          return t.components()[p.index - 1];
        }
        if (t.is(Ty::Kind::Meta)) {
          fail(DiagKind::Ambiguous,
               fmt::format("cannot infer the arity of the tuple projected by proj[{}]", p.index),
               p.tuple.span());
        }
        std::vector<Ty> want;
        for (std::size_t i = 0; i < std::max<std::size_t>(p.index, 2); ++i) {
          want.push_back(Ty::real());
        }
        Diagnostic d = make_diagnostic(
            Severity::Error, DiagKind::TypeMismatch,
            fmt::format("proj[{}] needs a tuple with at least {} components, found {}", p.index,
                        p.index, pretty(default_metas(t))),
            p.tuple.span());
        d.expected = Ty::prod(std::move(want));
        d.found = default_metas(t);
        throw DiagnosticError(std::move(d));
      }
      case Expr::Kind::BinOp: {
        const auto& b = *e.as<expr::BinOp>();
        const auto context = fmt::format("operand of `{}`", to_string(b.op));
        check(b.lhs, Ty::real(), context);
        check(b.rhs, Ty::real(), context);
        return Ty::real();
      }
      case Expr::Kind::Neg:
        check(e.as<expr::Neg>()->operand, Ty::real(), "operand of `-`");
        return Ty::real();
      case Expr::Kind::Prim: {
        const auto& p = *e.as<expr::Prim>();
        check(p.arg, Ty::real(), fmt::format("argument of `{}`", to_string(p.fn)));
        return Ty::real();
      }
      case Expr::Kind::Lim: {
        const auto& l = *e.as<expr::Lim>();
        check(l.point, Ty::real(), "limit point");
        check(l.fun, real_to_real(), "lim takes a function of one real argument");
        return Ty::real();
      }
      case Expr::Kind::TotalD:
        check(e.as<expr::TotalD>()->fun, real_to_real(),
              "D applies only to functions of one real argument");
        return real_to_real();
      case Expr::Kind::PartialD:
        return partial(*e.as<expr::PartialD>(), span);
      case Expr::Kind::Compose: {
        const auto& c = *e.as<expr::Compose>();
        Ty a = fresh(c.inner.span());
        Ty b = fresh(c.inner.span());
        unify(Ty::arrow(a, b), infer(c.inner), c.inner.span(), "right operand of `.`");
        Ty r = fresh(c.outer.span());
        check(c.outer, Ty::arrow(b, r), "left operand of `.`");
        return Ty::arrow(a, r);
      }
      case Expr::Kind::ConstFun: {
        Ty value = infer(e.as<expr::ConstFun>()->value);
        return Ty::arrow(fresh(span), value);
      }
    }
    fail(DiagKind::Unsupported, "unknown expression form", span);
  }

  void check(const Expr& e, const Ty& expected, std::string_view context = {}) {
    const Ty want = resolve(expected);
    if (const auto* l = e.as<expr::Lam>(); l && want.is(Ty::Kind::Arrow)) {
      Ty param = param_type(*l, e.span());
      unify(want.dom(), param, e.span(), context);
      scope_.emplace_back(l->param, resolve(want.dom()));
      check(l->body, want.cod(), context);
      scope_.pop_back();
      return;
    }
    if (const auto* c = e.as<expr::ConstFun>(); c && want.is(Ty::Kind::Arrow)) {
      check(c->value, want.cod(), context);
      return;
    }
    if (const auto* t = e.as<expr::Tuple>();
        t && want.is(Ty::Kind::Prod) && want.components().size() == t->items.size()) {
      for (std::size_t i = 0; i < t->items.size(); ++i) {
        check(t->items[i], want.components()[i], context);
      }
      return;
    }
    unify(want, infer(e), e.span(), context);
  }

  void check_formula(const Formula& f) {
    switch (f.kind()) {
      case Formula::Kind::Quant: {
        const auto& q = *f.as<formula::Quant>();
        if (q.bound) check(q.bound->value, Ty::real(), "quantifier bound");
        scope_.emplace_back(q.name, Ty::real());
        check_formula(q.body);
        scope_.pop_back();
        return;
      }
      case Formula::Kind::Implies:
      case Formula::Kind::And:
      case Formula::Kind::Not:
        for (const auto& s : subformulas(f)) check_formula(s);
        return;
      case Formula::Kind::Truth:
        return;
      case Formula::Kind::Cmp: {
        const auto& c = *f.as<formula::Cmp>();
        check(c.lhs, Ty::real(), "comparison operand");
        check(c.rhs, Ty::real(), "comparison operand");
        return;
      }
      case Formula::Kind::InDom: {
        const auto& d = *f.as<formula::InDom>();
        Ty a = fresh(d.fun.span());
        Ty b = fresh(d.fun.span());
        unify(Ty::arrow(a, b), infer(d.fun), d.fun.span(), "dom expects a function");
        check(d.point, a, "domain point");
        return;
      }
      case Formula::Kind::HasLimit: {
        const auto& h = *f.as<formula::HasLimit>();
        check(h.fun, real_to_real(), "haslimit takes a function of one real argument");
        check(h.point, Ty::real(), "limit point");
        check(h.limit, Ty::real(), "limit value");
        return;
      }
      case Formula::Kind::FunEq: {
        const auto& eq = *f.as<formula::FunEq>();
        Ty a = fresh(eq.lhs.span());
        Ty b = fresh(eq.lhs.span());
        Ty lhs = infer(eq.lhs);
        unify(Ty::arrow(a, b), lhs, eq.lhs.span(), "`==` compares functions");
        check(eq.rhs, lhs, "right-hand side of `==`");
        return;
      }
      case Formula::Kind::LagrangeEq: {
        const auto& l = *f.as<formula::LagrangeEq>();
        check(l.lagrangian,
              Ty::arrow(Ty::prod({Ty::real("T"), Ty::real("Q"), Ty::real("V")}), Ty::real()),
              "Lagrangian");
        check(l.path, Ty::arrow(Ty::real("T"), Ty::real("Q")), "path");
        return;
      }
    }
  }

  void finish(const Ty& t, bool allow_open) const {
    if (allow_open) return;
    if (auto id = first_meta(t)) {
      fail(DiagKind::Ambiguous,
           "type is ambiguous: nothing determines the type of this subterm; annotate it or "
           "check it against an expected type",
           origin_.at(*id));
    }
  }

 private:
  Ty param_type(const expr::Lam& l, const SourceSpan& span) {
    if (l.annotation) return *l.annotation;
    if (l.pattern.empty()) return fresh(span);
    std::vector<Ty> cs;
    for (std::size_t i = 0; i < l.pattern.size(); ++i) cs.push_back(fresh(span));
    return Ty::prod(std::move(cs));
  }

  Ty partial(const expr::PartialD& p, const SourceSpan& span) {
    Ty f = resolve(infer(p.fun));
    auto mismatch = [&](std::string why) {
      std::vector<Ty> want;
      for (std::size_t i = 0; i < std::max<std::size_t>(p.index, 2); ++i) {
        want.push_back(Ty::real());
      }
      Diagnostic d = make_diagnostic(Severity::Error, DiagKind::TypeMismatch,
                                     fmt::format("D[{}] {}: expected {}, found {}", p.index, why,
                                                 pretty(Ty::arrow(Ty::prod(want), Ty::real())),
                                                 pretty(default_metas(f))),
                                     p.fun.span());
      d.expected = Ty::arrow(Ty::prod(std::move(want)), Ty::real());
      d.found = default_metas(f);
      throw DiagnosticError(std::move(d));
    };
    if (f.is(Ty::Kind::Meta)) {
      fail(DiagKind::Ambiguous,
           fmt::format("cannot infer the argument tuple of the function under D[{}]", p.index),
           p.fun.span());
    }
    if (!f.is(Ty::Kind::Arrow) || !f.dom().is(Ty::Kind::Prod)) {
      mismatch("needs a function of a tuple");
    }
    const auto& cs = f.dom().components();
    if (p.index > cs.size()) mismatch(fmt::format("exceeds the arity {}", cs.size()));
    for (const auto& c : cs) {
      if (!unify_inner(Ty::real(), c)) mismatch("needs real arguments");
    }
    if (!unify_inner(Ty::real(), f.cod())) mismatch("needs a real-valued function");
    (void)span;
    return resolve(f);
  }

  bool occurs(int id, const Ty& t) const {
    const Ty r = resolve(t);
    switch (r.kind()) {
      case Ty::Kind::Meta: return r.meta_id() == id;
      case Ty::Kind::Prod:
        return std::any_of(r.components().begin(), r.components().end(),
                           [&](const Ty& c) { return occurs(id, c); });
      case Ty::Kind::Arrow: return occurs(id, r.dom()) || occurs(id, r.cod());
      default: return false;
    }
  }

  Ty shallow(const Ty& t) const {
    if (!t.is(Ty::Kind::Meta)) return t;
    auto it = subst_.find(t.meta_id());
    return it == subst_.end() ? t : shallow(it->second);
  }

  bool bind(int id, const Ty& t) {
    if (occurs(id, t)) throw OccursFailure{id};
    subst_.emplace(id, t);
    return true;
  }

  bool unify_inner(const Ty& x, const Ty& y) {
    const Ty a = shallow(x);
    const Ty b = shallow(y);
    if (a.is(Ty::Kind::Meta) && b.is(Ty::Kind::Meta) && a.meta_id() == b.meta_id()) return true;
    if (a.is(Ty::Kind::Meta)) return bind(a.meta_id(), b);
    if (b.is(Ty::Kind::Meta)) return bind(b.meta_id(), a);
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
      case Ty::Kind::Real:
      case Ty::Kind::Prop:
        return true;
      case Ty::Kind::Prod: {
        if (a.components().size() != b.components().size()) return false;
        for (std::size_t i = 0; i < a.components().size(); ++i) {
          if (!unify_inner(a.components()[i], b.components()[i])) return false;
        }
        return true;
      }
      case Ty::Kind::Arrow:
        return unify_inner(a.dom(), b.dom()) && unify_inner(a.cod(), b.cod());
      default:
        return false;
    }
  }

  const TypeEnv& env_;
  std::vector<std::pair<std::string, Ty>> scope_;
  std::map<int, Ty> subst_;
  std::map<int, SourceSpan> origin_;
  int next_;
};

}  // namespace

Ty infer(const Expr& e, const TypeEnv& env, const InferOptions& options) {
  Inference inf(env, options.meta_base);
  Ty t = inf.resolve(inf.infer(e));
  inf.finish(t, options.allow_open);
  return t;
}

std::optional<Diagnostic> check(const Expr& e, const Ty& expected, const TypeEnv& env) {
  try {
    Inference inf(env, 0);
    inf.check(e, expected);
    return std::nullopt;
  } catch (const DiagnosticError& err) {
    return err.diagnostic();
  }
}

std::optional<Diagnostic> check_formula(const Formula& f, const TypeEnv& env) {
  try {
    Inference inf(env, 0);
    inf.check_formula(f);
    return std::nullopt;
  } catch (const DiagnosticError& err) {
    return err.diagnostic();
  }
}

namespace {

bool alpha_types(const Ty& a, const Ty& b, std::map<int, int>& fwd, std::map<int, int>& bwd) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Ty::Kind::Meta: {
      auto [i, fresh_a] = fwd.emplace(a.meta_id(), b.meta_id());
      auto [j, fresh_b] = bwd.emplace(b.meta_id(), a.meta_id());
      return i->second == b.meta_id() && j->second == a.meta_id();
    }
    case Ty::Kind::Prod: {
      if (a.components().size() != b.components().size()) return false;
      for (std::size_t k = 0; k < a.components().size(); ++k) {
        if (!alpha_types(a.components()[k], b.components()[k], fwd, bwd)) return false;
      }
      return true;
    }
    case Ty::Kind::Arrow:
      return alpha_types(a.dom(), b.dom(), fwd, bwd) && alpha_types(a.cod(), b.cod(), fwd, bwd);
    default:
      return true;
  }
}

}  // namespace

bool types_alpha_eq(const Ty& a, const Ty& b) {
  std::map<int, int> fwd, bwd;
  return alpha_types(a, b, fwd, bwd);
}

// ---------------------------------------------------------------------------
// Traditional notation

namespace {

struct TradToken {
  enum Kind { Ident, Number, Sym, End } kind;
  std::string text;
  SourceSpan span;
};

std::vector<TradToken> trad_lex(std::string_view text) {
  std::vector<TradToken> out;
  std::size_t i = 0;
  std::uint32_t line = 1, col = 1;
  auto span_of = [&](std::size_t start, std::uint32_t l, std::uint32_t c, std::size_t len) {
    return SourceSpan{start, start + len, l, c, l, static_cast<std::uint32_t>(c + len)};
  };
  while (i < text.size()) {
    const char ch = text[i];
    if (ch == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      ++i;
      ++col;
      continue;
    }
    std::size_t n = 0;
    TradToken::Kind kind;
    std::string spelled;
    if (text.substr(i, 3) == "\xE2\x88\x82") {  // ∂
      n = 3;
      kind = TradToken::Ident;
      spelled = "partial";
    } else if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      while (i + n < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[i + n])) || text[i + n] == '_')) {
        ++n;
      }
      while (i + n < text.size() && text[i + n] == '\'') ++n;
      kind = TradToken::Ident;
    } else if (std::isdigit(static_cast<unsigned char>(ch))) {
      while (i + n < text.size() &&
             (std::isdigit(static_cast<unsigned char>(text[i + n])) || text[i + n] == '.')) {
        ++n;
      }
      kind = TradToken::Number;
    } else if (std::string_view("()/-+=").find(ch) != std::string_view::npos) {
      n = 1;
      kind = TradToken::Sym;
    } else {
      fail(DiagKind::SyntaxError, fmt::format("unexpected character `{}`", text.substr(i, 1)),
           span_of(i, line, col, 1));
    }
    out.push_back({kind, spelled.empty() ? std::string(text.substr(i, n)) : spelled,
                   span_of(i, line, col, n)});
    i += n;
    col += static_cast<std::uint32_t>(n);
  }
  out.push_back({TradToken::End, "", span_of(text.size(), line, col, 0)});
  return out;
}

class TraditionalParser {
 public:
  TraditionalParser(std::string_view text, const TypeEnv& env, const StateSignature& sig)
      : toks_(trad_lex(text)), env_(env), sig_(sig) {}

  Formula equation() {
    const std::size_t start = pos_;
    Expr lhs = sum();
    expect("=");
    Expr rhs = sum();
    if (peek().kind != TradToken::End) error(fmt::format("unexpected `{}`", peek().text));
    return Formula::fun_eq(lhs, rhs, span_from(start));
  }

  std::vector<Diagnostic> notes;

 private:
  const TradToken& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool at(std::string_view s) const {
    return peek().kind != TradToken::End && peek().text == s;
  }
  void expect(std::string_view s) {
    if (!at(s)) {
      error(fmt::format("expected `{}`, found {}", s,
                        peek().kind == TradToken::End ? "end of input"
                                                      : fmt::format("`{}`", peek().text)));
    }
    ++pos_;
  }
  [[noreturn]] void error(std::string message) const {
    fail(DiagKind::SyntaxError, std::move(message), peek().span);
  }
  SourceSpan span_from(std::size_t start) const {
    return SourceSpan::merge(toks_[start].span, toks_[pos_ > start ? pos_ - 1 : start].span);
  }

  Expr sum() {
    const std::size_t start = pos_;
    Expr lhs = term();
    while (at("-") || at("+")) {
      const BinaryOp op = peek().text == "-" ? BinaryOp::Sub : BinaryOp::Add;
      ++pos_;
      Expr rhs = term();
      lhs = Expr::binop(op, lhs, rhs, span_from(start));
    }
    return lhs;
  }

  std::string name() {
    if (peek().kind != TradToken::Ident) error("expected a name");
    return toks_[pos_++].text;
  }

  Expr term() {
    const std::size_t start = pos_;
    if (peek().kind == TradToken::Number) {
      auto value = parse_decimal(peek().text);
      if (!value) error("malformed number");
      const SourceSpan span = peek().span;
      ++pos_;
      // A bare number in an equation between functions is a constant function.
      return Expr::const_fun(Expr::lit(*value, span), span);
    }
    if (at("(")) {
      ++pos_;
      Expr inner = sum();
      expect(")");
      return inner;
    }
    if (at("d") && peek(1).text == "/") {
      ++pos_;
      expect("/");
      const TradToken& dv = peek();
      for (const auto& e : sig_.entries()) {
        if (e.role == StateRole::Time && dv.text != "d" + e.name) {
          fail(DiagKind::UnknownName,
               fmt::format("`{}` does not differentiate by the time variable `{}`", dv.text,
                           e.name),
               dv.span);
        }
      }
      ++pos_;
      expect("(");
      Expr inner = sum();
      expect(")");
      return Expr::total_d(inner, span_from(start));
    }
    if (at("partial")) {
      ++pos_;
      expect("(");
      const TradToken fun_tok = peek();
      const std::string fun = name();
      expect(")");
      expect("/");
      expect("partial");
      expect("(");
      const TradToken var_tok = peek();
      const std::string var = name();
      expect(")");
      if (!env_.count(fun)) {
        fail(DiagKind::UnknownName, fmt::format("`{}` is not declared", fun), fun_tok.span);
      }
      const StateEntry* entry = sig_.find(var);
      if (!entry) {
        fail(DiagKind::UnknownName,
             fmt::format("`{}` is not a name in the state signature", var), var_tok.span);
      }
      if (entry->role == StateRole::Velocity) {
        notes.push_back(make_diagnostic(
            Severity::Note, DiagKind::NotAVariable,
            fmt::format("`{}` is not a variable: it is the same as d{}/d{}, a function of time; "
                        "partial(L)/partial({}) only makes sense as D[{}](L), the derivative in "
                        "the {} slot",
                        var, coordinate_for(*entry), sig_.entries().front().name, var,
                        sig_.index_of(var), to_string(entry->role)),
            var_tok.span));
      }
      const SourceSpan span = span_from(start);
      return Expr::partial_d(sig_.index_of(var), Expr::var(fun, fun_tok.span), span);
    }
    error(fmt::format("unexpected {}", peek().kind == TradToken::End
                                           ? std::string("end of input")
                                           : fmt::format("`{}`", peek().text)));
  }

  std::string coordinate_for(const StateEntry& velocity) const {
    // Velocities pair with coordinates by position.
    std::vector<std::string> coords, vels;
    for (const auto& e : sig_.entries()) {
      if (e.role == StateRole::Coordinate) coords.push_back(e.name);
      if (e.role == StateRole::Velocity) vels.push_back(e.name);
    }
    for (std::size_t i = 0; i < vels.size(); ++i) {
      if (vels[i] == velocity.name) return coords[i];
    }
    return "q";
  }

  std::vector<TradToken> toks_;
  std::size_t pos_ = 0;
  const TypeEnv& env_;
  const StateSignature& sig_;
};

}  // namespace

Elaboration elaborate_traditional(std::string_view text, const TypeEnv& env,
                                  const StateSignature& sig, bool repair,
                                  const std::string& path) {
  TraditionalParser parser(text, env, sig);
  Formula naive = parser.equation();
  if (!repair) {
    Elaboration out{naive, parser.notes};
    if (auto d = check_formula(naive, env)) out.diagnostics.push_back(*d);
    return out;
  }

  if (!env.count(path)) {
    fail(DiagKind::UnknownName, fmt::format("the path `{}` is not declared", path));
  }
  // Expected shape: d/dt(partial(L)/partial(v)) - partial(L)/partial(q) = 0.
  const auto& eq = *naive.as<formula::FunEq>();
  const auto* diff = eq.lhs.as<expr::BinOp>();
  const auto* zero = eq.rhs.as<expr::ConstFun>();
  const expr::TotalD* outer = diff ? diff->lhs.as<expr::TotalD>() : nullptr;
  const bool zero_rhs = zero && zero->value.as<expr::Lit>() && zero->value.as<expr::Lit>()->value == 0;
  if (!diff || diff->op != BinaryOp::Sub || !outer || !outer->fun.as<expr::PartialD>() ||
      !diff->rhs.as<expr::PartialD>() || !zero_rhs) {
    fail(DiagKind::Unsupported,
         "repair expects the form d/dt(partial(L)/partial(qdot)) - partial(L)/partial(q) = 0",
         naive.span());
  }
  const Expr w = Expr::var(path);
  const Expr lhs = Expr::total_d(Expr::compose(outer->fun, mk_expand(w), diff->lhs.span()),
                                 diff->lhs.span());
  const Expr rhs = Expr::compose(diff->rhs, mk_expand(w), diff->rhs.span());
  Formula repaired = Formula::fun_eq(lhs, rhs, naive.span());
  Elaboration out{repaired, {}};
  if (auto d = check_formula(repaired, env)) out.diagnostics.push_back(*d);
  return out;
}

}  // namespace mathdsl

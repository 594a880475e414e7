#include "mathdsl/binding.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <span>

#include <fmt/format.h>

namespace mathdsl {

namespace {

// Walks an expression, reporting free occurrences and shadowing binders.
struct ScopeWalker {
  const NameSet& ambient;
  std::vector<std::string> bound;
  std::function<void(const std::string&, const SourceSpan&)> on_free;
  std::function<void(const std::string&, const SourceSpan&)> on_shadow;

  bool is_bound(const std::string& name) const {
    return std::find(bound.begin(), bound.end(), name) != bound.end();
  }

  void bind(const std::string& name, const SourceSpan& span) {
    if (on_shadow && (is_bound(name) || ambient.count(name) > 0)) on_shadow(name, span);
    bound.push_back(name);
  }

  void walk(const Expr& e) {
    if (const auto* v = e.as<expr::Var>()) {
      if (!is_bound(v->name) && ambient.count(v->name) == 0 && on_free) on_free(v->name, e.span());
      return;
    }
    if (const auto* l = e.as<expr::Lam>()) {
      bind(l->param, e.span());
      walk(l->body);
      bound.pop_back();
      return;
    }
    for (const auto& c : children(e)) walk(c);
  }
};

void collect_free(const Expr& e, std::vector<std::string>& bound, NameSet& out) {
  if (const auto* v = e.as<expr::Var>()) {
    if (std::find(bound.begin(), bound.end(), v->name) == bound.end()) out.insert(v->name);
    return;
  }
  if (const auto* l = e.as<expr::Lam>()) {
    bound.push_back(l->param);
    collect_free(l->body, bound, out);
    bound.pop_back();
    return;
  }
  for (const auto& c : children(e)) collect_free(c, bound, out);
}

void collect_free(const Formula& f, std::vector<std::string>& bound, NameSet& out) {
  if (const auto* q = f.as<formula::Quant>()) {
    if (q->bound) collect_free(q->bound->value, bound, out);
    bound.push_back(q->name);
    collect_free(q->body, bound, out);
    bound.pop_back();
    return;
  }
  for (const auto& e : embedded_exprs(f)) collect_free(e, bound, out);
  for (const auto& s : subformulas(f)) collect_free(s, bound, out);
}

NameSet minus_ambient(NameSet names, const NameSet& ambient) {
  for (const auto& a : ambient) names.erase(a);
  return names;
}

}  // namespace

NameSet free_vars(const Expr& e, const NameSet& ambient) {
  NameSet out;
  std::vector<std::string> bound;
  collect_free(e, bound, out);
  return minus_ambient(std::move(out), ambient);
}

NameSet free_vars(const Formula& f, const NameSet& ambient) {
  NameSet out;
  std::vector<std::string> bound;
  collect_free(f, bound, out);
  return minus_ambient(std::move(out), ambient);
}

NameSet free_vars(const Term& t, const NameSet& ambient) {
  return std::visit([&](const auto& x) { return free_vars(x, ambient); }, t);
}

NameSet all_names(const Expr& e) {
  NameSet out;
  std::function<void(const Expr&)> go = [&](const Expr& x) {
    if (const auto* v = x.as<expr::Var>()) out.insert(v->name);
    if (const auto* l = x.as<expr::Lam>()) {
      out.insert(l->param);
      out.insert(l->pattern.begin(), l->pattern.end());
    }
    for (const auto& c : children(x)) go(c);
  };
  go(e);
  return out;
}

std::string fresh_name(std::string_view base, const NameSet& avoid) {
  std::string name(base);
  while (avoid.count(name) > 0) name += '\'';
  return name;
}

// ---------------------------------------------------------------------------
// Substitution

Expr mk_expand(const Expr& path, SourceSpan span) {
  const std::string t = fresh_name("t", all_names(path));
  const Expr tv = Expr::var(t, span);
  Expr state = Expr::tuple(
      {tv, Expr::app(path, tv, span), Expr::app(Expr::total_d(path, span), tv, span)}, span);
  return Expr::lam(t, state, std::nullopt, {}, span);
}

Expr subst(const Expr& e, const std::string& name, const Expr& replacement) {
  if (const auto* v = e.as<expr::Var>()) return v->name == name ? replacement : e;
  if (const auto* l = e.as<expr::Lam>()) {
    if (l->param == name) return e;
    const NameSet body_free = free_vars(l->body);
    if (body_free.count(name) == 0) return e;
    const NameSet repl_free = free_vars(replacement);
    std::string param = l->param;
    Expr body = l->body;
    if (repl_free.count(param) > 0) {
      NameSet avoid = all_names(l->body);
      avoid.insert(repl_free.begin(), repl_free.end());
      avoid.insert(name);
      const std::string renamed = fresh_name(param, avoid);
      body = subst(body, param, Expr::var(renamed));
      param = renamed;
    }
    return Expr::lam(param, subst(body, name, replacement), l->annotation, l->pattern, e.span());
  }
  auto kids = children(e);
  if (kids.empty()) return e;
  for (auto& k : kids) k = subst(k, name, replacement);
  return with_children(e, std::move(kids));
}

Formula subst(const Formula& f, const std::string& name, const Expr& replacement) {
  std::vector<Expr> exprs = embedded_exprs(f);
  for (auto& e : exprs) e = subst(e, name, replacement);
  if (const auto* q = f.as<formula::Quant>()) {
    std::optional<BinderBound> bound;
    if (q->bound) bound = BinderBound{q->bound->op, exprs.at(0)};
    if (q->name == name || free_vars(q->body).count(name) == 0) {
      return Formula::quant(q->quantifier, q->name, bound, q->body, f.span());
    }
    std::string binder = q->name;
    Formula body = q->body;
    const NameSet repl_free = free_vars(replacement);
    if (repl_free.count(binder) > 0) {
      NameSet avoid = free_vars(body);
      avoid.insert(repl_free.begin(), repl_free.end());
      avoid.insert(name);
      const std::string renamed = fresh_name(binder, avoid);
      body = subst(body, binder, Expr::var(renamed));
      binder = renamed;
    }
    return Formula::quant(q->quantifier, binder, bound, subst(body, name, replacement), f.span());
  }
  std::vector<Formula> subs = subformulas(f);
  for (auto& s : subs) s = subst(s, name, replacement);
  return with_parts(f, std::move(subs), std::move(exprs));
}

// ---------------------------------------------------------------------------
// Alpha-equivalence

namespace {

class AlphaComparer {
 public:
  bool expr(const Expr& a, const Expr& b) {
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
      case Expr::Kind::Var: return var(a.as<expr::Var>()->name, b.as<expr::Var>()->name);
      case Expr::Kind::Lit: return a.as<expr::Lit>()->value == b.as<expr::Lit>()->value;
      case Expr::Kind::Lam: {
        const auto& x = *a.as<expr::Lam>();
        const auto& y = *b.as<expr::Lam>();
        if (x.arity() != y.arity()) return false;
        if (x.annotation.has_value() != y.annotation.has_value()) return false;
        if (x.annotation && !(*x.annotation == *y.annotation)) return false;
        left_.push_back(x.param);
        right_.push_back(y.param);
        const bool same = expr(x.body, y.body);
        left_.pop_back();
        right_.pop_back();
        return same;
      }
      case Expr::Kind::Proj:
        if (a.as<expr::Proj>()->index != b.as<expr::Proj>()->index) return false;
        break;
      case Expr::Kind::BinOp:
        if (a.as<expr::BinOp>()->op != b.as<expr::BinOp>()->op) return false;
        break;
      case Expr::Kind::Prim:
        if (a.as<expr::Prim>()->fn != b.as<expr::Prim>()->fn) return false;
        break;
      case Expr::Kind::PartialD:
        if (a.as<expr::PartialD>()->index != b.as<expr::PartialD>()->index) return false;
        break;
      default: break;
    }
    const auto xs = children(a);
    const auto ys = children(b);
    if (xs.size() != ys.size()) return false;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!expr(xs[i], ys[i])) return false;
    }
    return true;
  }

  bool formula(const Formula& a, const Formula& b) {
    if (a.kind() != b.kind()) return false;
    if (const auto* x = a.as<formula::Quant>()) {
      const auto& y = *b.as<formula::Quant>();
      if (x->quantifier != y.quantifier) return false;
      if (x->bound.has_value() != y.bound.has_value()) return false;
      if (x->bound && (x->bound->op != y.bound->op || !expr(x->bound->value, y.bound->value)))
        return false;
      left_.push_back(x->name);
      right_.push_back(y.name);
      const bool same = formula(x->body, y.body);
      left_.pop_back();
      right_.pop_back();
      return same;
    }
    if (const auto* x = a.as<formula::Truth>()) return x->value == b.as<formula::Truth>()->value;
    if (const auto* x = a.as<formula::Cmp>()) {
      if (x->op != b.as<formula::Cmp>()->op) return false;
    }
    const auto xe = embedded_exprs(a);
    const auto ye = embedded_exprs(b);
    for (std::size_t i = 0; i < xe.size(); ++i) {
      if (!expr(xe[i], ye[i])) return false;
    }
    const auto xs = subformulas(a);
    const auto ys = subformulas(b);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!formula(xs[i], ys[i])) return false;
    }
    return true;
  }

 private:
  static long depth_of(const std::vector<std::string>& stack, const std::string& name) {
    for (std::size_t i = stack.size(); i-- > 0;) {
      if (stack[i] == name) return static_cast<long>(i);
    }
    return -1;
  }

  bool var(const std::string& a, const std::string& b) const {
    const long da = depth_of(left_, a);
    const long db = depth_of(right_, b);
    if (da < 0 && db < 0) return a == b;
    return da == db;
  }

  std::vector<std::string> left_;
  std::vector<std::string> right_;
};

}  // namespace

bool alpha_eq(const Expr& a, const Expr& b) { return AlphaComparer().expr(a, b); }

bool alpha_eq(const Formula& a, const Formula& b) { return AlphaComparer().formula(a, b); }

bool alpha_eq(const Term& a, const Term& b) {
  if (a.index() != b.index()) return false;
  if (const auto* x = std::get_if<Expr>(&a)) return alpha_eq(*x, std::get<Expr>(b));
  return alpha_eq(std::get<Formula>(a), std::get<Formula>(b));
}

// ---------------------------------------------------------------------------
// Implicit binders

namespace {

struct FreeOccurrence {
  SourceSpan span;
  std::vector<std::size_t> path;  // subformula indices from the root
  bool under_implication;
};

struct FormulaScan {
  const NameSet& ambient;
  std::vector<std::string> bound;
  std::vector<std::size_t> path;
  int implication_depth = 0;
  std::vector<std::string> order;
  std::map<std::string, std::vector<FreeOccurrence>> occurrences;
  std::vector<NameOccurrences> shadowed;

  void note_shadow(const std::string& name, const SourceSpan& span) {
    for (auto& s : shadowed) {
      if (s.name == name) {
        s.spans.push_back(span);
        return;
      }
    }
    shadowed.push_back({name, {span}});
  }

  void note_free(const std::string& name, const SourceSpan& span) {
    auto& occ = occurrences[name];
    if (occ.empty()) order.push_back(name);
    occ.push_back({span, path, implication_depth > 0});
  }

  void scan_expr(const Expr& e) {
    ScopeWalker w{ambient, bound,
                  [&](const std::string& n, const SourceSpan& s) { note_free(n, s); },
                  [&](const std::string& n, const SourceSpan& s) { note_shadow(n, s); }};
    w.walk(e);
  }

  void scan(const Formula& f) {
    if (const auto* q = f.as<formula::Quant>()) {
      if (q->bound) scan_expr(q->bound->value);
      const bool hides = std::find(bound.begin(), bound.end(), q->name) != bound.end() ||
                         ambient.count(q->name) > 0;
      if (hides) note_shadow(q->name, f.span());
      bound.push_back(q->name);
      path.push_back(0);
      scan(q->body);
      path.pop_back();
      bound.pop_back();
      return;
    }
    for (const auto& e : embedded_exprs(f)) scan_expr(e);
    const bool implication = f.kind() == Formula::Kind::Implies;
    if (implication) ++implication_depth;
    const auto subs = subformulas(f);
    for (std::size_t i = 0; i < subs.size(); ++i) {
      path.push_back(i);
      scan(subs[i]);
      path.pop_back();
    }
    if (implication) --implication_depth;
  }
};

Formula insert_forall(const Formula& f, std::span<const std::size_t> path,
                      const std::string& name) {
  if (path.empty()) return Formula::forall(name, f, std::nullopt, f.span());
  auto subs = subformulas(f);
  subs.at(path.front()) = insert_forall(subs.at(path.front()), path.subspan(1), name);
  return with_parts(f, std::move(subs), embedded_exprs(f));
}

std::vector<std::size_t> common_prefix(const std::vector<FreeOccurrence>& occ) {
  std::vector<std::size_t> prefix = occ.front().path;
  for (const auto& o : occ) {
    std::size_t n = 0;
    while (n < prefix.size() && n < o.path.size() && prefix[n] == o.path[n]) ++n;
    prefix.resize(n);
  }
  return prefix;
}

// The quantifier goes on the innermost implication that encloses every
// occurrence; without one, on the smallest subformula that does.
std::vector<std::size_t> binder_site(const Formula& f, const std::vector<FreeOccurrence>& occ) {
  std::vector<std::size_t> prefix = common_prefix(occ);
  std::optional<std::size_t> implication;
  Formula node = f;
  for (std::size_t depth = 0;; ++depth) {
    if (node.kind() == Formula::Kind::Implies) implication = depth;
    if (depth == prefix.size()) break;
    node = subformulas(node).at(prefix[depth]);
  }
  if (implication) prefix.resize(*implication);
  return prefix;
}

}  // namespace

ScopeReport diagnose_implicit_binders(const Formula& f, const NameSet& ambient) {
  FormulaScan scan{ambient, {}, {}, 0, {}, {}, {}};
  scan.scan(f);

  ScopeReport report;
  report.shadowed = scan.shadowed;
  Formula repaired = f;
  bool any_repair = false;
  for (const auto& name : scan.order) {
    const auto& occ = scan.occurrences.at(name);
    NameOccurrences entry{name, {}};
    for (const auto& o : occ) entry.spans.push_back(o.span);
    report.free.push_back(entry);

    const bool implicit = std::any_of(occ.begin(), occ.end(),
                                      [](const FreeOccurrence& o) { return o.under_implication; });
    if (!implicit) {
      report.errors.push_back(make_diagnostic(
          Severity::Error, DiagKind::FreeVariable,
          fmt::format("`{}` is not bound by any binder or declaration", name), occ.front().span));
      continue;
    }
    const auto where = binder_site(f, occ);
    Diagnostic d = make_diagnostic(
        Severity::Warning, DiagKind::ImplicitBinder,
        fmt::format("`{}` is never bound; the implication hides a quantifier: insert `forall {}.`",
                    name, name),
        occ.front().span);
    d.suggestion = insert_forall(f, where, name);
    report.suggestions.push_back(std::move(d));

    // Paths into `repaired` shift by one level under every quantifier already
    // inserted above them; re-scan to locate the occurrences there.
    FormulaScan rescan{ambient, {}, {}, 0, {}, {}, {}};
    rescan.scan(repaired);
    repaired = insert_forall(repaired, binder_site(repaired, rescan.occurrences.at(name)), name);
    any_repair = true;
  }
  if (any_repair) report.repaired = repaired;
  return report;
}

ScopeReport scope_report(const Expr& e, const NameSet& ambient) {
  ScopeReport report;
  ScopeWalker w{ambient, {},
                [&](const std::string& n, const SourceSpan& s) {
                  for (auto& f : report.free) {
                    if (f.name == n) {
                      f.spans.push_back(s);
                      return;
                    }
                  }
                  report.free.push_back({n, {s}});
                },
                [&](const std::string& n, const SourceSpan& s) {
                  for (auto& f : report.shadowed) {
                    if (f.name == n) {
                      f.spans.push_back(s);
                      return;
                    }
                  }
                  report.shadowed.push_back({n, {s}});
                }};
  w.walk(e);
  for (const auto& f : report.free) {
    report.errors.push_back(make_diagnostic(
        Severity::Error, DiagKind::FreeVariable,
        fmt::format("`{}` is not bound by any binder or declaration", f.name), f.spans.front()));
  }
  return report;
}

}  // namespace mathdsl

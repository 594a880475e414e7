#include "mathdsl/binding.hpp"
#include "mathdsl/parser.hpp"

#include <fmt/format.h>

namespace mathdsl {

namespace {

// Expression contexts; a node is parenthesized when its own level is below
// the level its context requires.
enum Level : int {
  kLambda = 0,
  kAdd = 1,
  kMul = 2,
  kNeg = 3,
  kPow = 4,
  kCompose = 5,
  kApp = 6,
  kAtom = 7,
};

// Formula contexts.
enum FLevel : int {
  kQuant = 0,
  kImplies = 1,
  kAnd = 2,
  kNot = 3,
  kFAtom = 4,
};

std::string paren_if(bool cond, std::string s) {
  return cond ? "(" + s + ")" : s;
}

bool printable_name(const std::string& name) {
  return is_identifier(name) && !is_reserved(name);
}

// Every occurrence of `param` in body is `proj[i](param)` with i <= arity.
bool only_projections(const Expr& e, const std::string& param, std::size_t arity) {
  if (const auto* v = e.as<expr::Var>()) return v->name != param;
  if (const auto* p = e.as<expr::Proj>()) {
    if (const auto* v = p->tuple.as<expr::Var>(); v && v->name == param) {
      return p->index >= 1 && p->index <= arity;
    }
  }
  if (const auto* l = e.as<expr::Lam>(); l && l->param == param) return true;
  for (const auto& k : children(e)) {
    if (!only_projections(k, param, arity)) return false;
  }
  return true;
}

Expr replace_projections(const Expr& e, const std::string& param,
                         const std::vector<std::string>& names) {
  if (const auto* p = e.as<expr::Proj>()) {
    if (const auto* v = p->tuple.as<expr::Var>(); v && v->name == param) {
      return Expr::var(names[p->index - 1], e.span());
    }
  }
  if (const auto* l = e.as<expr::Lam>(); l && l->param == param) return e;
  auto kids = children(e);
  if (kids.empty()) return e;
  for (auto& k : kids) k = replace_projections(k, param, names);
  return with_children(e, std::move(kids));
}

// `\t -> (t, w t, D(w) t)` is printed as `expand(w)`.
std::optional<Expr> match_expand(const Expr& e) {
  const auto* l = e.as<expr::Lam>();
  if (!l || l->annotation || !l->pattern.empty()) return std::nullopt;
  const auto* tup = l->body.as<expr::Tuple>();
  if (!tup || tup->items.size() != 3) return std::nullopt;
  auto is_param = [&](const Expr& x) {
    const auto* v = x.as<expr::Var>();
    return v && v->name == l->param;
  };
  if (!is_param(tup->items[0])) return std::nullopt;
  const auto* a1 = tup->items[1].as<expr::App>();
  const auto* a2 = tup->items[2].as<expr::App>();
  if (!a1 || !a2 || !is_param(a1->arg) || !is_param(a2->arg)) return std::nullopt;
  const auto* d = a2->fun.as<expr::TotalD>();
  if (!d || !(d->fun == a1->fun)) return std::nullopt;
  if (free_vars(a1->fun).count(l->param)) return std::nullopt;
  return a1->fun;
}

bool is_simple_bound(const Expr& e) {
  if (e.as<expr::Var>()) return true;
  if (const auto* lit = e.as<expr::Lit>()) {
    return lit->value >= 0 && is_terminating_decimal(lit->value);
  }
  return false;
}

class Printer {
 public:
  std::string expr(const Expr& e, int ctx) {
    switch (e.kind()) {
      case Expr::Kind::Var:
        return e.as<expr::Var>()->name;
      case Expr::Kind::Lit: {
        const auto& v = e.as<expr::Lit>()->value;
        int level = kAtom;
        if (v < 0) level = kNeg;
        if (!is_terminating_decimal(v)) level = kMul;
        return paren_if(level < ctx, rational_to_string(v));
      }
      case Expr::Kind::Lam:
        return lambda(e, ctx);
      case Expr::Kind::App: {
        const auto& a = *e.as<expr::App>();
        return paren_if(kApp < ctx, expr(a.fun, kApp) + " " + expr(a.arg, kAtom));
      }
      case Expr::Kind::Tuple: {
        std::string out = "(";
        const auto& items = e.as<expr::Tuple>()->items;
        for (std::size_t i = 0; i < items.size(); ++i) {
          if (i) out += ", ";
          out += expr(items[i], kLambda);
        }
        return out + ")";
      }
      case Expr::Kind::Proj: {
        const auto& p = *e.as<expr::Proj>();
        return fmt::format("proj[{}]({})", p.index, expr(p.tuple, kLambda));
      }
      case Expr::Kind::BinOp:
        return binop(*e.as<expr::BinOp>(), ctx);
      case Expr::Kind::Neg:
        return paren_if(kNeg < ctx, "-" + expr(e.as<expr::Neg>()->operand, kNeg));
      case Expr::Kind::Prim: {
        const auto& p = *e.as<expr::Prim>();
        return fmt::format("{}({})", to_string(p.fn), expr(p.arg, kLambda));
      }
      case Expr::Kind::Lim: {
        const auto& l = *e.as<expr::Lim>();
        return fmt::format("lim({}, {})", expr(l.point, kLambda), expr(l.fun, kLambda));
      }
      case Expr::Kind::TotalD:
        return fmt::format("D({})", expr(e.as<expr::TotalD>()->fun, kLambda));
      case Expr::Kind::PartialD: {
        const auto& p = *e.as<expr::PartialD>();
        return fmt::format("D[{}]({})", p.index, expr(p.fun, kLambda));
      }
      case Expr::Kind::Compose: {
        const auto& c = *e.as<expr::Compose>();
        return paren_if(kCompose < ctx,
                        expr(c.outer, kApp) + " . " + expr(c.inner, kCompose));
      }
      case Expr::Kind::ConstFun:
        return fmt::format("const({})", expr(e.as<expr::ConstFun>()->value, kLambda));
    }
    return "?";
  }

  std::string formula(const Formula& f, int ctx) {
    switch (f.kind()) {
      case Formula::Kind::Quant: {
        const auto& q = *f.as<formula::Quant>();
        std::string name = q.name;
        Formula body = q.body;
        if (!printable_name(name)) {
          NameSet avoid = free_vars(body);
          name = fresh_name("x", avoid);
          body = subst(body, q.name, Expr::var(name));
        }
        std::string head = q.quantifier == Quantifier::Forall ? "forall " : "exists ";
        head += name;
        if (q.bound) {
          const std::string v = expr(q.bound->value, kLambda);
          head += fmt::format(" {} {}", to_string(q.bound->op),
                              is_simple_bound(q.bound->value) ? v : "(" + v + ")");
        }
        return paren_if(kQuant < ctx, head + ". " + formula(body, kQuant));
      }
      case Formula::Kind::Implies: {
        const auto& i = *f.as<formula::Implies>();
        return paren_if(kImplies < ctx,
                        formula(i.premise, kAnd) + " => " + formula(i.conclusion, kQuant));
      }
      case Formula::Kind::And: {
        const auto& a = *f.as<formula::And>();
        if (auto chain = lt_chain(a)) return paren_if(kFAtom < ctx, *chain);
        return paren_if(kAnd < ctx, formula(a.lhs, kAnd) + " && " + formula(a.rhs, kNot));
      }
      case Formula::Kind::Not: {
        const Formula& operand = f.as<formula::Not>()->operand;
        const bool atomic = operand.kind() == Formula::Kind::Truth ||
                            operand.kind() == Formula::Kind::Not ||
                            operand.kind() == Formula::Kind::HasLimit ||
                            operand.kind() == Formula::Kind::LagrangeEq;
        return paren_if(kNot < ctx, "!" + formula(operand, atomic ? kNot : kFAtom + 1));
      }
      case Formula::Kind::Truth:
        return f.as<formula::Truth>()->value ? "true" : "false";
      case Formula::Kind::Cmp: {
        const auto& c = *f.as<formula::Cmp>();
        return paren_if(kFAtom < ctx, fmt::format("{} {} {}", cmp_operand(c.lhs),
                                                  to_string(c.op), cmp_operand(c.rhs)));
      }
      case Formula::Kind::InDom: {
        const auto& d = *f.as<formula::InDom>();
        return paren_if(kFAtom < ctx, fmt::format("{} in dom({})", cmp_operand(d.point),
                                                  expr(d.fun, kLambda)));
      }
      case Formula::Kind::HasLimit: {
        const auto& h = *f.as<formula::HasLimit>();
        return fmt::format("haslimit({}, {}, {})", expr(h.fun, kLambda), expr(h.point, kLambda),
                           expr(h.limit, kLambda));
      }
      case Formula::Kind::FunEq: {
        const auto& e = *f.as<formula::FunEq>();
        return paren_if(kFAtom < ctx,
                        fmt::format("{} == {}", cmp_operand(e.lhs), cmp_operand(e.rhs)));
      }
      case Formula::Kind::LagrangeEq: {
        const auto& l = *f.as<formula::LagrangeEq>();
        return fmt::format("lagrange({}, {})", expr(l.lagrangian, kLambda),
                           expr(l.path, kLambda));
      }
    }
    return "?";
  }

 private:
  // Comparison operands are full expressions, but a leading parenthesis
  // would make the formula parser try `( formula )` first. Both readings
  // are handled by backtracking, so nothing special is needed here apart
  // from lambdas, which would swallow the operator.
  std::string cmp_operand(const Expr& e) { return expr(e, kAdd); }

  std::optional<std::string> lt_chain(const formula::And& a) {
    const auto* l = a.lhs.as<formula::Cmp>();
    const auto* r = a.rhs.as<formula::Cmp>();
    if (!l || !r || l->op != CmpOp::Lt || r->op != CmpOp::Lt || !(l->rhs == r->lhs)) {
      return std::nullopt;
    }
    return fmt::format("{} < {} < {}", cmp_operand(l->lhs), cmp_operand(l->rhs),
                       cmp_operand(r->rhs));
  }

  std::string binop(const expr::BinOp& b, int ctx) {
    switch (b.op) {
      case BinaryOp::Add:
      case BinaryOp::Sub:
        return paren_if(kAdd < ctx, expr(b.lhs, kAdd) + (b.op == BinaryOp::Add ? " + " : " - ") +
                                        expr(b.rhs, kMul));
      case BinaryOp::Mul:
      case BinaryOp::Div:
        return paren_if(kMul < ctx, expr(b.lhs, kMul) + (b.op == BinaryOp::Mul ? " * " : " / ") +
                                        expr(b.rhs, kNeg));
      case BinaryOp::Pow:
        return paren_if(kPow < ctx, expr(b.lhs, kCompose) + "^" + expr(b.rhs, kNeg));
    }
    return "?";
  }

  std::string lambda(const Expr& e, int ctx) {
    if (auto w = match_expand(e)) return "expand(" + expr(*w, kLambda) + ")";
    const auto& l = *e.as<expr::Lam>();
    std::string param = l.param;
    Expr body = l.body;
    if (!printable_name(param)) {
      param = fresh_name("x", all_names(body));
      body = subst(body, l.param, Expr::var(param));
    }

    std::string head;
    if (!l.pattern.empty() && only_projections(body, param, l.pattern.size())) {
      NameSet avoid = all_names(body);
      std::vector<std::string> names;
      for (std::size_t i = 0; i < l.pattern.size(); ++i) {
        std::string base = printable_name(l.pattern[i]) ? l.pattern[i] : fmt::format("x{}", i + 1);
        std::string n = avoid.count(base) ? fresh_name(base, avoid) : base;
        avoid.insert(n);
        names.push_back(n);
      }
      body = replace_projections(body, param, names);
      head = "(";
      for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) head += ", ";
        head += names[i];
      }
      head += ")";
    } else if (l.annotation) {
      head = "(" + param + " : " + pretty(*l.annotation, true) + ")";
    } else {
      head = param;
    }
    return paren_if(kLambda < ctx, "\\" + head + " -> " + expr(body, kLambda));
  }
};

std::string ty_string(const Ty& t, bool verbose, bool arrow_lhs) {
  switch (t.kind()) {
    case Ty::Kind::Real:
      if (verbose && !t.label().empty()) return "R{" + t.label() + "}";
      return "R";
    case Ty::Kind::Prod: {
      std::string out = "(";
      const auto& cs = t.components();
      for (std::size_t i = 0; i < cs.size(); ++i) {
        if (i) out += ", ";
        out += ty_string(cs[i], verbose, false);
      }
      return out + ")";
    }
    case Ty::Kind::Arrow: {
      std::string s = ty_string(t.dom(), verbose, true) + " -> " + ty_string(t.cod(), verbose, false);
      return arrow_lhs ? "(" + s + ")" : s;
    }
    case Ty::Kind::Meta:
      return fmt::format("?{}", t.meta_id());
    case Ty::Kind::Prop:
      return "Prop";
  }
  return "?";
}

}  // namespace

std::string pretty(const Expr& e) { return Printer().expr(e, kLambda); }

std::string pretty(const Formula& f) { return Printer().formula(f, kQuant); }

std::string pretty(const Term& t) {
  return std::visit([](const auto& x) { return pretty(x); }, t);
}

std::string pretty(const Ty& t, bool verbose) { return ty_string(t, verbose, false); }

}  // namespace mathdsl

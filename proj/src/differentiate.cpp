#include "mathdsl/binding.hpp"
#include "mathdsl/calculus.hpp"
#include "mathdsl/parser.hpp"

#include <fmt/format.h>

namespace mathdsl {

namespace {

constexpr std::size_t kReductionFuel = 200000;

class Reducer {
 public:
  Expr run(const Expr& e) {
    if (fuel_ == 0) fail(DiagKind::Unsupported, "reduction did not terminate", e.span());
    --fuel_;
    switch (e.kind()) {
      case Expr::Kind::App: {
        const auto& a = *e.as<expr::App>();
        const Expr fun = run(a.fun);
        const Expr arg = run(a.arg);
        return apply(fun, arg, e);
      }
      case Expr::Kind::Proj: {
        const auto& p = *e.as<expr::Proj>();
        const Expr t = run(p.tuple);
        if (const auto* tup = t.as<expr::Tuple>(); tup && p.index <= tup->items.size()) {
          return tup->items[p.index - 1];
        }
        return Expr::proj(p.index, t, e.span());
      }
      case Expr::Kind::ConstFun: {
        const Expr v = run(e.as<expr::ConstFun>()->value);
        const std::string x = fresh_name("x", all_names(v));
        return Expr::lam(x, v, std::nullopt, {}, e.span());
      }
      case Expr::Kind::Compose: {
        const auto& c = *e.as<expr::Compose>();
        const Expr outer = run(c.outer);
        const Expr inner = run(c.inner);
        NameSet avoid = all_names(outer);
        const NameSet more = all_names(inner);
        avoid.insert(more.begin(), more.end());
        const std::string x = fresh_name("x", avoid);
        const Expr xv = Expr::var(x, e.span());
        const Expr body = apply(outer, apply(inner, xv, e), e);
        return Expr::lam(x, body, std::nullopt, {}, e.span());
      }
      case Expr::Kind::TotalD: {
        const Expr f = run(e.as<expr::TotalD>()->fun);
        if (const auto* l = f.as<expr::Lam>(); l && l->pattern.empty()) {
          return run(differentiate(f));
        }
        return Expr::total_d(f, e.span());
      }
      case Expr::Kind::PartialD: {
        const auto& p = *e.as<expr::PartialD>();
        const Expr f = run(p.fun);
        if (const auto* l = f.as<expr::Lam>(); l && !l->pattern.empty()) {
          return run(partial_derivative(p.index, f));
        }
        return Expr::partial_d(p.index, f, e.span());
      }
      default: {
        auto kids = children(e);
        if (kids.empty()) return e;
        for (auto& k : kids) k = run(k);
        return with_children(e, std::move(kids));
      }
    }
  }

 private:
  // fun and arg are already reduced.
  Expr apply(const Expr& fun, const Expr& arg, const Expr& site) {
    if (const auto* l = fun.as<expr::Lam>()) return run(subst(l->body, l->param, arg));
    if (const auto* c = fun.as<expr::ConstFun>()) return c->value;
    if (const auto* c = fun.as<expr::Compose>()) {
      return run(Expr::app(c->outer, Expr::app(c->inner, arg, site.span()), site.span()));
    }
    return Expr::app(fun, arg, site.span());
  }

  std::size_t fuel_ = kReductionFuel;
};

std::optional<BigInt> integer_literal(const Expr& e) {
  if (const auto* lit = e.as<expr::Lit>(); lit && is_integer(lit->value)) {
    return boost::multiprecision::numerator(lit->value);
  }
  if (const auto* n = e.as<expr::Neg>()) {
    if (auto v = integer_literal(n->operand)) return -*v;
  }
  return std::nullopt;
}

// exp(..), a positive literal or an even integer power.
bool positive_by_construction(const Expr& e) {
  if (const auto* lit = e.as<expr::Lit>()) return lit->value > 0;
  if (const auto* p = e.as<expr::Prim>()) return p->fn == Primitive::Exp;
  if (const auto* b = e.as<expr::BinOp>(); b && b->op == BinaryOp::Pow) {
    if (auto n = integer_literal(b->rhs)) return *n != 0 && *n % 2 == 0;
  }
  return false;
}

class Deriver {
 public:
  explicit Deriver(std::string x) : x_(std::move(x)) {}

  Expr d(const Expr& e) {
    const SourceSpan& span = e.span();
    if (!free_vars(e).count(x_)) return Expr::lit(0, span);
    switch (e.kind()) {
      case Expr::Kind::Var:
        return Expr::lit(1, span);
      case Expr::Kind::Neg:
        return Expr::neg(d(e.as<expr::Neg>()->operand), span);
      case Expr::Kind::BinOp:
        return binop(*e.as<expr::BinOp>(), span);
      case Expr::Kind::Prim:
        return prim(*e.as<expr::Prim>(), span);
      case Expr::Kind::App: {
        const auto& a = *e.as<expr::App>();
        if (const auto* v = a.fun.as<expr::Var>()) {
          fail(DiagKind::NonDifferentiable,
               fmt::format("cannot differentiate through the opaque function `{}`; bind it to a "
                           "lambda first",
                           v->name),
               span);
        }
        fail(DiagKind::NonDifferentiable,
             fmt::format("cannot differentiate the application `{}` symbolically", pretty(e)),
             span);
      }
      case Expr::Kind::Lim:
        fail(DiagKind::NonDifferentiable,
             "cannot differentiate through a limit symbolically", span);
      default:
        fail(DiagKind::NonDifferentiable,
             fmt::format("cannot differentiate `{}` with respect to a real variable", pretty(e)),
             span);
    }
  }

 private:
  Expr binop(const expr::BinOp& b, const SourceSpan& span) {
    const Expr& u = b.lhs;
    const Expr& v = b.rhs;
    switch (b.op) {
      case BinaryOp::Add:
        return Expr::binop(BinaryOp::Add, d(u), d(v), span);
      case BinaryOp::Sub:
        return Expr::binop(BinaryOp::Sub, d(u), d(v), span);
      case BinaryOp::Mul:
        return Expr::binop(BinaryOp::Add, Expr::mul(d(u), v), Expr::mul(u, d(v)), span);
      case BinaryOp::Div:
        return Expr::binop(BinaryOp::Div,
                           Expr::sub(Expr::mul(d(u), v), Expr::mul(u, d(v))),
                           Expr::pow(v, Expr::lit(2)), span);
      case BinaryOp::Pow:
        return power(u, v, span);
    }
    fail(DiagKind::Unsupported, "unknown operator", span);
  }

  Expr power(const Expr& u, const Expr& v, const SourceSpan& span) {
    if (auto n = integer_literal(v)) {
      if (*n == 0) return Expr::lit(0, span);
      if (*n == 1) return d(u);
      const Rational m(*n - 1);
      return Expr::binop(BinaryOp::Mul,
                         Expr::mul(Expr::lit(Rational(*n)), Expr::pow(u, Expr::lit(m))), d(u),
                         span);
    }
    if (!positive_by_construction(u)) {
      fail(DiagKind::NonDifferentiable,
           fmt::format("`{}` needs a base that is positive by construction (exp, a positive "
                       "literal or an even power) to be rewritten through exp and ln",
                       pretty(Expr::pow(u, v))),
           span);
    }
    // u^v = exp(v ln u), so (u^v)' = u^v (v' ln u + v u' / u).
    const Expr ln_u = Expr::prim(Primitive::Ln, u);
    return Expr::binop(BinaryOp::Mul, Expr::pow(u, v),
                       Expr::add(Expr::mul(d(v), ln_u), Expr::div(Expr::mul(v, d(u)), u)), span);
  }

  Expr prim(const expr::Prim& p, const SourceSpan& span) {
    const Expr& u = p.arg;
    switch (p.fn) {
      case Primitive::Sin:
        return Expr::binop(BinaryOp::Mul, Expr::prim(Primitive::Cos, u), d(u), span);
      case Primitive::Cos:
        return Expr::binop(BinaryOp::Mul, Expr::neg(Expr::prim(Primitive::Sin, u)), d(u), span);
      case Primitive::Exp:
        return Expr::binop(BinaryOp::Mul, Expr::prim(Primitive::Exp, u), d(u), span);
      case Primitive::Ln:
        return Expr::binop(BinaryOp::Div, d(u), u, span);
      case Primitive::Sqrt:
        return Expr::binop(BinaryOp::Div, d(u),
                           Expr::mul(Expr::lit(2), Expr::prim(Primitive::Sqrt, u)), span);
      case Primitive::Abs:
        fail(DiagKind::NonDifferentiable,
             "abs is not differentiable at 0 and has no symbolic derivative", span);
    }
    fail(DiagKind::Unsupported, "unknown primitive", span);
  }

  std::string x_;
};

}  // namespace

Expr reduce(const Expr& e) { return Reducer().run(e); }

Expr differentiate(const Expr& f) {
  if (f.as<expr::ConstFun>()) return Expr::const_fun(Expr::lit(0), f.span());
  const Expr g = reduce(f);
  const auto* l = g.as<expr::Lam>();
  if (!l) {
    fail(DiagKind::NonDifferentiable,
         fmt::format("cannot differentiate `{}` symbolically: it is not a closed lambda",
                     pretty(g)),
         f.span());
  }
  if (!l->pattern.empty()) {
    fail(DiagKind::Unsupported,
         "D applies to functions of one real argument; use D[i] for a tuple argument", f.span());
  }
  Expr body = Deriver(l->param).d(l->body);
  return Expr::lam(l->param, body, l->annotation, {}, f.span());
}

Expr partial_derivative(std::size_t index, const Expr& f) {
  const Expr g = reduce(f);
  const auto* l = g.as<expr::Lam>();
  if (!l || l->pattern.empty()) {
    fail(DiagKind::Unsupported,
         fmt::format("D[{}] needs a lambda over a tuple argument", index), f.span());
  }
  const std::size_t n = l->pattern.size();
  if (index < 1 || index > n) {
    fail(DiagKind::Unsupported,
         fmt::format("D[{}] index out of range for a function of {} arguments", index, n),
         f.span());
  }
  // Fix every component except the index-th, differentiate the resulting
  // one-variable function, then put the component back.
  const std::string& s = l->param;
  const std::string y = fresh_name("y", all_names(g));
  std::vector<Expr> items;
  for (std::size_t j = 1; j <= n; ++j) {
    items.push_back(j == index ? Expr::var(y) : Expr::proj(j, Expr::var(s)));
  }
  const Expr one_var = Expr::lam(y, reduce(subst(l->body, s, Expr::tuple(items))));
  const Expr derived = differentiate(one_var);
  const Expr body = subst(derived.as<expr::Lam>()->body, y, Expr::proj(index, Expr::var(s)));
  return Expr::lam(s, body, l->annotation, l->pattern, f.span());
}

}  // namespace mathdsl

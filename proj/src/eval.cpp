#include "mathdsl/binding.hpp"
#include "mathdsl/calculus.hpp"
#include "mathdsl/numeric.hpp"
#include "mathdsl/parser.hpp"

#include <cmath>

#include <fmt/format.h>

namespace mathdsl {

namespace {

class Evaluator {
 public:
  explicit Evaluator(const NumericConfig& cfg) : cfg_(cfg) {}

  Value eval(const Expr& e, const Env& env) {
    const SourceSpan& span = e.span();
    switch (e.kind()) {
      case Expr::Kind::Var: {
        const auto& name = e.as<expr::Var>()->name;
        if (const Value* v = env.lookup(name)) return *v;
        fail(DiagKind::EvaluationError, fmt::format("`{}` has no value", name), span);
      }
      case Expr::Kind::Lit:
        return num(e.as<expr::Lit>()->approx, span);
      case Expr::Kind::Lam:
        return Value::fun(std::make_shared<const Closure>(Closure{env, e}));
      case Expr::Kind::App: {
        const auto& a = *e.as<expr::App>();
        Value f = eval(a.fun, env);
        Value x = eval(a.arg, env);
        return apply(f, x, span);
      }
      case Expr::Kind::Tuple: {
        Value::Tuple items;
        for (const auto& item : e.as<expr::Tuple>()->items) items.push_back(eval(item, env));
        return Value::tup(std::move(items));
      }
      case Expr::Kind::Proj: {
        const auto& p = *e.as<expr::Proj>();
        Value t = eval(p.tuple, env);
        if (!t.is_tup() || p.index > t.as_tup().size()) {
          fail(DiagKind::EvaluationError,
               fmt::format("proj[{}] applied to a value that is not a tuple of that size", p.index),
               span);
        }
        return t.as_tup()[p.index - 1];
      }
      case Expr::Kind::BinOp: {
        const auto& b = *e.as<expr::BinOp>();
        const double x = real(eval(b.lhs, env), b.lhs.span());
        const double y = real(eval(b.rhs, env), b.rhs.span());
        return binop(b.op, x, y, span);
      }
      case Expr::Kind::Neg:
        return num(-real(eval(e.as<expr::Neg>()->operand, env), span), span);
      case Expr::Kind::Prim: {
        const auto& p = *e.as<expr::Prim>();
        return prim(p.fn, real(eval(p.arg, env), p.arg.span()), span);
      }
      case Expr::Kind::Lim: {
        const auto& l = *e.as<expr::Lim>();
        const double a = real(eval(l.point, env), l.point.span());
        Value f = eval(l.fun, env);
        try {
          return num(numeric_limit(f, a, DomainSet::reals(), cfg_), span);
        } catch (const DiagnosticError& err) {
          Diagnostic d = err.diagnostic();
          d.span = span;
          throw DiagnosticError(std::move(d));
        }
      }
      case Expr::Kind::TotalD: {
        const Expr f = closed(e.as<expr::TotalD>()->fun, env, "D");
        return eval(with_span_tree(differentiate(f), span), Env{});
      }
      case Expr::Kind::PartialD: {
        const auto& p = *e.as<expr::PartialD>();
        const Expr f = closed(p.fun, env, fmt::format("D[{}]", p.index));
        return eval(with_span_tree(partial_derivative(p.index, f), span), Env{});
      }
      case Expr::Kind::Compose: {
        const auto& c = *e.as<expr::Compose>();
        Value outer = eval(c.outer, env);
        Value inner = eval(c.inner, env);
        static const Expr composed = parse_expr("\\x -> f (g x)");
        Env captured = Env{}.bind("f", outer).bind("g", inner);
        return Value::fun(std::make_shared<const Closure>(Closure{captured, composed}));
      }
      case Expr::Kind::ConstFun: {
        Value v = eval(e.as<expr::ConstFun>()->value, env);
        static const Expr constant = parse_expr("\\x -> v");
        return Value::fun(
            std::make_shared<const Closure>(Closure{Env{}.bind("v", std::move(v)), constant}));
      }
    }
    fail(DiagKind::EvaluationError, "unknown expression form", span);
  }

  Value apply(const Value& f, const Value& arg, const SourceSpan& site) {
    if (!f.is_fun()) fail(DiagKind::EvaluationError, "applying a value that is not a function", site);
    const Closure& c = *f.as_fun();
    const auto& l = *c.lambda.as<expr::Lam>();
    if (!l.pattern.empty() && (!arg.is_tup() || arg.as_tup().size() != l.pattern.size())) {
      fail(DiagKind::EvaluationError,
           fmt::format("function of {} arguments applied to a value of another shape",
                       l.pattern.size()),
           site);
    }
    return eval(l.body, c.env.bind(l.param, arg));
  }

 private:
  static Value num(double x, const SourceSpan& span) {
    if (!std::isfinite(x)) fail(DiagKind::EvaluationError, "result is not a finite number", span);
    return Value::num(x);
  }

  static double real(const Value& v, const SourceSpan& span) {
    if (!v.is_num()) fail(DiagKind::EvaluationError, "expected a real number", span);
    return v.as_num();
  }

  static Value binop(BinaryOp op, double x, double y, const SourceSpan& span) {
    switch (op) {
      case BinaryOp::Add: return num(x + y, span);
      case BinaryOp::Sub: return num(x - y, span);
      case BinaryOp::Mul: return num(x * y, span);
      case BinaryOp::Div:
        if (y == 0) fail(DiagKind::EvaluationError, "division by zero", span);
        return num(x / y, span);
      case BinaryOp::Pow:
        if (x == 0 && y < 0) fail(DiagKind::EvaluationError, "division by zero in a power", span);
        if (x < 0 && std::trunc(y) != y) {
          fail(DiagKind::EvaluationError, "negative base with a non-integer exponent", span);
        }
        return num(std::pow(x, y), span);
    }
    fail(DiagKind::EvaluationError, "unknown operator", span);
  }

  static Value prim(Primitive fn, double x, const SourceSpan& span) {
    switch (fn) {
      case Primitive::Sin: return num(std::sin(x), span);
      case Primitive::Cos: return num(std::cos(x), span);
      case Primitive::Exp: return num(std::exp(x), span);
      case Primitive::Ln:
        if (x <= 0) fail(DiagKind::EvaluationError, "ln of a non-positive number", span);
        return num(std::log(x), span);
      case Primitive::Sqrt:
        if (x < 0) fail(DiagKind::EvaluationError, "sqrt of a negative number", span);
        return num(std::sqrt(x), span);
      case Primitive::Abs: return num(std::fabs(x), span);
    }
    fail(DiagKind::EvaluationError, "unknown primitive", span);
  }

  static Expr closed(const Expr& f, const Env& env, const std::string& op) {
    const Expr c = close_over(f, env);
    const NameSet free = free_vars(c);
    if (!free.empty()) {
      fail(DiagKind::NonDifferentiable,
           fmt::format("{} needs a closed function, but `{}` is opaque", op, *free.begin()),
           f.span());
    }
    return c;
  }

  // Synthesized derivative nodes report errors at the D node.
  static Expr with_span_tree(const Expr& e, const SourceSpan& span) {
    auto kids = children(e);
    for (auto& k : kids) k = with_span_tree(k, span);
    return (kids.empty() ? e : with_children(e, std::move(kids))).with_span(span);
  }

  const NumericConfig& cfg_;
};

}  // namespace

Value eval(const Expr& e, const Env& env, const NumericConfig& cfg) {
  return Evaluator(cfg).eval(e, env);
}

Value apply(const Value& f, const Value& arg, const NumericConfig& cfg, const SourceSpan& site) {
  return Evaluator(cfg).apply(f, arg, site);
}

double apply_real(const Value& f, double x, const NumericConfig& cfg) {
  Value v = apply(f, Value::num(x), cfg);
  if (!v.is_num()) fail(DiagKind::EvaluationError, "function returned a value that is not real");
  return v.as_num();
}

Expr quote(const Value& v) {
  if (v.is_num()) return Expr::lit(rational_from_double(v.as_num()));
  if (v.is_tup()) {
    std::vector<Expr> items;
    for (const auto& item : v.as_tup()) items.push_back(quote(item));
    return Expr::tuple(std::move(items));
  }
  return close_over(v.as_fun()->lambda, v.as_fun()->env);
}

Expr close_over(const Expr& e, const Env& env) {
  Expr out = e;
  for (const auto& name : free_vars(e)) {
    if (const Value* v = env.lookup(name)) out = subst(out, name, quote(*v));
  }
  return out;
}

double numeric_derivative(const Value& f, double x, const NumericConfig& cfg) {
  const double h = cfg.fd_step;
  return (apply_real(f, x + h, cfg) - apply_real(f, x - h, cfg)) / (2 * h);
}

}  // namespace mathdsl

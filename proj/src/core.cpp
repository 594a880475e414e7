#include "mathdsl/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace mathdsl {

SourceSpan SourceSpan::merge(const SourceSpan& a, const SourceSpan& b) {
  if (!a.valid()) return b;
  if (!b.valid()) return a;
  SourceSpan out = a;
  if (b.start < a.start) {
    out.start = b.start;
    out.line = b.line;
    out.column = b.column;
  }
  if (b.end > a.end) {
    out.end = b.end;
    out.end_line = b.end_line;
    out.end_column = b.end_column;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ty

struct Ty::Node {
  Kind kind;
  std::string label;
  std::vector<Ty> items;  // Prod components, or {dom, cod} for Arrow
  int meta = 0;
};

Ty Ty::real(std::string label) {
  return Ty(std::make_shared<const Node>(Node{Kind::Real, std::move(label), {}, 0}));
}

Ty Ty::prod(std::vector<Ty> components) {
  if (components.size() < 2) throw std::invalid_argument("product type needs arity >= 2");
  return Ty(std::make_shared<const Node>(Node{Kind::Prod, {}, std::move(components), 0}));
}

Ty Ty::arrow(Ty dom, Ty cod) {
  return Ty(std::make_shared<const Node>(
      Node{Kind::Arrow, {}, {std::move(dom), std::move(cod)}, 0}));
}

Ty Ty::meta(int id) { return Ty(std::make_shared<const Node>(Node{Kind::Meta, {}, {}, id})); }

Ty Ty::prop() { return Ty(std::make_shared<const Node>(Node{Kind::Prop, {}, {}, 0})); }

Ty::Kind Ty::kind() const { return node_->kind; }
const std::string& Ty::label() const { return node_->label; }
const std::vector<Ty>& Ty::components() const { return node_->items; }
const Ty& Ty::dom() const { return node_->items.at(0); }
const Ty& Ty::cod() const { return node_->items.at(1); }
int Ty::meta_id() const { return node_->meta; }

bool Ty::has_meta() const {
  if (kind() == Kind::Meta) return true;
  return std::any_of(node_->items.begin(), node_->items.end(),
                     [](const Ty& t) { return t.has_meta(); });
}

Ty Ty::without_labels() const {
  switch (kind()) {
    case Kind::Real: return real();
    case Kind::Prod: {
      std::vector<Ty> items;
      for (const auto& c : components()) items.push_back(c.without_labels());
      return prod(std::move(items));
    }
    case Kind::Arrow: return arrow(dom().without_labels(), cod().without_labels());
    default: return *this;
  }
}

bool operator==(const Ty& a, const Ty& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  if (a.kind() == Ty::Kind::Meta) return a.meta_id() == b.meta_id();
  const auto& x = a.node_->items;
  const auto& y = b.node_->items;
  return x.size() == y.size() && std::equal(x.begin(), x.end(), y.begin());
}

// ---------------------------------------------------------------------------
// Names

std::string_view to_string(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Pow: return "^";
  }
  return "?";
}

std::string_view to_string(Primitive fn) {
  switch (fn) {
    case Primitive::Sin: return "sin";
    case Primitive::Cos: return "cos";
    case Primitive::Exp: return "exp";
    case Primitive::Ln: return "ln";
    case Primitive::Sqrt: return "sqrt";
    case Primitive::Abs: return "abs";
  }
  return "?";
}

std::optional<Primitive> primitive_from_name(std::string_view name) {
  if (name == "sin") return Primitive::Sin;
  if (name == "cos") return Primitive::Cos;
  if (name == "exp") return Primitive::Exp;
  if (name == "ln") return Primitive::Ln;
  if (name == "sqrt") return Primitive::Sqrt;
  if (name == "abs") return Primitive::Abs;
  return std::nullopt;
}

std::string_view to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "/=";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Expr

Expr Expr::make(auto&& payload, SourceSpan span) {
  return Expr(std::make_shared<const ExprNode>(
      ExprNode{ExprNode::Payload(std::forward<decltype(payload)>(payload)), span}));
}

Expr Expr::var(std::string name, SourceSpan span) {
  return make(expr::Var{std::move(name)}, span);
}

Expr Expr::lit(Rational value, SourceSpan span) {
  const double approx = rational_to_double(value);
  return make(expr::Lit{std::move(value), approx}, span);
}

Expr Expr::lit(long long value, SourceSpan span) { return lit(Rational(value), span); }

Expr Expr::lam(std::string param, Expr body, std::optional<Ty> annotation,
               std::vector<std::string> pattern, SourceSpan span) {
  if (pattern.size() == 1) throw std::invalid_argument("tuple pattern needs arity >= 2");
  return make(expr::Lam{std::move(param), std::move(annotation), std::move(pattern),
                        std::move(body)},
              span);
}

Expr Expr::app(Expr fun, Expr arg, SourceSpan span) {
  return make(expr::App{std::move(fun), std::move(arg)}, span);
}

Expr Expr::tuple(std::vector<Expr> items, SourceSpan span) {
  if (items.size() < 2) throw std::invalid_argument("tuple needs arity >= 2");
  return make(expr::Tuple{std::move(items)}, span);
}

Expr Expr::proj(std::size_t index, Expr tuple, SourceSpan span) {
  if (index < 1) throw std::invalid_argument("projection index is 1-based");
  return make(expr::Proj{index, std::move(tuple)}, span);
}

Expr Expr::binop(BinaryOp op, Expr lhs, Expr rhs, SourceSpan span) {
  return make(expr::BinOp{op, std::move(lhs), std::move(rhs)}, span);
}

Expr Expr::neg(Expr operand, SourceSpan span) {
  return make(expr::Neg{std::move(operand)}, span);
}

Expr Expr::prim(Primitive fn, Expr arg, SourceSpan span) {
  return make(expr::Prim{fn, std::move(arg)}, span);
}

Expr Expr::lim(Expr point, Expr fun, SourceSpan span) {
  return make(expr::Lim{std::move(point), std::move(fun)}, span);
}

Expr Expr::total_d(Expr fun, SourceSpan span) {
  return make(expr::TotalD{std::move(fun)}, span);
}

Expr Expr::partial_d(std::size_t index, Expr fun, SourceSpan span) {
  if (index < 1) throw std::invalid_argument("partial derivative index is 1-based");
  return make(expr::PartialD{index, std::move(fun)}, span);
}

Expr Expr::compose(Expr outer, Expr inner, SourceSpan span) {
  return make(expr::Compose{std::move(outer), std::move(inner)}, span);
}

Expr Expr::const_fun(Expr value, SourceSpan span) {
  return make(expr::ConstFun{std::move(value)}, span);
}

Expr::Kind Expr::kind() const { return static_cast<Kind>(node_->payload.index()); }

const SourceSpan& Expr::span() const { return node_->span; }

Expr Expr::with_span(SourceSpan span) const {
  return Expr(std::make_shared<const ExprNode>(ExprNode{node_->payload, span}));
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool same_annotation(const std::optional<Ty>& a, const std::optional<Ty>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || *a == *b;
}

}  // namespace

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  return std::visit(
      overloaded{
          [&](const expr::Var& x) { return x.name == b.as<expr::Var>()->name; },
          [&](const expr::Lit& x) { return x.value == b.as<expr::Lit>()->value; },
          [&](const expr::Lam& x) {
            const auto& y = *b.as<expr::Lam>();
            return x.param == y.param && x.pattern == y.pattern &&
                   same_annotation(x.annotation, y.annotation) && x.body == y.body;
          },
          [&](const expr::App& x) {
            const auto& y = *b.as<expr::App>();
            return x.fun == y.fun && x.arg == y.arg;
          },
          [&](const expr::Tuple& x) { return x.items == b.as<expr::Tuple>()->items; },
          [&](const expr::Proj& x) {
            const auto& y = *b.as<expr::Proj>();
            return x.index == y.index && x.tuple == y.tuple;
          },
          [&](const expr::BinOp& x) {
            const auto& y = *b.as<expr::BinOp>();
            return x.op == y.op && x.lhs == y.lhs && x.rhs == y.rhs;
          },
          [&](const expr::Neg& x) { return x.operand == b.as<expr::Neg>()->operand; },
          [&](const expr::Prim& x) {
            const auto& y = *b.as<expr::Prim>();
            return x.fn == y.fn && x.arg == y.arg;
          },
          [&](const expr::Lim& x) {
            const auto& y = *b.as<expr::Lim>();
            return x.point == y.point && x.fun == y.fun;
          },
          [&](const expr::TotalD& x) { return x.fun == b.as<expr::TotalD>()->fun; },
          [&](const expr::PartialD& x) {
            const auto& y = *b.as<expr::PartialD>();
            return x.index == y.index && x.fun == y.fun;
          },
          [&](const expr::Compose& x) {
            const auto& y = *b.as<expr::Compose>();
            return x.outer == y.outer && x.inner == y.inner;
          },
          [&](const expr::ConstFun& x) { return x.value == b.as<expr::ConstFun>()->value; },
      },
      a.node_->payload);
}

std::vector<Expr> children(const Expr& e) {
  return std::visit(
      overloaded{
          [](const expr::Var&) { return std::vector<Expr>{}; },
          [](const expr::Lit&) { return std::vector<Expr>{}; },
          [](const expr::Lam& x) { return std::vector<Expr>{x.body}; },
          [](const expr::App& x) { return std::vector<Expr>{x.fun, x.arg}; },
          [](const expr::Tuple& x) { return x.items; },
          [](const expr::Proj& x) { return std::vector<Expr>{x.tuple}; },
          [](const expr::BinOp& x) { return std::vector<Expr>{x.lhs, x.rhs}; },
          [](const expr::Neg& x) { return std::vector<Expr>{x.operand}; },
          [](const expr::Prim& x) { return std::vector<Expr>{x.arg}; },
          [](const expr::Lim& x) { return std::vector<Expr>{x.point, x.fun}; },
          [](const expr::TotalD& x) { return std::vector<Expr>{x.fun}; },
          [](const expr::PartialD& x) { return std::vector<Expr>{x.fun}; },
          [](const expr::Compose& x) { return std::vector<Expr>{x.outer, x.inner}; },
          [](const expr::ConstFun& x) { return std::vector<Expr>{x.value}; },
      },
      e.node().payload);
}

Expr with_children(const Expr& e, std::vector<Expr> k) {
  const auto& s = e.span();
  auto at = [&](std::size_t i) { return k.at(i); };
  switch (e.kind()) {
    case Expr::Kind::Var:
    case Expr::Kind::Lit: return e;
    case Expr::Kind::Lam: {
      const auto& l = *e.as<expr::Lam>();
      return Expr::lam(l.param, at(0), l.annotation, l.pattern, s);
    }
    case Expr::Kind::App: return Expr::app(at(0), at(1), s);
    case Expr::Kind::Tuple: return Expr::tuple(std::move(k), s);
    case Expr::Kind::Proj: return Expr::proj(e.as<expr::Proj>()->index, at(0), s);
    case Expr::Kind::BinOp: return Expr::binop(e.as<expr::BinOp>()->op, at(0), at(1), s);
    case Expr::Kind::Neg: return Expr::neg(at(0), s);
    case Expr::Kind::Prim: return Expr::prim(e.as<expr::Prim>()->fn, at(0), s);
    case Expr::Kind::Lim: return Expr::lim(at(0), at(1), s);
    case Expr::Kind::TotalD: return Expr::total_d(at(0), s);
    case Expr::Kind::PartialD: return Expr::partial_d(e.as<expr::PartialD>()->index, at(0), s);
    case Expr::Kind::Compose: return Expr::compose(at(0), at(1), s);
    case Expr::Kind::ConstFun: return Expr::const_fun(at(0), s);
  }
  return e;
}

Expr mk_const_fun(Expr value) { return Expr::const_fun(std::move(value)); }

std::size_t expr_size(const Expr& e) {
  std::size_t n = 1;
  for (const auto& c : children(e)) n += expr_size(c);
  return n;
}

// ---------------------------------------------------------------------------
// Formula

Formula Formula::make(auto&& payload, SourceSpan span) {
  return Formula(std::make_shared<const FormulaNode>(
      FormulaNode{FormulaNode::Payload(std::forward<decltype(payload)>(payload)), span}));
}

Formula Formula::quant(Quantifier q, std::string name, std::optional<BinderBound> bound,
                       Formula body, SourceSpan span) {
  return make(formula::Quant{q, std::move(name), std::move(bound), std::move(body)}, span);
}

Formula Formula::forall(std::string name, Formula body, std::optional<BinderBound> bound,
                        SourceSpan span) {
  return quant(Quantifier::Forall, std::move(name), std::move(bound), std::move(body), span);
}

Formula Formula::exists(std::string name, Formula body, std::optional<BinderBound> bound,
                        SourceSpan span) {
  return quant(Quantifier::Exists, std::move(name), std::move(bound), std::move(body), span);
}

Formula Formula::implies(Formula p, Formula q, SourceSpan span) {
  return make(formula::Implies{std::move(p), std::move(q)}, span);
}

Formula Formula::conj(Formula p, Formula q, SourceSpan span) {
  return make(formula::And{std::move(p), std::move(q)}, span);
}

Formula Formula::negation(Formula p, SourceSpan span) {
  return make(formula::Not{std::move(p)}, span);
}

Formula Formula::truth(bool value, SourceSpan span) { return make(formula::Truth{value}, span); }

Formula Formula::cmp(CmpOp op, Expr lhs, Expr rhs, SourceSpan span) {
  return make(formula::Cmp{op, std::move(lhs), std::move(rhs)}, span);
}

Formula Formula::in_dom(Expr point, Expr fun, SourceSpan span) {
  return make(formula::InDom{std::move(point), std::move(fun)}, span);
}

Formula Formula::has_limit(Expr fun, Expr point, Expr limit, SourceSpan span) {
  return make(formula::HasLimit{std::move(fun), std::move(point), std::move(limit)}, span);
}

Formula Formula::fun_eq(Expr lhs, Expr rhs, SourceSpan span) {
  return make(formula::FunEq{std::move(lhs), std::move(rhs)}, span);
}

Formula Formula::lagrange_eq(Expr lagrangian, Expr path, SourceSpan span) {
  return make(formula::LagrangeEq{std::move(lagrangian), std::move(path)}, span);
}

Formula::Kind Formula::kind() const { return static_cast<Kind>(node_->payload.index()); }

const SourceSpan& Formula::span() const { return node_->span; }

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  return std::visit(
      overloaded{
          [&](const formula::Quant& x) {
            const auto& y = *b.as<formula::Quant>();
            if (x.quantifier != y.quantifier || x.name != y.name) return false;
            if (x.bound.has_value() != y.bound.has_value()) return false;
            if (x.bound && (x.bound->op != y.bound->op || !(x.bound->value == y.bound->value)))
              return false;
            return x.body == y.body;
          },
          [&](const formula::Implies& x) {
            const auto& y = *b.as<formula::Implies>();
            return x.premise == y.premise && x.conclusion == y.conclusion;
          },
          [&](const formula::And& x) {
            const auto& y = *b.as<formula::And>();
            return x.lhs == y.lhs && x.rhs == y.rhs;
          },
          [&](const formula::Not& x) { return x.operand == b.as<formula::Not>()->operand; },
          [&](const formula::Truth& x) { return x.value == b.as<formula::Truth>()->value; },
          [&](const formula::Cmp& x) {
            const auto& y = *b.as<formula::Cmp>();
            return x.op == y.op && x.lhs == y.lhs && x.rhs == y.rhs;
          },
          [&](const formula::InDom& x) {
            const auto& y = *b.as<formula::InDom>();
            return x.point == y.point && x.fun == y.fun;
          },
          [&](const formula::HasLimit& x) {
            const auto& y = *b.as<formula::HasLimit>();
            return x.fun == y.fun && x.point == y.point && x.limit == y.limit;
          },
          [&](const formula::FunEq& x) {
            const auto& y = *b.as<formula::FunEq>();
            return x.lhs == y.lhs && x.rhs == y.rhs;
          },
          [&](const formula::LagrangeEq& x) {
            const auto& y = *b.as<formula::LagrangeEq>();
            return x.lagrangian == y.lagrangian && x.path == y.path;
          },
      },
      a.node_->payload);
}

std::vector<Formula> subformulas(const Formula& f) {
  if (auto q = f.as<formula::Quant>()) return {q->body};
  if (auto i = f.as<formula::Implies>()) return {i->premise, i->conclusion};
  if (auto a = f.as<formula::And>()) return {a->lhs, a->rhs};
  if (auto n = f.as<formula::Not>()) return {n->operand};
  return {};
}

std::vector<Expr> embedded_exprs(const Formula& f) {
  if (auto q = f.as<formula::Quant>()) {
    if (q->bound) return {q->bound->value};
    return {};
  }
  if (auto c = f.as<formula::Cmp>()) return {c->lhs, c->rhs};
  if (auto d = f.as<formula::InDom>()) return {d->point, d->fun};
  if (auto h = f.as<formula::HasLimit>()) return {h->fun, h->point, h->limit};
  if (auto e = f.as<formula::FunEq>()) return {e->lhs, e->rhs};
  if (auto l = f.as<formula::LagrangeEq>()) return {l->lagrangian, l->path};
  return {};
}

Formula with_parts(const Formula& f, std::vector<Formula> subs, std::vector<Expr> ex) {
  const auto& s = f.span();
  switch (f.kind()) {
    case Formula::Kind::Quant: {
      const auto& q = *f.as<formula::Quant>();
      std::optional<BinderBound> bound;
      if (q.bound) bound = BinderBound{q.bound->op, ex.at(0)};
      return Formula::quant(q.quantifier, q.name, std::move(bound), subs.at(0), s);
    }
    case Formula::Kind::Implies: return Formula::implies(subs.at(0), subs.at(1), s);
    case Formula::Kind::And: return Formula::conj(subs.at(0), subs.at(1), s);
    case Formula::Kind::Not: return Formula::negation(subs.at(0), s);
    case Formula::Kind::Truth: return f;
    case Formula::Kind::Cmp: return Formula::cmp(f.as<formula::Cmp>()->op, ex.at(0), ex.at(1), s);
    case Formula::Kind::InDom: return Formula::in_dom(ex.at(0), ex.at(1), s);
    case Formula::Kind::HasLimit: return Formula::has_limit(ex.at(0), ex.at(1), ex.at(2), s);
    case Formula::Kind::FunEq: return Formula::fun_eq(ex.at(0), ex.at(1), s);
    case Formula::Kind::LagrangeEq: return Formula::lagrange_eq(ex.at(0), ex.at(1), s);
  }
  return f;
}

// ---------------------------------------------------------------------------
// Values

Value Value::num(double x) {
  if (!std::isfinite(x)) throw std::domain_error("non-finite numeric value");
  Value v;
  v.data_ = x;
  return v;
}

Value Value::tup(Tuple items) {
  Value v;
  v.data_ = std::move(items);
  return v;
}

Value Value::fun(Fun closure) {
  Value v;
  v.data_ = std::move(closure);
  return v;
}

Env Env::bind(std::string name, Value value) const {
  return Env(std::make_shared<const Frame>(Frame{std::move(name), std::move(value), head_}));
}

const Value* Env::lookup(std::string_view name) const {
  for (const Frame* f = head_.get(); f != nullptr; f = f->next.get()) {
    if (f->name == name) return &f->value;
  }
  return nullptr;
}

std::vector<std::string> Env::names() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const Frame* f = head_.get(); f != nullptr; f = f->next.get()) {
    if (seen.insert(f->name).second) out.push_back(f->name);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Diagnostics

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::Error: return "error";
    case Severity::Warning: return "warning";
    case Severity::Note: return "note";
  }
  return "?";
}

std::string_view to_string(DiagKind k) {
  switch (k) {
    case DiagKind::FreeVariable: return "FreeVariable";
    case DiagKind::ImplicitBinder: return "ImplicitBinder";
    case DiagKind::TypeMismatch: return "TypeMismatch";
    case DiagKind::NotAVariable: return "NotAVariable";
    case DiagKind::NonConvergence: return "NonConvergence";
    case DiagKind::ResidualExceeded: return "ResidualExceeded";
    case DiagKind::SyntaxError: return "SyntaxError";
    case DiagKind::Ambiguous: return "Ambiguous";
    case DiagKind::OccursCheck: return "OccursCheck";
    case DiagKind::NonDifferentiable: return "NonDifferentiable";
    case DiagKind::EvaluationError: return "EvaluationError";
    case DiagKind::Unsupported: return "Unsupported";
    case DiagKind::UnknownName: return "UnknownName";
  }
  return "?";
}

Diagnostic make_diagnostic(Severity severity, DiagKind kind, std::string message,
                           SourceSpan span) {
  Diagnostic d;
  d.severity = severity;
  d.kind = kind;
  d.message = std::move(message);
  d.span = span;
  return d;
}

void fail(DiagKind kind, std::string message, SourceSpan span) {
  throw DiagnosticError(make_diagnostic(Severity::Error, kind, std::move(message), span));
}

}  // namespace mathdsl

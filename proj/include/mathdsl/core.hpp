#pragma once

// Shared syntax, types, values, domains and diagnostics.

#include "mathdsl/rational.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mathdsl {

// Byte offsets plus 1-based line/column of both ends. A default-constructed
// span (line == 0) marks synthesized nodes.
struct SourceSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::uint32_t line = 0;
  std::uint32_t column = 0;
  std::uint32_t end_line = 0;
  std::uint32_t end_column = 0;

  bool valid() const { return line != 0; }
  bool contains(const SourceSpan& inner) const {
    return start <= inner.start && inner.end <= end;
  }
  // Smallest span covering both (invalid spans are ignored).
  static SourceSpan merge(const SourceSpan& a, const SourceSpan& b);
  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

// ---------------------------------------------------------------------------
// Types

class Ty {
 public:
  enum class Kind { Real, Prod, Arrow, Meta, Prop };

  static Ty real(std::string label = {});
  static Ty prod(std::vector<Ty> components);
  static Ty arrow(Ty dom, Ty cod);
  static Ty meta(int id);
  static Ty prop();

  Kind kind() const;
  bool is(Kind k) const { return kind() == k; }

  // Real: display label ("" when unlabeled).
  const std::string& label() const;
  // Prod: components (arity >= 2).
  const std::vector<Ty>& components() const;
  // Arrow
  const Ty& dom() const;
  const Ty& cod() const;
  // Meta
  int meta_id() const;

  bool has_meta() const;
  Ty without_labels() const;

  // Structural equality; labels are ignored.
  friend bool operator==(const Ty& a, const Ty& b);

 private:
  struct Node;
  explicit Ty(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

// ---------------------------------------------------------------------------
// Expressions

enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class Primitive { Sin, Cos, Exp, Ln, Sqrt, Abs };

std::string_view to_string(BinaryOp op);
std::string_view to_string(Primitive fn);
std::optional<Primitive> primitive_from_name(std::string_view name);

struct ExprNode;

class Expr {
 public:
  enum class Kind {
    Var, Lit, Lam, App, Tuple, Proj, BinOp, Neg, Prim, Lim, TotalD, PartialD,
    Compose, ConstFun
  };

  static Expr var(std::string name, SourceSpan span = {});
  static Expr lit(Rational value, SourceSpan span = {});
  static Expr lit(long long value, SourceSpan span = {});
  // `pattern` lists the component names of a tuple parameter
  // (\(a, b, c) -> ...); the body reaches them through Proj on `param`.
  static Expr lam(std::string param, Expr body, std::optional<Ty> annotation = {},
                  std::vector<std::string> pattern = {}, SourceSpan span = {});
  static Expr app(Expr fun, Expr arg, SourceSpan span = {});
  static Expr tuple(std::vector<Expr> items, SourceSpan span = {});
  static Expr proj(std::size_t index, Expr tuple, SourceSpan span = {});
  static Expr binop(BinaryOp op, Expr lhs, Expr rhs, SourceSpan span = {});
  static Expr neg(Expr operand, SourceSpan span = {});
  static Expr prim(Primitive fn, Expr arg, SourceSpan span = {});
  static Expr lim(Expr point, Expr fun, SourceSpan span = {});
  static Expr total_d(Expr fun, SourceSpan span = {});
  static Expr partial_d(std::size_t index, Expr fun, SourceSpan span = {});
  static Expr compose(Expr outer, Expr inner, SourceSpan span = {});
  static Expr const_fun(Expr value, SourceSpan span = {});

  static Expr add(Expr a, Expr b) { return binop(BinaryOp::Add, std::move(a), std::move(b)); }
  static Expr sub(Expr a, Expr b) { return binop(BinaryOp::Sub, std::move(a), std::move(b)); }
  static Expr mul(Expr a, Expr b) { return binop(BinaryOp::Mul, std::move(a), std::move(b)); }
  static Expr div(Expr a, Expr b) { return binop(BinaryOp::Div, std::move(a), std::move(b)); }
  static Expr pow(Expr a, Expr b) { return binop(BinaryOp::Pow, std::move(a), std::move(b)); }

  Kind kind() const;
  const ExprNode& node() const { return *node_; }
  const SourceSpan& span() const;
  Expr with_span(SourceSpan span) const;

  template <class T>
  const T* as() const;

  // Structural equality: names must match exactly, spans are ignored.
  friend bool operator==(const Expr& a, const Expr& b);

 private:
  explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}
  static Expr make(auto&& payload, SourceSpan span);
  std::shared_ptr<const ExprNode> node_;
};

namespace expr {
struct Var { std::string name; };
struct Lit { Rational value; double approx; };
struct Lam {
  std::string param;
  std::optional<Ty> annotation;
  std::vector<std::string> pattern;
  Expr body;
  std::size_t arity() const { return pattern.size(); }
};
struct App { Expr fun; Expr arg; };
struct Tuple { std::vector<Expr> items; };
struct Proj { std::size_t index; Expr tuple; };
struct BinOp { BinaryOp op; Expr lhs; Expr rhs; };
struct Neg { Expr operand; };
struct Prim { Primitive fn; Expr arg; };
struct Lim { Expr point; Expr fun; };
struct TotalD { Expr fun; };
struct PartialD { std::size_t index; Expr fun; };
struct Compose { Expr outer; Expr inner; };
struct ConstFun { Expr value; };
}  // namespace expr

struct ExprNode {
  using Payload = std::variant<expr::Var, expr::Lit, expr::Lam, expr::App, expr::Tuple,
                               expr::Proj, expr::BinOp, expr::Neg, expr::Prim, expr::Lim,
                               expr::TotalD, expr::PartialD, expr::Compose,
                               expr::ConstFun>;
  Payload payload;
  SourceSpan span;
};

template <class T>
const T* Expr::as() const {
  return std::get_if<T>(&node_->payload);
}

// Immediate subexpressions in source order.
std::vector<Expr> children(const Expr& e);

// Same node (payload and span) with its immediate subexpressions replaced;
// `kids` must match children(e) in count.
Expr with_children(const Expr& e, std::vector<Expr> kids);

// The constant function `const v`.
Expr mk_const_fun(Expr value);

// Node count (>= 1). Lambda annotations are not counted.
std::size_t expr_size(const Expr& e);

// ---------------------------------------------------------------------------
// Formulas

enum class CmpOp { Lt, Le, Gt, Ge, Eq, Ne };
enum class Quantifier { Forall, Exists };

std::string_view to_string(CmpOp op);

struct FormulaNode;

// Constraint attached to a quantified name, as in `forall eps > 0`.
struct BinderBound {
  CmpOp op;
  Expr value;
};

class Formula {
 public:
  enum class Kind { Quant, Implies, And, Not, Truth, Cmp, InDom, HasLimit, FunEq, LagrangeEq };

  static Formula forall(std::string name, Formula body, std::optional<BinderBound> bound = {},
                        SourceSpan span = {});
  static Formula exists(std::string name, Formula body, std::optional<BinderBound> bound = {},
                        SourceSpan span = {});
  static Formula quant(Quantifier q, std::string name, std::optional<BinderBound> bound,
                       Formula body, SourceSpan span = {});
  static Formula implies(Formula p, Formula q, SourceSpan span = {});
  static Formula conj(Formula p, Formula q, SourceSpan span = {});
  static Formula negation(Formula p, SourceSpan span = {});
  static Formula truth(bool value, SourceSpan span = {});
  static Formula cmp(CmpOp op, Expr lhs, Expr rhs, SourceSpan span = {});
  static Formula in_dom(Expr point, Expr fun, SourceSpan span = {});
  static Formula has_limit(Expr fun, Expr point, Expr limit, SourceSpan span = {});
  static Formula fun_eq(Expr lhs, Expr rhs, SourceSpan span = {});
  static Formula lagrange_eq(Expr lagrangian, Expr path, SourceSpan span = {});

  Kind kind() const;
  const FormulaNode& node() const { return *node_; }
  const SourceSpan& span() const;

  template <class T>
  const T* as() const;

  friend bool operator==(const Formula& a, const Formula& b);

 private:
  explicit Formula(std::shared_ptr<const FormulaNode> node) : node_(std::move(node)) {}
  static Formula make(auto&& payload, SourceSpan span);
  std::shared_ptr<const FormulaNode> node_;
};

namespace formula {
struct Quant {
  Quantifier quantifier;
  std::string name;
  std::optional<BinderBound> bound;
  Formula body;
};
struct Implies { Formula premise; Formula conclusion; };
struct And { Formula lhs; Formula rhs; };
struct Not { Formula operand; };
struct Truth { bool value; };
struct Cmp { CmpOp op; Expr lhs; Expr rhs; };
struct InDom { Expr point; Expr fun; };
struct HasLimit { Expr fun; Expr point; Expr limit; };
struct FunEq { Expr lhs; Expr rhs; };
struct LagrangeEq { Expr lagrangian; Expr path; };
}  // namespace formula

struct FormulaNode {
  using Payload = std::variant<formula::Quant, formula::Implies, formula::And, formula::Not,
                               formula::Truth, formula::Cmp, formula::InDom,
                               formula::HasLimit, formula::FunEq, formula::LagrangeEq>;
  Payload payload;
  SourceSpan span;
};

template <class T>
const T* Formula::as() const {
  return std::get_if<T>(&node_->payload);
}

// Subformulas and the expressions directly embedded in a formula node.
std::vector<Formula> subformulas(const Formula& f);
std::vector<Expr> embedded_exprs(const Formula& f);

// Rebuilds a formula node from new subformulas and embedded expressions,
// matching subformulas(f) and embedded_exprs(f) in count.
Formula with_parts(const Formula& f, std::vector<Formula> subs, std::vector<Expr> exprs);

using Term = std::variant<Expr, Formula>;

// ---------------------------------------------------------------------------
// Runtime values

class Value;
class Env;
struct Closure;

class Value {
 public:
  using Tuple = std::vector<Value>;
  using Fun = std::shared_ptr<const Closure>;

  // Throws std::domain_error on NaN or infinity.
  static Value num(double x);
  static Value tup(Tuple items);
  static Value fun(Fun closure);

  bool is_num() const { return std::holds_alternative<double>(data_); }
  bool is_tup() const { return std::holds_alternative<Tuple>(data_); }
  bool is_fun() const { return std::holds_alternative<Fun>(data_); }

  double as_num() const { return std::get<double>(data_); }
  const Tuple& as_tup() const { return std::get<Tuple>(data_); }
  const Fun& as_fun() const { return std::get<Fun>(data_); }

 private:
  std::variant<double, Tuple, Fun> data_;
};

// Persistent name -> value environment.
class Env {
 public:
  Env() = default;
  Env bind(std::string name, Value value) const;
  const Value* lookup(std::string_view name) const;
  // Bound names, innermost first, without duplicates.
  std::vector<std::string> names() const;

 private:
  struct Frame;
  explicit Env(std::shared_ptr<const Frame> head) : head_(std::move(head)) {}
  std::shared_ptr<const Frame> head_;
};

struct Env::Frame {
  std::string name;
  Value value;
  std::shared_ptr<const Frame> next;
};

struct Closure {
  Env env;
  Expr lambda;  // always a Lam node
};

// ---------------------------------------------------------------------------
// Domains

struct Interval {
  double lo;
  double hi;
  bool lo_closed;
  bool hi_closed;
  friend bool operator==(const Interval&, const Interval&) = default;
};

// Finite union of intervals over the extended reals minus finitely many
// punctures. Constructors normalize: intervals sorted, disjoint, non-empty;
// every puncture lies inside some interval.
class DomainSet {
 public:
  DomainSet() = default;  // empty set
  DomainSet(std::vector<Interval> intervals, std::vector<double> punctures);

  static DomainSet reals();
  static DomainSet reals_except(std::vector<double> punctures);
  static DomainSet interval(double lo, double hi, bool lo_closed, bool hi_closed);

  // Syntax: `R`, `R\{1,2}`, `(0,1]`, `[0,1) U (2,inf)`, `(0,1]\{0.5}`.
  // Throws DiagnosticError on malformed input.
  static DomainSet parse(std::string_view text);

  const std::vector<Interval>& intervals() const { return intervals_; }
  const std::vector<double>& punctures() const { return punctures_; }

  bool contains(double x) const;
  bool empty() const { return intervals_.empty(); }
  DomainSet normalized() const { return DomainSet(intervals_, punctures_); }
  std::string to_string() const;

  friend bool operator==(const DomainSet&, const DomainSet&) = default;

 private:
  std::vector<Interval> intervals_;
  std::vector<double> punctures_;
};

bool in_domain(double x, const DomainSet& dom);

// ---------------------------------------------------------------------------
// Diagnostics

enum class Severity { Error, Warning, Note };

enum class DiagKind {
  FreeVariable,
  ImplicitBinder,
  TypeMismatch,
  NotAVariable,
  NonConvergence,
  ResidualExceeded,
  SyntaxError,
  Ambiguous,
  OccursCheck,
  NonDifferentiable,
  EvaluationError,
  Unsupported,
  UnknownName,
};

std::string_view to_string(Severity s);
std::string_view to_string(DiagKind k);

struct Diagnostic {
  Severity severity = Severity::Error;
  DiagKind kind = DiagKind::SyntaxError;
  std::string message;
  SourceSpan span;
  std::optional<Term> suggestion;
  // TypeMismatch only; always fully resolved.
  std::optional<Ty> expected;
  std::optional<Ty> found;
};

Diagnostic make_diagnostic(Severity severity, DiagKind kind, std::string message,
                           SourceSpan span = {});

class DiagnosticError : public std::runtime_error {
 public:
  explicit DiagnosticError(Diagnostic diag)
      : std::runtime_error(diag.message), diag_(std::move(diag)) {}
  const Diagnostic& diagnostic() const { return diag_; }

 private:
  Diagnostic diag_;
};

[[noreturn]] void fail(DiagKind kind, std::string message, SourceSpan span = {});

}  // namespace mathdsl

#pragma once

// Symbolic differentiation, reduction, polynomial normal forms and
// function equality.

#include "mathdsl/core.hpp"

#include <map>
#include <string>
#include <vector>

namespace mathdsl {

struct NumericConfig;

// Beta-normal form, with Proj of tuples, const, compose and D/D[i] of
// lambdas resolved. Throws DiagnosticError when differentiation of a lambda
// fails or reduction does not terminate.
Expr reduce(const Expr& e);

// Df as a lambda. f must reduce to a one-argument lambda whose body uses
// only the differentiable primitives; the result is not simplified.
// Errors: NonDifferentiable (abs, unsafe powers, opaque functions),
// TypeMismatch-like misuse is reported as Unsupported.
Expr differentiate(const Expr& f);

// D[i] f for f reducing to a lambda over an n-tuple, 1 <= i <= n.
Expr partial_derivative(std::size_t index, const Expr& f);

// ---------------------------------------------------------------------------
// Normal forms

// Atomic factor of a monomial. Variables come first, then sin, cos, exp,
// then everything outside the polynomial fragment.
struct Generator {
  enum class Kind { Var, Sin, Cos, Exp, Inv, Ln, Sqrt, Abs, Pow, Opaque };
  Kind kind;
  std::string key;  // canonical text, the tiebreak within a kind
  Expr expr;        // canonical expression (binders named %0, %1, ...)

  bool residual() const { return kind >= Kind::Inv; }
  friend bool operator==(const Generator& a, const Generator& b) {
    return a.kind == b.kind && a.key == b.key;
  }
  friend bool operator<(const Generator& a, const Generator& b) {
    return a.kind != b.kind ? a.kind < b.kind : a.key < b.key;
  }
};

// Sorted generator powers; every power is >= 1.
using Monomial = std::vector<std::pair<Generator, int>>;
using Polynomial = std::map<Monomial, Rational>;

class NormalForm {
 public:
  enum class Kind { Poly, Lambda, Tuple };

  static NormalForm poly(Polynomial p);
  // `param` is the canonical parameter name the body refers to.
  static NormalForm lambda(std::string param, std::size_t arity, std::vector<std::string> names,
                           NormalForm body);
  static NormalForm tuple(std::vector<NormalForm> items);

  Kind kind() const { return kind_; }
  const Polynomial& polynomial() const { return poly_; }
  // Lambda: 0 for a scalar parameter, otherwise the tuple arity.
  std::size_t arity() const { return arity_; }
  const std::string& param() const { return param_; }
  const std::vector<std::string>& names() const { return names_; }
  const NormalForm& body() const { return items_.front(); }
  const std::vector<NormalForm>& items() const { return items_; }

  // Constant polynomial value, if this is one.
  std::optional<Rational> constant() const;
  // True when some generator lies outside the polynomial fragment.
  bool has_residual() const;

  // Display names are ignored.
  friend bool operator==(const NormalForm& a, const NormalForm& b);

 private:
  Kind kind_ = Kind::Poly;
  Polynomial poly_;
  std::size_t arity_ = 0;
  std::string param_;
  std::vector<std::string> names_;
  std::vector<NormalForm> items_;
};

// Canonical form: sums of rational multiples of generator products with
// no trig or exponential identities. Idempotent through reconstruct.
NormalForm normalize(const Expr& e);

// Expression denoting the normal form; lambda parameters get back their
// display names.
Expr reconstruct(const NormalForm& nf);

// reconstruct(normalize(e)).
Expr simplify(const Expr& e);

// ---------------------------------------------------------------------------
// Equality

struct Equality {
  enum class Kind { EqualSymbolic, EqualNumeric, NotEqual, Unknown };
  Kind kind = Kind::Unknown;
  // Numeric comparison: points where both sides evaluated, and the number
  // drawn.
  std::size_t compared = 0;
  std::size_t drawn = 0;
  double max_rel_diff = 0;
  // compared / drawn.
  double confidence = 0;
  // NotEqual: the argument where the sides differ (one value per tuple
  // component) and the two results.
  std::vector<double> witness;
  double lhs_value = 0;
  double rhs_value = 0;
};

std::string_view to_string(Equality::Kind k);

// |a - b| <= tol * max(1, |a|, |b|).
bool close_relative(double a, double b, double tol);

// Symbolic comparison of normal forms, then seeded sampling of
// cfg.equality_samples points in [-range, range]^n. Points where either
// side fails to evaluate are skipped.
Equality expr_equal(const Expr& a, const Expr& b, const NumericConfig& cfg, double range = 5.0);

// ---------------------------------------------------------------------------
// Limit form of the derivative

struct DerivativeLimit {
  // HasLimit(\h -> (f (x + h) - f x) / h, 0, D(f) x) with x free.
  Formula schema;
  // lim 0 . psi f, where psi f = \x -> \h -> (f (x + h) - f x) / h.
  Expr point_free;
};

DerivativeLimit derivative_as_limit(const Expr& f, const std::string& x = "x");

// The schema instantiated at a point, with f x and D(f) x simplified.
Formula derivative_limit_at(const Expr& f, const Rational& x);

}  // namespace mathdsl

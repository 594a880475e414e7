#pragma once

// Reference values computed without the library's interpreter or
// differentiator: a direct evaluator for one-variable fragment bodies and
// central differences on top of it.

#include "mathdsl/core.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace mathdsl::testing {

// Evaluates the body of `\x -> body` built from x, literals, + - * / ^,
// negation and the six primitives.
inline double oracle_eval(const Expr& e, double x) {
  switch (e.kind()) {
    case Expr::Kind::Var: return x;
    case Expr::Kind::Lit: return rational_to_double(e.as<expr::Lit>()->value);
    case Expr::Kind::Neg: return -oracle_eval(e.as<expr::Neg>()->operand, x);
    case Expr::Kind::BinOp: {
      const auto& b = *e.as<expr::BinOp>();
      const double l = oracle_eval(b.lhs, x), r = oracle_eval(b.rhs, x);
      switch (b.op) {
        case BinaryOp::Add: return l + r;
        case BinaryOp::Sub: return l - r;
        case BinaryOp::Mul: return l * r;
        case BinaryOp::Div: return l / r;
        case BinaryOp::Pow: return std::pow(l, r);
      }
      break;
    }
    case Expr::Kind::Prim: {
      const auto& p = *e.as<expr::Prim>();
      const double v = oracle_eval(p.arg, x);
      switch (p.fn) {
        case Primitive::Sin: return std::sin(v);
        case Primitive::Cos: return std::cos(v);
        case Primitive::Exp: return std::exp(v);
        case Primitive::Ln: return std::log(v);
        case Primitive::Sqrt: return std::sqrt(v);
        case Primitive::Abs: return std::fabs(v);
      }
      break;
    }
    default: break;
  }
  throw std::logic_error("oracle_eval: outside the fragment");
}

// f given as `\x -> body`.
inline double oracle_apply(const Expr& f, double x) {
  return oracle_eval(f.as<expr::Lam>()->body, x);
}

inline double central_difference(const std::function<double(double)>& f, double x,
                                  double h = 1e-5) {
  return (f(x + h) - f(x - h)) / (2 * h);
}

// Richardson-extrapolated central difference, accurate to roughly h^4.
inline double richardson_derivative(const std::function<double(double)>& f, double x,
                                    double h = 1e-3) {
  const double d1 = central_difference(f, x, h);
  const double d2 = central_difference(f, x, h / 2);
  return (4 * d2 - d1) / 3;
}

// The oracle's own error estimate is small on [-3, 3], so a mismatch
// against it is a differentiation bug and not a finite-difference artifact.
inline bool oracle_reliable(const Expr& f) {
  auto fx = [&](double t) { return oracle_apply(f, t); };
  for (int i = 0; i <= 60; ++i) {
    const double x = -3 + 0.1 * i;
    const double a = central_difference(fx, x);
    const double b = richardson_derivative(fx, x);
    if (!std::isfinite(a) || std::fabs(a - b) > 1e-7) return false;
  }
  return true;
}

}  // namespace mathdsl::testing

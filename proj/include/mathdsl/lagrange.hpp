#pragma once

// The Euler-Lagrange predicate on paths: the expand lift, the two sides of
// D(D[3](L) . expand(w)) == D[2](L) . expand(w), and residual checks of a
// candidate path on a time grid.

#include "mathdsl/core.hpp"
#include "mathdsl/numeric.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mathdsl {

struct LagrangianSystem {
  Expr lagrangian;  // (T, Q, V) -> R
  Expr path;        // T -> Q
  double t0 = 0;
  double t1 = 1;
  std::size_t grid_points = 201;

  // Typechecks both expressions and the window. Throws DiagnosticError;
  // Unsupported for paths into more than one coordinate.
  void validate() const;
};

struct ResidualPoint {
  double t = 0;
  double lhs = 0;
  double rhs = 0;
  double residual = 0;
  // Set when a side failed to evaluate; residual is then infinite.
  std::string error;
};

struct ResidualReport {
  enum class Verdict { Admissible, NotAdmissible };
  std::vector<ResidualPoint> residuals;
  double max_residual = 0;
  // Grid point where max_residual is attained.
  double worst_t = 0;
  Verdict verdict = Verdict::NotAdmissible;
  double threshold = 1e-6;
  // True when the outer D was taken by central differences.
  bool finite_difference = false;
};

std::string_view to_string(ResidualReport::Verdict v);

// `\t -> (t, w t, D(w) t)` with the derivative resolved and each component
// simplified. Throws NonDifferentiable when w has no symbolic derivative.
Expr expand(const Expr& w);

struct LagrangeSides {
  Expr lhs;  // D(D[3](L) . expand(w))
  Expr rhs;  // D[2](L) . expand(w)
};

LagrangeSides lagrange_sides(const LagrangianSystem& sys);
LagrangeSides lagrange_sides(const Expr& lagrangian, const Expr& path);

// FunEq(lhs, rhs).
Formula lagrange_predicate(const Expr& lagrangian, const Expr& path);

struct PathCheckOptions {
  double threshold = 1e-6;
  // Recompute the outer D of lhs by central differences at cfg.fd_step.
  bool finite_difference = false;
  NumericConfig cfg{};
};

ResidualReport check_path(const LagrangianSystem& sys, const PathCheckOptions& opts = {});

}  // namespace mathdsl

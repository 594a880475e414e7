#include "mathdsl/lagrange.hpp"

#include "mathdsl/binding.hpp"
#include "mathdsl/calculus.hpp"
#include "mathdsl/parser.hpp"
#include "mathdsl/types.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace mathdsl {

std::string_view to_string(ResidualReport::Verdict v) {
  return v == ResidualReport::Verdict::Admissible ? "Admissible" : "NotAdmissible";
}

void LagrangianSystem::validate() const {
  InferOptions open;
  open.allow_open = true;
  const Ty path_ty = infer(path, {}, open);
  if (path_ty.is(Ty::Kind::Arrow) && path_ty.cod().is(Ty::Kind::Prod)) {
    fail(DiagKind::Unsupported,
         fmt::format("paths with {} coordinates typecheck but only one coordinate is checked",
                     path_ty.cod().components().size()),
         path.span());
  }
  if (auto d = check(path, parse_type("T -> Q"))) throw DiagnosticError(*d);
  if (auto d = check(lagrangian, parse_type("(T, Q, V) -> R"))) throw DiagnosticError(*d);
  if (!std::isfinite(t0) || !std::isfinite(t1) || !(t0 < t1)) {
    fail(DiagKind::EvaluationError, fmt::format("time window [{}, {}] is degenerate", t0, t1));
  }
  if (grid_points < 3) {
    fail(DiagKind::EvaluationError, fmt::format("need at least 3 grid points, got {}", grid_points));
  }
}

Expr expand(const Expr& w) {
  const std::string t = fresh_name("t", free_vars(w));
  const Expr tv = Expr::var(t);
  const Expr dw = differentiate(w);
  return Expr::lam(t, Expr::tuple({tv, simplify(Expr::app(w, tv)), simplify(Expr::app(dw, tv))}));
}

LagrangeSides lagrange_sides(const Expr& lagrangian, const Expr& path) {
  const Expr lift = mk_expand(path);
  LagrangeSides sides{
      Expr::total_d(Expr::compose(Expr::partial_d(3, lagrangian), lift)),
      Expr::compose(Expr::partial_d(2, lagrangian), lift),
  };
  const Ty r_to_r = parse_type("R -> R");
  if (auto d = check(sides.lhs, r_to_r)) throw DiagnosticError(*d);
  if (auto d = check(sides.rhs, r_to_r)) throw DiagnosticError(*d);
  return sides;
}

LagrangeSides lagrange_sides(const LagrangianSystem& sys) {
  sys.validate();
  return lagrange_sides(sys.lagrangian, sys.path);
}

Formula lagrange_predicate(const Expr& lagrangian, const Expr& path) {
  auto [lhs, rhs] = lagrange_sides(lagrangian, path);
  return Formula::fun_eq(std::move(lhs), std::move(rhs));
}

ResidualReport check_path(const LagrangianSystem& sys, const PathCheckOptions& opts) {
  const LagrangeSides sides = lagrange_sides(sys);
  const NumericConfig& cfg = opts.cfg;

  // Simplified closed forms evaluate faster and identically on both sides
  // whenever the sides normalize to the same thing.
  const Value rhs = eval(simplify(sides.rhs), {}, cfg);
  const Value lhs = opts.finite_difference
                        ? eval(simplify(sides.lhs.as<expr::TotalD>()->fun), {}, cfg)
                        : eval(simplify(sides.lhs), {}, cfg);

  ResidualReport report;
  report.threshold = opts.threshold;
  report.finite_difference = opts.finite_difference;
  report.worst_t = sys.t0;
  const std::size_t n = sys.grid_points;
  for (std::size_t i = 0; i < n; ++i) {
    const double frac = static_cast<double>(i) / static_cast<double>(n - 1);
    const double t = i + 1 == n ? sys.t1 : sys.t0 + (sys.t1 - sys.t0) * frac;
    ResidualPoint p;
    p.t = t;
    try {
      p.lhs = opts.finite_difference ? numeric_derivative(lhs, t, cfg) : apply_real(lhs, t, cfg);
      p.rhs = apply_real(rhs, t, cfg);
      p.residual = std::fabs(p.lhs - p.rhs);
    } catch (const DiagnosticError& e) {
      p.error = e.diagnostic().message;
      p.residual = std::numeric_limits<double>::infinity();
    }
    if (i == 0 || p.residual > report.max_residual) {
      report.max_residual = p.residual;
      report.worst_t = t;
    }
    report.residuals.push_back(std::move(p));
  }
  report.verdict = report.max_residual <= opts.threshold ? ResidualReport::Verdict::Admissible
                                                         : ResidualReport::Verdict::NotAdmissible;
  return report;
}

}  // namespace mathdsl

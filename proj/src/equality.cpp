#include "mathdsl/binding.hpp"
#include "mathdsl/calculus.hpp"
#include "mathdsl/numeric.hpp"
#include "mathdsl/parser.hpp"
#include "mathdsl/types.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace mathdsl {

std::string_view to_string(Equality::Kind k) {
  switch (k) {
    case Equality::Kind::EqualSymbolic: return "equal-symbolic";
    case Equality::Kind::EqualNumeric: return "equal-numeric";
    case Equality::Kind::NotEqual: return "not-equal";
    case Equality::Kind::Unknown: return "unknown";
  }
  return "?";
}

bool close_relative(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

namespace {

// Number of real arguments: 0 for a scalar, 1 for R -> _, n for a tuple.
std::optional<std::size_t> argument_count(const Expr& e) {
  try {
    InferOptions opts;
    opts.allow_open = true;
    const Ty t = infer(e, {}, opts);
    if (!t.is(Ty::Kind::Arrow)) return 0;
    if (t.dom().is(Ty::Kind::Prod)) return t.dom().components().size();
    return 1;
  } catch (const DiagnosticError&) {
    return std::nullopt;
  }
}

// Largest relative difference between two values of the same shape, or
// nullopt when the shapes differ or contain functions.
std::optional<double> value_diff(const Value& a, const Value& b) {
  if (a.is_num() && b.is_num()) {
    const double x = a.as_num(), y = b.as_num();
    return std::fabs(x - y) / std::max({1.0, std::fabs(x), std::fabs(y)});
  }
  if (a.is_tup() && b.is_tup() && a.as_tup().size() == b.as_tup().size()) {
    double worst = 0;
    for (std::size_t i = 0; i < a.as_tup().size(); ++i) {
      auto d = value_diff(a.as_tup()[i], b.as_tup()[i]);
      if (!d) return std::nullopt;
      worst = std::max(worst, *d);
    }
    return worst;
  }
  return std::nullopt;
}

double first_real(const Value& v) {
  if (v.is_num()) return v.as_num();
  if (v.is_tup() && !v.as_tup().empty()) return first_real(v.as_tup().front());
  return 0;
}

}  // namespace

Equality expr_equal(const Expr& a, const Expr& b, const NumericConfig& cfg, double range) {
  try {
    if (normalize(a) == normalize(b)) {
      Equality out;
      out.kind = Equality::Kind::EqualSymbolic;
      return out;
    }
  } catch (const DiagnosticError&) {
    // Fall through to sampling.
  }

  const auto na = argument_count(a);
  const auto nb = argument_count(b);
  if (na && nb && *na != *nb) {
    Diagnostic d = make_diagnostic(
        Severity::Error, DiagKind::TypeMismatch,
        fmt::format("cannot compare a function of {} arguments with one of {}", *na, *nb),
        b.span());
    throw DiagnosticError(std::move(d));
  }
  const std::size_t n = na ? *na : (nb ? *nb : 1);

  Equality out;
  Value va = Value::num(0), vb = Value::num(0);
  try {
    va = eval(a, {}, cfg);
    vb = eval(b, {}, cfg);
  } catch (const DiagnosticError&) {
    return out;
  }

  auto compare = [&](const Value& ya, const Value& yb, std::vector<double> at) -> bool {
    const auto diff = value_diff(ya, yb);
    if (!diff) return true;
    ++out.compared;
    out.max_rel_diff = std::max(out.max_rel_diff, *diff);
    if (*diff > cfg.tol) {
      out.kind = Equality::Kind::NotEqual;
      out.witness = std::move(at);
      out.lhs_value = first_real(ya);
      out.rhs_value = first_real(yb);
      return false;
    }
    return true;
  };

  if (n == 0 || !va.is_fun() || !vb.is_fun()) {
    out.drawn = 1;
    if (!compare(va, vb, {})) return out;
  } else {
    SampleStream s(cfg.seed, 0xE0A1);
    for (std::size_t k = 0; k < cfg.equality_samples; ++k) {
      std::vector<double> point;
      for (std::size_t i = 0; i < n; ++i) point.push_back(range * (2 * s.uniform() - 1));
      ++out.drawn;
      Value arg = Value::num(point.front());
      if (n > 1) {
        Value::Tuple items;
        for (double p : point) items.push_back(Value::num(p));
        arg = Value::tup(std::move(items));
      }
      Value ya = Value::num(0), yb = Value::num(0);
      try {
        ya = apply(va, arg, cfg);
        yb = apply(vb, arg, cfg);
      } catch (const DiagnosticError&) {
        continue;  // outside the natural domain of one side
      }
      if (!compare(ya, yb, point)) return out;
    }
  }
  if (out.compared == 0) return out;
  out.kind = Equality::Kind::EqualNumeric;
  out.confidence = static_cast<double>(out.compared) / static_cast<double>(out.drawn);
  return out;
}

// ---------------------------------------------------------------------------

DerivativeLimit derivative_as_limit(const Expr& f, const std::string& x_hint) {
  // Only free names can clash; binders inside f are scoped.
  NameSet avoid = free_vars(f);
  const std::string x = avoid.count(x_hint) ? fresh_name(x_hint, avoid) : x_hint;
  avoid.insert(x);
  const std::string h = fresh_name("h", avoid);
  avoid.insert(h);
  const std::string g = fresh_name("g", avoid);

  const Expr xv = Expr::var(x), hv = Expr::var(h);
  const Expr quotient = Expr::lam(
      h, Expr::div(Expr::sub(Expr::app(f, Expr::add(xv, hv)), Expr::app(f, xv)), hv));
  DerivativeLimit out{
      Formula::has_limit(quotient, Expr::lit(0), Expr::app(Expr::total_d(f), xv)),
      Expr::compose(Expr::lam(g, Expr::lim(Expr::lit(0), Expr::var(g))), Expr::lam(x, quotient)),
  };
  return out;
}

Formula derivative_limit_at(const Expr& f, const Rational& x) {
  const Expr point = x < 0 ? Expr::neg(Expr::lit(Rational(-x))) : Expr::lit(x);
  const std::string h = fresh_name("h", all_names(f));
  const Expr hv = Expr::var(h);
  const Expr shifted = reduce(Expr::app(f, Expr::add(point, hv)));
  const Expr at = simplify(Expr::app(f, point));
  const Expr quotient = Expr::lam(h, Expr::div(Expr::sub(shifted, at), hv));
  const Expr slope = simplify(Expr::app(Expr::total_d(f), point));
  return Formula::has_limit(quotient, Expr::lit(0), slope);
}

}  // namespace mathdsl

#pragma once

// Seeded random ASTs for property tests. Everything generated is in the
// image of the parser: literals are non-negative terminating decimals and
// pattern lambdas reach their components through projections.

#include "mathdsl/binding.hpp"
#include "mathdsl/core.hpp"
#include "mathdsl/parser.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace mathdsl::testing {

class AstGen {
 public:
  explicit AstGen(std::uint64_t seed) : rng_(seed) {}

  std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

  // A small pool so binders shadow each other often.
  std::string name() {
    static const char* pool[] = {"x", "y", "z", "f", "g", "a", "b"};
    return pool[below(std::size(pool))];
  }

  Expr literal() {
    switch (below(3)) {
      case 0: return Expr::lit(static_cast<long long>(below(20)));
      case 1: return Expr::lit(Rational(static_cast<long long>(below(100)), 10));
      default: return Expr::lit(Rational(static_cast<long long>(below(1000)), 100));
    }
  }

  Ty type(int depth = 2) {
    if (depth == 0 || coin(0.5)) return coin(0.8) ? Ty::real() : Ty::real("T");
    if (coin()) return Ty::arrow(type(depth - 1), type(depth - 1));
    std::vector<Ty> items;
    for (std::size_t i = 0, n = 2 + below(2); i < n; ++i) items.push_back(type(depth - 1));
    return Ty::prod(std::move(items));
  }

  Expr expr(int depth) {
    if (depth <= 0 || coin(0.2)) return coin(0.6) ? Expr::var(name()) : literal();
    const int d = depth - 1;
    switch (below(16)) {
      case 0: return Expr::lam(name(), expr(d), coin(0.15) ? std::optional<Ty>(type()) : std::nullopt);
      case 1: return pattern_lambda(d);
      case 2: return Expr::app(expr(d), expr(d));
      case 3: {
        std::vector<Expr> items;
        for (std::size_t i = 0, n = 2 + below(2); i < n; ++i) items.push_back(expr(d));
        return Expr::tuple(std::move(items));
      }
      case 4: return Expr::proj(1 + below(3), expr(d));
      case 5:
      case 6:
        return Expr::binop(static_cast<BinaryOp>(below(5)), expr(d), expr(d));
      case 7: return Expr::neg(expr(d));
      case 8: return Expr::prim(static_cast<Primitive>(below(6)), expr(d));
      case 9: return Expr::lim(expr(d), expr(d));
      case 10: return Expr::total_d(expr(d));
      case 11: return Expr::partial_d(1 + below(3), expr(d));
      case 12: return Expr::compose(expr(d), expr(d));
      case 13: return Expr::const_fun(expr(d));
      case 14: return mk_expand(expr(d));
      default: return Expr::binop(BinaryOp::Add, expr(d), expr(d));
    }
  }

  Formula formula(int depth) {
    const int d = depth - 1;
    const int e = std::max(depth - 1, 1);
    if (depth <= 0) return atomic(1);
    switch (below(8)) {
      case 0:
      case 1: {
        std::optional<BinderBound> bound;
        if (coin(0.4)) bound = BinderBound{static_cast<CmpOp>(below(6)), coin() ? literal() : Expr::var(name())};
        return Formula::quant(coin() ? Quantifier::Forall : Quantifier::Exists, name(), bound,
                              formula(d));
      }
      case 2: return Formula::implies(formula(d), formula(d));
      case 3: return Formula::conj(formula(d), formula(d));
      case 4: return Formula::negation(formula(d));
      default: return atomic(e);
    }
  }

  // \x -> body over the polynomial-exponential-trig fragment.
  Expr fragment(int depth) { return Expr::lam("x", fragment_body(depth)); }

  Expr fragment_body(int depth) {
    if (depth <= 0 || coin(0.25)) {
      if (coin(0.65)) return Expr::var("x");
      return Expr::lit(Rational(static_cast<long long>(1 + below(30)), 10));
    }
    const int d = depth - 1;
    switch (below(10)) {
      case 0:
      case 1: return Expr::add(fragment_body(d), fragment_body(d));
      case 2: return Expr::sub(fragment_body(d), fragment_body(d));
      case 3:
      case 4: return Expr::mul(fragment_body(d), fragment_body(d));
      case 5: return Expr::pow(fragment_body(d), Expr::lit(static_cast<long long>(2 + below(2))));
      case 6: return Expr::prim(Primitive::Sin, fragment_body(d));
      case 7: return Expr::prim(Primitive::Cos, fragment_body(d));
      case 8: return Expr::prim(Primitive::Exp, fragment_body(d));
      default: return Expr::neg(fragment_body(d));
    }
  }

 private:
  Expr pattern_lambda(int depth) {
    static const char* names[] = {"p", "q", "r"};
    const std::size_t n = 2 + below(2);
    std::vector<std::string> pattern(names, names + n);
    Expr body = expr(depth);
    const std::string param = fresh_name("s", all_names(body));
    for (std::size_t i = 0; i < n; ++i) {
      body = subst(body, pattern[i], Expr::proj(i + 1, Expr::var(param)));
    }
    return Expr::lam(param, body, std::nullopt, pattern);
  }

  Formula atomic(int depth) {
    switch (below(6)) {
      case 0: return Formula::truth(coin());
      case 1: return Formula::in_dom(expr(depth), expr(depth));
      case 2: return Formula::has_limit(expr(depth), expr(depth), expr(depth));
      case 3: return Formula::fun_eq(expr(depth), expr(depth));
      case 4: return Formula::lagrange_eq(expr(depth), expr(depth));
      default: return Formula::cmp(static_cast<CmpOp>(below(6)), expr(depth), expr(depth));
    }
  }

  std::mt19937_64 rng_;
};

}  // namespace mathdsl::testing

#include "doctest.h"

#include "mathdsl/binding.hpp"
#include "mathdsl/numeric.hpp"
#include "mathdsl/parser.hpp"
#include "support/random_ast.hpp"
#include "support/renamer.hpp"

#include <algorithm>

using namespace mathdsl;

namespace {

NameSet names(std::initializer_list<const char*> xs) {
  NameSet out;
  for (const char* x : xs) out.insert(x);
  return out;
}

}  // namespace

TEST_CASE("free variables") {
  const Formula p = parse_formula("0 < abs(x - a) < delta => x in dom(f) && abs(f x - L) < eps");
  CHECK(free_vars(p, names({"f", "a", "L", "eps", "delta"})) == names({"x"}));
  CHECK(free_vars(parse_expr("\\x -> x")).empty());
  CHECK(free_vars(parse_expr("\\x -> x + y")) == names({"y"}));
  CHECK(free_vars(parse_formula("forall x > y. x < z")) == names({"y", "z"}));
  CHECK(free_vars(parse_expr("\\(a, b) -> a + c")) == names({"c"}));
}

TEST_CASE("substitution") {
  CHECK(subst(parse_expr("x + y"), "y", Expr::lit(2)) == parse_expr("x + 2"));
  const Expr renamed = subst(parse_expr("\\x -> x + y"), "y", Expr::var("x"));
  CHECK(renamed == parse_expr("\\x' -> x' + x"));
  CHECK(subst(parse_expr("\\x -> x"), "x", Expr::lit(5)) == parse_expr("\\x -> x"));

  SUBCASE("the renamed result evaluates like the intended one") {
    const Env env = Env{}.bind("x", Value::num(3));
    for (double t : {-1.5, 0.0, 2.0}) {
      const double got = apply_real(eval(renamed, env), t);
      CHECK(got == doctest::Approx(t + 3));
    }
  }
  SUBCASE("formulas") {
    const Formula f = subst(parse_formula("forall x. x < y"), "y", Expr::var("x"));
    CHECK(alpha_eq(f, parse_formula("forall z. z < x")));
  }
}

TEST_CASE("alpha equivalence") {
  CHECK(alpha_eq(parse_expr("\\x -> x"), parse_expr("\\y -> y")));
  CHECK(alpha_eq(parse_expr("\\x -> x + z"), parse_expr("\\y -> y + z")));
  CHECK_FALSE(alpha_eq(parse_expr("\\x -> \\y -> x"), parse_expr("\\a -> \\b -> b")));
  CHECK_FALSE(alpha_eq(parse_expr("\\x -> x + z"), parse_expr("\\z -> z + z")));
  CHECK(alpha_eq(parse_expr("\\x -> \\x -> x"), parse_expr("\\a -> \\b -> b")));
  CHECK(alpha_eq(parse_formula("forall e > 0. exists d. d < e"),
                 parse_formula("forall a > 0. exists b. b < a")));
  CHECK_FALSE(alpha_eq(parse_formula("forall e > 0. true"), parse_formula("forall e > 1. true")));
}

TEST_CASE("implicit binders") {
  SUBCASE("the hidden quantifier of the limit definition") {
    const Formula naive = parse_formula(
        "forall eps > 0. exists delta > 0. "
        "(0 < abs(x - a) < delta => x in dom(f) && abs(f x - L) < eps)");
    const ScopeReport r = diagnose_implicit_binders(naive, names({"f", "a", "L"}));
    REQUIRE(r.suggestions.size() == 1);
    CHECK(r.errors.empty());
    CHECK(r.suggestions[0].kind == DiagKind::ImplicitBinder);
    const Formula fixed = std::get<Formula>(*r.suggestions[0].suggestion);
    CHECK(free_vars(fixed, names({"f", "a", "L"})).empty());
    CHECK(alpha_eq(fixed, parse_formula("forall eps > 0. exists delta > 0. forall x. "
                                        "(0 < abs(x - a) < delta => x in dom(f) && "
                                        "abs(f x - L) < eps)")));
  }
  SUBCASE("closed formula") {
    const ScopeReport r = diagnose_implicit_binders(parse_formula("forall x. x < 1 => x < 2"), {});
    CHECK(r.empty());
    CHECK(r.suggestions.empty());
  }
  SUBCASE("two free names give two single-quantifier suggestions") {
    const Formula f = parse_formula("x < 1 => y < 2");
    const ScopeReport r = diagnose_implicit_binders(f, {});
    REQUIRE(r.suggestions.size() == 2);
    for (const auto& d : r.suggestions) {
      const Formula s = std::get<Formula>(*d.suggestion);
      CHECK(s.kind() == Formula::Kind::Quant);
      CHECK(free_vars(s).size() == 1);
    }
    REQUIRE(r.repaired.has_value());
    CHECK(free_vars(*r.repaired).empty());
  }
  SUBCASE("free names outside implications are errors") {
    const ScopeReport r = diagnose_implicit_binders(parse_formula("x < 1"), {});
    CHECK(r.suggestions.empty());
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].kind == DiagKind::FreeVariable);
  }
}

TEST_CASE("shadowing is reported") {
  const ScopeReport r = scope_report(parse_expr("\\x -> \\x -> x"), {});
  CHECK(r.shadowed.size() == 1);
}

TEST_CASE("binder laws on random terms (1000 cases each)") {
  testing::AstGen gen(0xB1D);
  int reflexive = 0, symmetric = 0, transitive = 0, renaming = 0, fv_law = 0, stable = 0;
  for (int i = 0; i < 1000; ++i) {
    const Expr a = gen.expr(5);
    testing::Renamer r1, r2;
    const Expr b = r1.run(a);
    const Expr c = r2.run(b);
    if (!alpha_eq(a, a)) ++reflexive;
    if (alpha_eq(a, b) != alpha_eq(b, a)) ++symmetric;
    if (alpha_eq(a, b) && alpha_eq(b, c) && !alpha_eq(a, c)) ++transitive;
    if (!alpha_eq(a, b)) ++renaming;

    const Expr r = gen.expr(2);
    const NameSet fv = free_vars(a);
    if (!fv.empty()) {
      const std::string n = *std::next(fv.begin(), static_cast<long>(gen.below(fv.size())));
      NameSet expected = fv;
      expected.erase(n);
      for (const auto& x : free_vars(r)) expected.insert(x);
      if (free_vars(subst(a, n, r)) != expected) ++fv_law;
      if (!alpha_eq(subst(a, n, r), subst(b, n, r))) ++stable;
    }
  }
  CHECK(reflexive == 0);
  CHECK(symmetric == 0);
  CHECK(transitive == 0);
  CHECK(renaming == 0);
  CHECK(fv_law == 0);
  CHECK(stable == 0);
}

TEST_CASE("repaired formulas are closed over the ambient set (random formulas)") {
  testing::AstGen gen(0xC105E);
  int open = 0;
  for (int i = 0; i < 500; ++i) {
    const Formula f = gen.formula(3);
    const NameSet ambient = names({"f", "a"});
    const ScopeReport r = diagnose_implicit_binders(f, ambient);
    for (const auto& d : r.suggestions) {
      const Formula s = std::get<Formula>(*d.suggestion);
      NameSet rest = free_vars(s, ambient);
      // Only names that other suggestions or errors account for may remain.
      for (const auto& occ : r.free) rest.erase(occ.name);
      if (!rest.empty()) ++open;
    }
    if (r.errors.empty() && r.repaired && !free_vars(*r.repaired, ambient).empty()) ++open;
  }
  CHECK(open == 0);
}

#include "doctest.h"

#include "mathdsl/core.hpp"
#include "mathdsl/numeric.hpp"
#include "mathdsl/parser.hpp"
#include "mathdsl/types.hpp"
#include "support/random_ast.hpp"

using namespace mathdsl;

TEST_CASE("decimal literals are exact") {
  CHECK(*parse_decimal("0.25") == Rational(1, 4));
  CHECK(*parse_decimal("1e-3") == Rational(1, 1000));
  CHECK(*parse_decimal("2.5E+4") == Rational(25000));
  CHECK_FALSE(parse_decimal("1.").has_value());
  CHECK(rational_to_string(Rational(3, 8)) == "0.375");
  CHECK(rational_to_string(Rational(1, 3)) == "1/3");
  CHECK(rational_from_double(0.1) != Rational(1, 10));
  CHECK(rational_to_double(rational_from_double(0.1)) == 0.1);
}

TEST_CASE("mk_const_fun ignores its argument") {
  CHECK(eval(Expr::app(mk_const_fun(Expr::lit(0)), parse_expr("(1, 2, 3)"))).as_num() == 0);
  CHECK(eval(Expr::app(mk_const_fun(Expr::lit(5)), Expr::lit(7))).as_num() == 5);
  const Env env = Env{}.bind("x", Value::num(2));
  CHECK(eval(Expr::app(mk_const_fun(Expr::var("x")), Expr::lit(9)), env).as_num() == 2);
}

TEST_CASE("expr_size counts nodes") {
  CHECK(expr_size(Expr::lit(1)) == 1);
  CHECK(expr_size(Expr::add(Expr::lit(1), Expr::var("x"))) == 3);
}

TEST_CASE("children and with_children round-trip every variant") {
  testing::AstGen gen(11);
  for (int i = 0; i < 500; ++i) {
    const Expr e = gen.expr(4);
    CHECK(with_children(e, children(e)) == e);
  }
}

TEST_CASE("domains") {
  const auto punctured = DomainSet::parse("R\\{1}");
  CHECK_FALSE(in_domain(1, punctured));
  CHECK(in_domain(1.5, punctured));
  const auto half_open = DomainSet::parse("(0,1]");
  CHECK_FALSE(in_domain(0, half_open));
  CHECK(in_domain(1, half_open));
  CHECK(in_domain(0.5, half_open));

  const auto u = DomainSet::parse("[0,1) U (2,inf)");
  CHECK(u.contains(0));
  CHECK_FALSE(u.contains(1.5));
  CHECK(u.contains(1e9));
  CHECK(DomainSet::parse(u.to_string()) == u);

  SUBCASE("normalization is idempotent") {
    const DomainSet d({{2, 3, true, false}, {0, 2.5, false, true}, {5, 4, true, true}}, {2.2, 7});
    CHECK(d.normalized() == d);
    CHECK(d.normalized().normalized() == d.normalized());
    CHECK(d.intervals().size() == 1);
    CHECK(d.punctures() == std::vector<double>{2.2});
  }
  CHECK_THROWS_AS(DomainSet::parse("(0,"), DiagnosticError);
}

TEST_CASE("labelled reals unify with each other") {
  const Expr id = parse_expr("\\x -> x");
  CHECK_FALSE(check(id, Ty::arrow(Ty::real("T"), Ty::real("Q"))).has_value());
  CHECK_FALSE(check(id, Ty::arrow(Ty::real(), Ty::real("V"))).has_value());
  CHECK(check(Expr::lit(1), Ty::real("T")) == std::nullopt);
}

TEST_CASE("diagnostic kinds have stable names") {
  CHECK(to_string(DiagKind::TypeMismatch) == "TypeMismatch");
  CHECK(to_string(DiagKind::NotAVariable) == "NotAVariable");
  CHECK(to_string(DiagKind::ImplicitBinder) == "ImplicitBinder");
  CHECK(to_string(Severity::Note) == "note");
}

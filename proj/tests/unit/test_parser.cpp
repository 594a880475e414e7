#include "doctest.h"

#include "mathdsl/binding.hpp"
#include "mathdsl/parser.hpp"
#include "support/random_ast.hpp"

using namespace mathdsl;

namespace {

std::string round(std::string_view text) { return pretty(parse_expr(text)); }

// Every child span lies inside its parent's.
bool spans_nest(const Expr& e) {
  for (const auto& k : children(e)) {
    if (k.span().valid() && !e.span().contains(k.span())) return false;
    if (!spans_nest(k)) return false;
  }
  return true;
}

DiagKind error_kind(std::string_view text) {
  try {
    parse_term(text);
  } catch (const DiagnosticError& e) {
    return e.diagnostic().kind;
  }
  FAIL("no error for " << text);
  return DiagKind::SyntaxError;
}

}  // namespace

TEST_CASE("expression constructors") {
  const Expr sq = parse_expr("\\x -> x^2");
  REQUIRE(sq.kind() == Expr::Kind::Lam);
  CHECK(sq.as<expr::Lam>()->param == "x");
  CHECK(sq.as<expr::Lam>()->body == Expr::pow(Expr::var("x"), Expr::lit(2)));

  CHECK(parse_expr("lim(0, \\h -> h)") ==
        Expr::lim(Expr::lit(0), Expr::lam("h", Expr::var("h"))));
  CHECK(parse_expr("D[3](L)") == Expr::partial_d(3, Expr::var("L")));
  CHECK(parse_expr("const(0)") == Expr::const_fun(Expr::lit(0)));
  CHECK(parse_expr("f . g") == Expr::compose(Expr::var("f"), Expr::var("g")));
}

TEST_CASE("formula constructors") {
  const Formula f = parse_formula("forall eps > 0. exists delta > 0. true");
  REQUIRE(f.kind() == Formula::Kind::Quant);
  const auto& outer = *f.as<formula::Quant>();
  CHECK(outer.quantifier == Quantifier::Forall);
  CHECK(outer.name == "eps");
  REQUIRE(outer.bound.has_value());
  CHECK(outer.bound->op == CmpOp::Gt);
  CHECK(outer.body.as<formula::Quant>()->quantifier == Quantifier::Exists);

  CHECK(parse_formula("haslimit(\\x -> x, 0, 0)") ==
        Formula::has_limit(Expr::lam("x", Expr::var("x")), Expr::lit(0), Expr::lit(0)));

  const Expr gap = parse_expr("abs(x - a)");
  CHECK(parse_formula("0 < abs(x - a) < delta") ==
        Formula::conj(Formula::cmp(CmpOp::Lt, Expr::lit(0), gap),
                      Formula::cmp(CmpOp::Lt, gap, Expr::var("delta"))));
}

TEST_CASE("longer comparison chains are rejected with a repair") {
  try {
    parse_formula("0 < a < b < c");
    FAIL("accepted a 3-chain");
  } catch (const DiagnosticError& e) {
    CHECK(e.diagnostic().kind == DiagKind::SyntaxError);
    REQUIRE(e.diagnostic().suggestion.has_value());
    CHECK(std::get<Formula>(*e.diagnostic().suggestion) == parse_formula("0 < a && a < b && b < c"));
  }
  CHECK(error_kind("a <= b < c") == DiagKind::SyntaxError);
}

TEST_CASE("printing") {
  CHECK(pretty(Expr::lam("x", Expr::mul(Expr::lit(2), Expr::var("x")))) == "\\x -> 2 * x");
  CHECK(pretty(Expr::compose(Expr::var("f"), Expr::var("g"))) == "f . g");
  CHECK(round("\\(a, b, c) -> a * c") == "\\(a, b, c) -> a * c");
  CHECK(round("expand(w)") == "expand(w)");
  CHECK(round("λx → x ∘ y") == "\\x -> x . y");
  CHECK(pretty(parse_formula("∀x. x ≤ 1 ⇒ ¬(x ≥ 2)")) == "forall x. x <= 1 => !(x >= 2)");
  CHECK(pretty(parse_type("(R, R, R) -> R")) == "(R, R, R) -> R");
  CHECK(pretty(parse_type("(R -> R) -> R")) == "(R -> R) -> R");
  CHECK(pretty(parse_type("T -> Q"), true) == "R{T} -> R{Q}");
}

TEST_CASE("precedence fixtures") {
  CHECK(round("1 + 2 * 3") == "1 + 2 * 3");
  CHECK(round("(1 + 2) * 3") == "(1 + 2) * 3");
  CHECK(parse_expr("2 ^ 3 ^ 2") == Expr::pow(Expr::lit(2), Expr::pow(Expr::lit(3), Expr::lit(2))));
  CHECK(parse_expr("a - b - c") == Expr::sub(Expr::sub(Expr::var("a"), Expr::var("b")), Expr::var("c")));
  CHECK(parse_expr("a / b / c") == Expr::div(Expr::div(Expr::var("a"), Expr::var("b")), Expr::var("c")));
  CHECK(round("a - (b - c)") == "a - (b - c)");
  CHECK(parse_expr("-x^2") == Expr::neg(Expr::pow(Expr::var("x"), Expr::lit(2))));
  CHECK(parse_expr("f x y") == Expr::app(Expr::app(Expr::var("f"), Expr::var("x")), Expr::var("y")));
  CHECK(parse_expr("f . g x") == Expr::compose(Expr::var("f"), Expr::app(Expr::var("g"), Expr::var("x"))));
  CHECK(parse_formula("f . g == h") ==
        Formula::fun_eq(Expr::compose(Expr::var("f"), Expr::var("g")), Expr::var("h")));
  CHECK(parse_expr("x^2 * y") == Expr::mul(Expr::pow(Expr::var("x"), Expr::lit(2)), Expr::var("y")));
  CHECK(parse_formula("p < 1 => q < 1 => r < 1").kind() == Formula::Kind::Implies);
  CHECK(pretty(parse_formula("(a < 1 => b < 1) => c < 1")) == "(a < 1 => b < 1) => c < 1");
}

TEST_CASE("syntax errors carry spans") {
  try {
    parse_expr("1 + * 2");
    FAIL("accepted");
  } catch (const DiagnosticError& e) {
    CHECK(e.diagnostic().span.line == 1);
    CHECK(e.diagnostic().span.column == 5);
  }
  CHECK(error_kind("tan(x)") == DiagKind::SyntaxError);
  CHECK(error_kind("(1") == DiagKind::SyntaxError);
  CHECK(error_kind("proj[0]((1, 2))") == DiagKind::SyntaxError);
  CHECK(error_kind("\\forall -> 1") == DiagKind::SyntaxError);
}

TEST_CASE("spans nest") {
  for (const char* text : {"\\x -> sin(x) * (x + 1)^2", "D[2](\\(a, b) -> a * b) (1, 2)",
                           "lim(0, \\h -> (f (x + h) - f x) / h)"}) {
    const Expr e = parse_expr(text);
    CHECK(spans_nest(e));
    CHECK(e.span().start == 0);
    CHECK(e.span().end == std::string_view(text).size());
  }
}

TEST_CASE("binding files") {
  const auto bs = parse_bindings("# comment\nsq = \\x -> x^2\n\nfact :: forall x. sq x >= 0\n");
  REQUIRE(bs.size() == 2);
  CHECK(bs[0].name == "sq");
  CHECK(std::holds_alternative<Expr>(bs[0].value));
  CHECK(bs[1].name == "fact");
  CHECK(std::holds_alternative<Formula>(bs[1].value));
  CHECK(bs[1].span.line == 4);
}

TEST_CASE("grammar text is available") {
  const auto g = grammar_text();
  CHECK(g.find("expr") != std::string_view::npos);
  CHECK(g.find("formula") != std::string_view::npos);
}

TEST_CASE("parse after pretty is alpha-equivalent (1000 expressions, 1000 formulas)") {
  testing::AstGen gen(0x5EED);
  int failures = 0;
  for (int i = 0; i < 1000; ++i) {
    const Expr e = gen.expr(5);
    if (!alpha_eq(parse_expr(pretty(e)), e)) ++failures;
  }
  for (int i = 0; i < 1000; ++i) {
    const Formula f = gen.formula(4);
    if (!alpha_eq(parse_formula(pretty(f)), f)) ++failures;
  }
  CHECK(failures == 0);
}

#include "doctest.h"

#include "mathdsl/binding.hpp"
#include "mathdsl/numeric.hpp"
#include "mathdsl/parser.hpp"
#include "mathdsl/types.hpp"
#include "support/random_ast.hpp"

using namespace mathdsl;

namespace {

TypeEnv lagrange_env() {
  return {{"L", parse_type("(T, Q, V) -> R")}, {"w", parse_type("T -> Q")}};
}

Diagnostic infer_error(const Expr& e, const TypeEnv& env = {}) {
  try {
    infer(e, env);
  } catch (const DiagnosticError& err) {
    return err.diagnostic();
  }
  FAIL("inferred a type for " << pretty(e));
  return {};
}

const char* kTraditional = "d/dt (partial(L)/partial(qdot)) - partial(L)/partial(q) = 0";

// A random value of type t, or nullopt for function types.
std::optional<Value> sample_value(const Ty& t, testing::AstGen& gen) {
  if (t.is(Ty::Kind::Real)) return Value::num(gen.uniform(-2, 2));
  if (t.is(Ty::Kind::Prod)) {
    Value::Tuple items;
    for (const auto& c : t.components()) {
      auto v = sample_value(c, gen);
      if (!v) return std::nullopt;
      items.push_back(*v);
    }
    return Value::tup(std::move(items));
  }
  return std::nullopt;
}

bool shape_matches(const Value& v, const Ty& t) {
  switch (t.kind()) {
    case Ty::Kind::Real: return v.is_num();
    case Ty::Kind::Arrow: return v.is_fun();
    case Ty::Kind::Prod: {
      if (!v.is_tup() || v.as_tup().size() != t.components().size()) return false;
      for (std::size_t i = 0; i < t.components().size(); ++i) {
        if (!shape_matches(v.as_tup()[i], t.components()[i])) return false;
      }
      return true;
    }
    default: return true;
  }
}

bool is_shape_error(const std::string& message) {
  for (const char* s : {"not a function", "expected a real number", "not a tuple",
                        "value of another shape", "not real"}) {
    if (message.find(s) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("inference") {
  const TypeEnv env = lagrange_env();
  CHECK(pretty(infer(parse_expr("D(\\x -> x^2)"))) == "R -> R");
  CHECK(infer(parse_expr("D(\\x -> x^2)")) == Ty::arrow(Ty::real(), Ty::real()));

  const Diagnostic d = infer_error(parse_expr("D(L)"), env);
  CHECK(d.kind == DiagKind::TypeMismatch);
  REQUIRE(d.expected.has_value());
  REQUIRE(d.found.has_value());
  CHECK(pretty(*d.expected) == "R -> R");
  CHECK(pretty(*d.found) == "(R, R, R) -> R");

  const Ty t = infer(parse_expr("D[2](L) . expand(w)"), env);
  CHECK(pretty(t) == "R -> R");
  CHECK(pretty(t, true) == "R{T} -> R");

  CHECK(pretty(infer(parse_expr("\\(a, b) -> a * b"))) == "(R, R) -> R");
  CHECK(pretty(infer(parse_expr("proj[2]((1, 2))"))) == "R");
  CHECK(pretty(infer(parse_expr("lim(0, \\h -> h)"))) == "R");
}

TEST_CASE("inference errors") {
  CHECK(infer_error(parse_expr("5 3")).kind == DiagKind::TypeMismatch);
  CHECK(infer_error(parse_expr("\\x -> x x")).kind == DiagKind::OccursCheck);
  CHECK(infer_error(parse_expr("y + 1")).kind == DiagKind::FreeVariable);
  CHECK(infer_error(parse_expr("const(0)")).kind == DiagKind::Ambiguous);
  CHECK(infer_error(parse_expr("proj[3]((1, 2))")).kind == DiagKind::TypeMismatch);
  CHECK(infer_error(parse_expr("D[4](\\(a, b, c) -> a)")).kind == DiagKind::TypeMismatch);

  const Diagnostic d = infer_error(parse_expr("1 + (\\x -> x)"));
  CHECK(d.span.column == 6);  // the lambda, not its parentheses
}

TEST_CASE("checking mode") {
  CHECK_FALSE(check(parse_expr("const(0)"), parse_type("(T, Q, V) -> R")).has_value());
  CHECK_FALSE(check(parse_expr("\\x -> x"), parse_type("R -> R")).has_value());
  const auto d = check(parse_expr("5"), parse_type("R -> R"));
  REQUIRE(d.has_value());
  CHECK(d->kind == DiagKind::TypeMismatch);
  CHECK_FALSE(check(parse_expr("\\(t, q, v) -> v^2 / 2"), parse_type("(T, Q, V) -> R")));
  CHECK(check_formula(parse_formula("forall x. D(\\y -> y^2) x >= 0")) == std::nullopt);
  CHECK(check_formula(parse_formula("D(L) == D(L)"), lagrange_env()).has_value());
}

TEST_CASE("traditional Lagrange notation") {
  const TypeEnv env = lagrange_env();
  const auto sig = StateSignature::standard();

  SUBCASE("naive reading") {
    const Elaboration el = elaborate_traditional(kTraditional, env, sig, false);
    REQUIRE(el.diagnostics.size() == 2);
    int mismatches = 0, notes = 0;
    for (const auto& d : el.diagnostics) {
      if (d.kind == DiagKind::TypeMismatch) {
        ++mismatches;
        CHECK(pretty(*d.expected) == "R -> R");
        CHECK(pretty(*d.found) == "(R, R, R) -> R");
      }
      if (d.kind == DiagKind::NotAVariable) {
        ++notes;
        CHECK(d.severity == Severity::Note);
        CHECK(d.message.find("qdot") != std::string::npos);
        CHECK(d.message.find("function") != std::string::npos);
      }
    }
    CHECK(mismatches == 1);
    CHECK(notes == 1);
  }
  SUBCASE("repaired reading") {
    const Elaboration el = elaborate_traditional(kTraditional, env, sig, true);
    CHECK(el.diagnostics.empty());
    CHECK(alpha_eq(el.formula, parse_formula("D(D[3](L) . expand(w)) == D[2](L) . expand(w)")));
    const auto& eq = *el.formula.as<formula::FunEq>();
    CHECK(pretty(infer(eq.lhs, env)) == "R -> R");
    CHECK(pretty(infer(eq.rhs, env)) == "R -> R");
  }
  SUBCASE("unknown names") {
    auto first_kind = [&](const char* text, const TypeEnv& e) -> std::optional<DiagKind> {
      try {
        const auto el = elaborate_traditional(text, e, sig, false);
        if (!el.diagnostics.empty()) return el.diagnostics.front().kind;
      } catch (const DiagnosticError& err) {
        return err.diagnostic().kind;
      }
      return std::nullopt;
    };
    CHECK(first_kind("d/dt (partial(L)/partial(zdot)) - partial(L)/partial(q) = 0", env) ==
          DiagKind::UnknownName);
    CHECK(first_kind(kTraditional, {}) == DiagKind::UnknownName);
  }
  SUBCASE("state signatures") {
    CHECK(sig.index_of("t") == 1);
    CHECK(sig.index_of("q") == 2);
    CHECK(sig.index_of("qdot") == 3);
    CHECK(StateSignature::parse("s:time,x:coordinate,v:velocity").index_of("v") == 3);
    CHECK_THROWS_AS(StateSignature::parse("t,q"), DiagnosticError);
  }
}

TEST_CASE("naive reading always fails and the repair always succeeds") {
  testing::AstGen gen(0x1A6);
  const auto sig = StateSignature::standard();
  for (int i = 0; i < 100; ++i) {
    // Lagrangians over (T, Q, V) with random labels dropped or kept.
    std::vector<Ty> dom{gen.coin() ? Ty::real("T") : Ty::real(),
                        gen.coin() ? Ty::real("Q") : Ty::real(),
                        gen.coin() ? Ty::real("V") : Ty::real()};
    const TypeEnv env{{"L", Ty::arrow(Ty::prod(dom), Ty::real())},
                      {"w", Ty::arrow(Ty::real("T"), Ty::real("Q"))}};
    const auto naive = elaborate_traditional(kTraditional, env, sig, false);
    bool mismatch = false;
    for (const auto& d : naive.diagnostics) mismatch |= d.kind == DiagKind::TypeMismatch;
    CHECK(mismatch);
    CHECK(elaborate_traditional(kTraditional, env, sig, true).diagnostics.empty());
  }
}

TEST_CASE("principality and label invariance on random expressions") {
  testing::AstGen gen(0x7E);
  const TypeEnv labelled{{"f", parse_type("T -> Q")}, {"a", parse_type("T")}};
  const TypeEnv plain{{"f", parse_type("R -> R")}, {"a", parse_type("R")}};
  int differ = 0, checked = 0;
  for (int i = 0; i < 1000; ++i) {
    const Expr e = gen.expr(4);
    InferOptions first, second;
    first.allow_open = second.allow_open = true;
    second.meta_base = 1000;
    std::optional<Ty> t1, t2, t3;
    try { t1 = infer(e, labelled, first); } catch (const DiagnosticError&) {}
    try { t2 = infer(e, labelled, second); } catch (const DiagnosticError&) {}
    try { t3 = infer(e, plain, first); } catch (const DiagnosticError&) {}
    if (t1.has_value() != t2.has_value() || t1.has_value() != t3.has_value()) {
      ++differ;
      continue;
    }
    if (!t1) continue;
    ++checked;
    if (!types_alpha_eq(*t1, *t2)) ++differ;
    if (!types_alpha_eq(t1->without_labels(), *t3)) ++differ;
  }
  CHECK(differ == 0);
  CHECK(checked > 100);
}

TEST_CASE("well-typed expressions evaluate to values of their type's shape") {
  testing::AstGen gen(0x50D);
  int typed = 0, shape_errors = 0;
  NumericConfig cfg;
  for (int i = 0; i < 2000; ++i) {
    const Expr e = gen.expr(4);
    if (!free_vars(e).empty()) continue;
    Ty t = Ty::prop();
    try {
      t = infer(e);
    } catch (const DiagnosticError&) {
      continue;
    }
    ++typed;
    try {
      Value v = eval(e, {}, cfg);
      Ty result = t;
      if (t.is(Ty::Kind::Arrow)) {
        if (auto arg = sample_value(t.dom(), gen)) {
          v = apply(v, *arg, cfg);
          result = t.cod();
        }
      }
      if (!shape_matches(v, result)) ++shape_errors;
    } catch (const DiagnosticError& err) {
      if (is_shape_error(err.diagnostic().message)) {
        ++shape_errors;
        MESSAGE(pretty(e) << ": " << err.what());
      }
    }
  }
  CHECK(shape_errors == 0);
  CHECK(typed > 50);
}

#include "doctest.h"

#include "mathdsl/calculus.hpp"
#include "mathdsl/numeric.hpp"
#include "mathdsl/parser.hpp"
#include "support/oracle.hpp"
#include "support/random_ast.hpp"

#include <cmath>

using namespace mathdsl;

namespace {

DiagKind eval_error(std::string_view text) {
  try {
    eval(parse_expr(text));
  } catch (const DiagnosticError& e) {
    return e.diagnostic().kind;
  }
  FAIL("evaluated " << text);
  return DiagKind::SyntaxError;
}

LimitVerdict limit(std::string_view f, double a, double L, const DomainSet& dom = DomainSet::reals(),
                   const NumericConfig& cfg = {}) {
  return check_limit(parse_expr(f), a, L, dom, cfg);
}

}  // namespace

TEST_CASE("evaluation") {
  CHECK(eval(parse_expr("(\\x -> x^2) 3")).as_num() == 9);
  const Value state = eval(parse_expr("expand(\\t -> t^2) 1"));
  REQUIRE(state.is_tup());
  CHECK(state.as_tup()[0].as_num() == 1);
  CHECK(state.as_tup()[1].as_num() == 1);
  // Oracle: slope of t^2 at 1.
  const double slope = testing::richardson_derivative([](double t) { return t * t; }, 1);
  CHECK(state.as_tup()[2].as_num() == doctest::Approx(slope).epsilon(1e-9));

  CHECK(eval(parse_expr("(\\(a, b) -> a - b) (5, 2)")).as_num() == 3);
  CHECK(eval(parse_expr("(sin . cos) 0")).as_num() == doctest::Approx(std::sin(1.0)));
  CHECK(eval(parse_expr("D[2](\\(a, b) -> a * b^2) (3, 2)")).as_num() == doctest::Approx(12));
  CHECK(eval(parse_expr("lim(0, \\h -> ((3 + h)^2 - 9) / h)")).as_num() ==
        doctest::Approx(6).epsilon(1e-9));

  CHECK(eval_error("1/0") == DiagKind::EvaluationError);
  CHECK(eval_error("ln(0)") == DiagKind::EvaluationError);
  CHECK(eval_error("sqrt(-1)") == DiagKind::EvaluationError);
  CHECK(eval_error("(-8)^(1/3)") == DiagKind::EvaluationError);
  CHECK(eval_error("exp(1000)") == DiagKind::EvaluationError);
  CHECK(eval_error("lim(0, \\x -> sin(1/x))") == DiagKind::NonConvergence);

  try {
    eval(parse_expr("2 + 1/0"));
  } catch (const DiagnosticError& e) {
    CHECK(e.diagnostic().span.column == 5);
  }
}

TEST_CASE("finite differences") {
  const NumericConfig cfg;
  const Value sq = eval(parse_expr("\\x -> x^2"));
  CHECK(std::fabs(numeric_derivative(sq, 3, cfg) - 6) <= 1e-6);
  CHECK(std::fabs(numeric_derivative(eval(parse_expr("const(5)")), 0, cfg)) <= 1e-9);
  CHECK(std::fabs(numeric_derivative(eval(parse_expr("sin")), 0, cfg) - std::cos(0.0)) <= 1e-6);
}

TEST_CASE("epsilon-delta checks") {
  SUBCASE("removable singularity") {
    const auto v = limit("\\x -> (x^2-1)/(x-1)", 1, 2, DomainSet::reals_except({1}));
    CHECK(v.kind == LimitVerdict::Kind::Verified);
    CHECK(v.deltas.size() == 4);
    for (std::size_t i = 1; i < v.deltas.size(); ++i) CHECK(v.deltas[i].delta <= v.deltas[i - 1].delta);
  }
  SUBCASE("identity") {
    CHECK(limit("\\x -> x", 0, 0).kind == LimitVerdict::Kind::Verified);
  }
  SUBCASE("jump") {
    const auto v = limit("\\x -> abs(x)/x", 0, 1);
    REQUIRE(v.kind == LimitVerdict::Kind::Refuted);
    CHECK(v.witness < 0);
    CHECK(std::fabs(v.deviation - 2) <= 1e-9);
    CHECK(v.witness != 0);
    CHECK(std::fabs(v.witness) < NumericConfig{}.delta_candidates.back());
  }
  SUBCASE("wrong limit") {
    CHECK(limit("\\x -> x + 1", 0, 1.5).kind == LimitVerdict::Kind::Refuted);
  }
  SUBCASE("oscillation") {
    CHECK(limit("\\x -> sin(1/x)", 0, 0).kind == LimitVerdict::Kind::Refuted);
  }
  SUBCASE("empty neighbourhood") {
    const auto v = limit("\\x -> x", 5, 5, DomainSet::interval(0, 1, true, true));
    CHECK(v.kind == LimitVerdict::Kind::Inconclusive);
    CHECK_FALSE(v.reason.empty());
  }
  SUBCASE("one-sided domain") {
    CHECK(limit("sqrt", 0, 0, DomainSet::parse("[0,inf)")).kind == LimitVerdict::Kind::Verified);
  }
  SUBCASE("evaluation failures inside the domain are violations") {
    CHECK(limit("\\x -> 1/x", 0, 0).kind == LimitVerdict::Kind::Refuted);
  }
}

TEST_CASE("numeric limits") {
  const NumericConfig cfg;
  const auto reals = DomainSet::reals();
  CHECK(std::fabs(numeric_limit(parse_expr("\\h -> ((3+h)^2 - 9)/h"), 0, reals, cfg) - 6) <= 1e-6);
  CHECK(numeric_limit(parse_expr("\\x -> x"), 5, reals, cfg) == doctest::Approx(5));
  CHECK(std::fabs(numeric_limit(parse_expr("\\x -> sin(x)/x"), 0, reals, cfg) - 1) <= 1e-8);
  CHECK_THROWS_AS(numeric_limit(parse_expr("\\x -> sin(1/x)"), 0, reals, cfg), DiagnosticError);
  CHECK_THROWS_AS(numeric_limit(parse_expr("\\x -> abs(x)/x"), 0, reals, cfg), DiagnosticError);
  CHECK_THROWS_AS(numeric_limit(parse_expr("\\x -> 1/x"), 0, reals, cfg), DiagnosticError);
  // One-sided, but sqrt(h 2^-k) settles far too slowly for tol.
  CHECK_THROWS_AS(numeric_limit(parse_expr("sqrt"), 0, DomainSet::parse("[0,inf)"), cfg),
                  DiagnosticError);
  CHECK(numeric_limit(parse_expr("\\x -> x^2"), 0, DomainSet::parse("[0,inf)"), cfg) ==
        doctest::Approx(0));
}

TEST_CASE("numeric function equality") {
  const NumericConfig cfg;
  const auto window = DomainSet::interval(-10, 10, true, true);
  const auto pass = func_equal_numeric(parse_expr("D(\\x->x^2)"), parse_expr("\\x -> 2*x"), window, cfg);
  CHECK(pass.pass);
  CHECK(pass.compared == cfg.equality_samples);
  CHECK(func_equal_numeric(parse_expr("const(0)"), parse_expr("const(0)"), window, cfg).pass);
  const auto fail = func_equal_numeric(parse_expr("\\x -> x"), parse_expr("\\x -> x + 1e-3"), window, cfg);
  CHECK_FALSE(fail.pass);
  CHECK(in_domain(fail.witness, window));
  const auto err = func_equal_numeric(parse_expr("\\x -> 1/x"), parse_expr("\\x -> 1/x"),
                                      DomainSet::parse("[-1,1]"), cfg);
  CHECK(err.pass);  // x = 0 has probability zero
  const auto bad = func_equal_numeric(parse_expr("\\x -> sqrt(x)"), parse_expr("\\x -> sqrt(x)"),
                                      DomainSet::parse("[-1,1]"), cfg);
  CHECK_FALSE(bad.pass);
}

TEST_CASE("configuration") {
  NumericConfig cfg;
  CHECK(cfg.delta_candidates.size() == 24);
  CHECK(cfg.delta_candidates.front() == 1);
  CHECK(cfg.delta_candidates.back() == doctest::Approx(1e-9));
  CHECK(cfg.seed == 0xD51);
  CHECK_NOTHROW(cfg.validate());
  cfg.eps_grid = {1e-2, 1e-1};
  CHECK_THROWS_AS(cfg.validate(), DiagnosticError);
  cfg = {};
  cfg.tol = -1;
  CHECK_THROWS_AS(cfg.validate(), DiagnosticError);
}

TEST_CASE("determinism") {
  const NumericConfig cfg;
  const auto a = limit("\\x -> abs(x)/x", 0, 1, DomainSet::reals(), cfg);
  const auto b = limit("\\x -> abs(x)/x", 0, 1, DomainSet::reals(), cfg);
  CHECK(a.witness == b.witness);
  CHECK(a.deviation == b.deviation);
  const auto c = limit("\\x -> (x^2-1)/(x-1)", 1, 2, DomainSet::reals_except({1}), cfg);
  const auto d = limit("\\x -> (x^2-1)/(x-1)", 1, 2, DomainSet::reals_except({1}), cfg);
  REQUIRE(c.deltas.size() == d.deltas.size());
  for (std::size_t i = 0; i < c.deltas.size(); ++i) CHECK(c.deltas[i].delta == d.deltas[i].delta);

  NumericConfig other = cfg;
  other.seed = 7;
  const auto e = limit("\\x -> abs(x)/x", 0, 1, DomainSet::reals(), other);
  CHECK(e.kind == LimitVerdict::Kind::Refuted);
  CHECK(e.witness != a.witness);
}

TEST_CASE("refutation is monotone in epsilon") {
  for (const char* f : {"\\x -> x + 1", "\\x -> abs(x)/x", "\\x -> sin(1/x)", "\\x -> 1.001 * x"}) {
    for (double eps : {1.0, 0.1, 0.01}) {
      NumericConfig coarse;
      coarse.eps_grid = {eps};
      NumericConfig fine;
      fine.eps_grid = {eps / 10};
      const auto at_coarse = check_limit(parse_expr(f), 0, 0.9, DomainSet::reals(), coarse);
      if (at_coarse.kind != LimitVerdict::Kind::Refuted) continue;
      CHECK(check_limit(parse_expr(f), 0, 0.9, DomainSet::reals(), fine).kind ==
            LimitVerdict::Kind::Refuted);
    }
  }
}

TEST_CASE("numeric_limit and check_limit agree, and limits are unique") {
  testing::AstGen gen(0x11A);
  NumericConfig cfg;
  cfg.samples_per_delta = 32;
  const double gap = 2 * cfg.eps_grid.back();
  int checked = 0;
  for (int i = 0; i < 40; ++i) {
    const Expr f = gen.fragment(3);
    const double a = gen.uniform(-2, 2);
    double L = 0;
    try {
      L = numeric_limit(f, a, DomainSet::reals(), cfg);
    } catch (const DiagnosticError&) {
      continue;
    }
    ++checked;
    CHECK(check_limit(f, a, L, DomainSet::reals(), cfg).kind != LimitVerdict::Kind::Refuted);
    for (double off : {1.25 * gap, -1.25 * gap, 1.0}) {
      CHECK(check_limit(f, a, L + off, DomainSet::reals(), cfg).kind == LimitVerdict::Kind::Refuted);
    }
  }
  CHECK(checked >= 20);
}

TEST_CASE("symbolic derivatives match finite differences at 20 points") {
  testing::AstGen gen(0xFD);
  const NumericConfig cfg;
  int failures = 0;
  for (int i = 0; i < 60; ++i) {
    const Expr f = gen.fragment(2);
    const Value d = eval(differentiate(f));
    const Value fv = eval(f);
    for (int k = 0; k < 20; ++k) {
      const double x = gen.uniform(-1, 1);
      if (std::fabs(apply_real(d, x) - numeric_derivative(fv, x, cfg)) > 1e-6) ++failures;
    }
  }
  CHECK(failures == 0);
}

TEST_CASE("sample streams are reproducible") {
  SampleStream a(1, 2), b(1, 2), c(1, 3);
  const double x = a.uniform();
  CHECK(x == b.uniform());
  CHECK(x != c.uniform());
  CHECK(x >= 0);
  CHECK(x < 1);
  SampleStream s(5, 5);
  const auto p = sample_domain(DomainSet::parse("(0,1]\\{0.5}"), s);
  REQUIRE(p.has_value());
  CHECK(*p > 0);
  CHECK(*p <= 1);
  CHECK_FALSE(sample_domain(DomainSet{}, s).has_value());
}

#include "mathdsl/serialize.hpp"

#include "mathdsl/calculus.hpp"
#include "mathdsl/parser.hpp"

#include <cmath>

#include <fmt/format.h>

namespace mathdsl {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0) return "0";  // no "-0"
  return fmt::format("{}", x);
}

std::string format_value(const Value& v) {
  if (v.is_num()) return format_number(v.as_num());
  if (v.is_tup()) {
    std::string out = "(";
    const auto& items = v.as_tup();
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) out += ", ";
      out += format_value(items[i]);
    }
    return out + ")";
  }
  const Expr e = quote(v);
  try {
    return pretty(simplify(e));
  } catch (const DiagnosticError&) {
    return pretty(e);
  }
}

namespace {

// JSON has no infinities; they become null.
Json number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x == 0 ? 0.0 : x;  // drop the sign of zero
}

}  // namespace

Json to_json(const SourceSpan& s) {
  return Json{{"start", s.start},         {"end", s.end},
              {"line", s.line},           {"column", s.column},
              {"end_line", s.end_line},   {"end_column", s.end_column}};
}

Json to_json(const Diagnostic& d) {
  Json j{{"type", "diagnostic"},
         {"severity", to_string(d.severity)},
         {"kind", to_string(d.kind)},
         {"message", d.message},
         {"span", to_json(d.span)}};
  if (d.suggestion) j["suggestion"] = pretty(*d.suggestion);
  if (d.expected) j["expected"] = pretty(*d.expected);
  if (d.found) j["found"] = pretty(*d.found);
  return j;
}

Json to_json(const LimitVerdict& v) {
  Json j{{"verdict", to_string(v.kind)}};
  switch (v.kind) {
    case LimitVerdict::Kind::Verified: {
      Json rows = Json::array();
      for (const auto& d : v.deltas) rows.push_back({{"eps", d.eps}, {"delta", d.delta}});
      j["deltas"] = std::move(rows);
      break;
    }
    case LimitVerdict::Kind::Refuted:
      j["eps"] = v.eps;
      j["witness"] = v.witness;
      j["deviation"] = number(v.deviation);
      break;
    case LimitVerdict::Kind::Inconclusive:
      j["reason"] = v.reason;
      break;
  }
  return j;
}

Json to_json(const ResidualReport& r) {
  Json rows = Json::array();
  for (const auto& p : r.residuals) {
    Json row{{"t", number(p.t)}, {"lhs", number(p.lhs)}, {"rhs", number(p.rhs)},
             {"residual", number(p.residual)}};
    if (!p.error.empty()) row["error"] = p.error;
    rows.push_back(std::move(row));
  }
  return Json{{"verdict", to_string(r.verdict)},
              {"max_residual", number(r.max_residual)},
              {"worst_t", r.worst_t},
              {"threshold", r.threshold},
              {"finite_difference", r.finite_difference},
              {"residuals", std::move(rows)}};
}

Json to_json(const FuncEquality& r) {
  Json j{{"verdict", r.pass ? "Pass" : "Fail"},
         {"compared", r.compared},
         {"max_diff", number(r.max_diff)}};
  if (!r.pass) {
    j["witness"] = r.witness;
    j["reason"] = r.reason;
  }
  return j;
}

Json to_json(const Equality& r) {
  Json j{{"verdict", to_string(r.kind)},
         {"compared", r.compared},
         {"drawn", r.drawn},
         {"max_rel_diff", number(r.max_rel_diff)}};
  if (r.kind == Equality::Kind::NotEqual) {
    j["witness"] = r.witness;
    j["lhs"] = number(r.lhs_value);
    j["rhs"] = number(r.rhs_value);
  }
  return j;
}

std::string format_diagnostic(const Diagnostic& d, std::string_view origin) {
  std::string out = fmt::format("{}:{}:{}: {}[{}]: {}\n", origin, d.span.line, d.span.column,
                                to_string(d.severity), to_string(d.kind), d.message);
  if (d.expected && d.found) {
    out += fmt::format("  expected: {}\n  found:    {}\n", pretty(*d.expected), pretty(*d.found));
  }
  if (d.suggestion) out += fmt::format("  suggestion: {}\n", pretty(*d.suggestion));
  return out;
}

std::string format_limit(const LimitVerdict& v) {
  std::string out = fmt::format("{}\n", to_string(v.kind));
  switch (v.kind) {
    case LimitVerdict::Kind::Verified:
      out += fmt::format("  {:>8}  {}\n", "eps", "delta");
      for (const auto& d : v.deltas) {
        out += fmt::format("  {:>8}  {}\n", format_number(d.eps), format_number(d.delta));
      }
      out += "  (sampled evidence, not a proof)\n";
      break;
    case LimitVerdict::Kind::Refuted:
      out += fmt::format("  eps = {}, witness x = {}, |f x - L| = {}\n", format_number(v.eps),
                         format_number(v.witness), format_number(v.deviation));
      break;
    case LimitVerdict::Kind::Inconclusive:
      out += fmt::format("  {}\n", v.reason);
      break;
  }
  return out;
}

std::string format_report(const ResidualReport& r, bool table) {
  std::string out = fmt::format("{}\n  max residual {} at t = {} (threshold {}{})\n",
                                to_string(r.verdict), format_number(r.max_residual),
                                format_number(r.worst_t), format_number(r.threshold),
                                r.finite_difference ? ", finite-difference lhs" : "");
  if (!table) return out;
  out += fmt::format("  {:>24}  {:>24}  {:>24}  {:>24}\n", "t", "lhs", "rhs", "residual");
  for (const auto& p : r.residuals) {
    if (!p.error.empty()) {
      out += fmt::format("  {:>24}  error: {}\n", format_number(p.t), p.error);
      continue;
    }
    out += fmt::format("  {:>24}  {:>24}  {:>24}  {:>24}\n", format_number(p.t),
                       format_number(p.lhs), format_number(p.rhs), format_number(p.residual));
  }
  return out;
}

}  // namespace mathdsl

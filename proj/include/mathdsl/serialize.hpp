#pragma once

// JSON and plain-text renderings of diagnostics and verdicts. The JSON field
// names are a stable schema: fields may be added, never renamed or removed.

#include "mathdsl/calculus.hpp"
#include "mathdsl/core.hpp"
#include "mathdsl/lagrange.hpp"
#include "mathdsl/numeric.hpp"

#include <string>
#include <string_view>

#include "json.hpp"

namespace mathdsl {

using Json = nlohmann::ordered_json;

// Shortest decimal that reads back as the same double; `inf`, `-inf`, `nan`
// for non-finite values.
std::string format_number(double x);

// Numbers and tuples of numbers; functions print as their closed lambda.
std::string format_value(const Value& v);

Json to_json(const SourceSpan& span);
Json to_json(const Diagnostic& d);
Json to_json(const LimitVerdict& v);
Json to_json(const ResidualReport& r);
Json to_json(const FuncEquality& r);
Json to_json(const Equality& r);

// `origin:line:col: severity[Kind]: message`, then indented suggestion and
// expected/found lines.
std::string format_diagnostic(const Diagnostic& d, std::string_view origin);

// Verdict line, then the per-epsilon delta table or the witness.
std::string format_limit(const LimitVerdict& v);

// Verdict and maximum; with `table` every grid point as a row.
std::string format_report(const ResidualReport& r, bool table);

}  // namespace mathdsl

#pragma once

// The `mathdsl` command line: parse, typecheck, diff, eval, limit, lagrange
// and grammar over `-e` expressions or binding files.
//
// Exit codes: 0 success (Verified, Admissible), 1 findings (diagnostics,
// Refuted, Inconclusive, NotAdmissible), 2 usage or I/O errors.

#include "mathdsl/numeric.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace mathdsl {

// args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// `key = value` lines (tol, seed, samples, eps_grid, fd_step, deltas);
// `#` comments and `[section]` headers are ignored. Throws
// std::invalid_argument on unknown keys or malformed values.
void apply_config_text(std::string_view text, NumericConfig& cfg);

}  // namespace mathdsl

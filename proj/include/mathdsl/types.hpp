#pragma once

// Monomorphic type inference with unification variables, checking mode,
// and elaboration of the traditional d/dt, partial(L)/partial(q) notation.

#include "mathdsl/core.hpp"

#include <map>
#include <string>
#include <vector>

namespace mathdsl {

using TypeEnv = std::map<std::string, Ty, std::less<>>;

enum class StateRole { Time, Coordinate, Velocity };

std::string_view to_string(StateRole role);

struct StateEntry {
  std::string name;
  StateRole role;
};

// Ordered state variables, e.g. t (time), q (coordinate), qdot (velocity).
// Position i (1-based) is the slot differentiated by D[i].
class StateSignature {
 public:
  // Throws DiagnosticError unless there is exactly one time entry and as
  // many velocities as coordinates (at least one of each).
  explicit StateSignature(std::vector<StateEntry> entries);

  // `t,q,qdot` (time, then coordinates, then velocities) or the explicit
  // `t:time,q:coordinate,qdot:velocity`.
  static StateSignature parse(std::string_view text);
  static StateSignature standard() { return parse("t,q,qdot"); }

  const std::vector<StateEntry>& entries() const { return entries_; }
  std::size_t dimension() const { return (entries_.size() - 1) / 2; }
  // 1-based slot of a name, or 0.
  std::size_t index_of(std::string_view name) const;
  const StateEntry* find(std::string_view name) const;

 private:
  std::vector<StateEntry> entries_;
};

struct InferOptions {
  // First unification variable id; varied by the principality tests.
  int meta_base = 0;
  // Keep unresolved unification variables in the result instead of
  // reporting them as ambiguous.
  bool allow_open = false;
};

// Principal type of e. Throws DiagnosticError (TypeMismatch, OccursCheck,
// Ambiguous, FreeVariable) at the first failure.
Ty infer(const Expr& e, const TypeEnv& env = {}, const InferOptions& options = {});

// std::nullopt when e has type `expected`, otherwise the first diagnostic.
std::optional<Diagnostic> check(const Expr& e, const Ty& expected, const TypeEnv& env = {});

// Checks every expression embedded in a formula. Quantified names are real.
std::optional<Diagnostic> check_formula(const Formula& f, const TypeEnv& env = {});

// Equality up to a consistent renaming of unification variables.
bool types_alpha_eq(const Ty& a, const Ty& b);

struct Elaboration {
  Formula formula;
  std::vector<Diagnostic> diagnostics;
};

// Parses `d/dt (partial(L)/partial(qdot)) - partial(L)/partial(q) = 0`.
// Without repair the result is the naive reading, with a NotAVariable note
// for each velocity name and the first type error. With repair it is
// `D(D[3](L) . expand(w)) == D[2](L) . expand(w)`.
Elaboration elaborate_traditional(std::string_view text, const TypeEnv& env,
                                  const StateSignature& sig, bool repair,
                                  const std::string& path = "w");

}  // namespace mathdsl

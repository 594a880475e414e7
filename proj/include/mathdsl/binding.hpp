#pragma once

// Scope analysis: free variables, capture-avoiding substitution,
// alpha-equivalence and diagnosis of implicitly bound names in formulas.

#include "mathdsl/core.hpp"

#include <set>
#include <string>
#include <vector>

namespace mathdsl {

using NameSet = std::set<std::string, std::less<>>;

NameSet free_vars(const Expr& e, const NameSet& ambient = {});
NameSet free_vars(const Formula& f, const NameSet& ambient = {});
NameSet free_vars(const Term& t, const NameSet& ambient = {});

// Every name occurring in e, bound or free.
NameSet all_names(const Expr& e);

// `base` followed by as many primes as needed to avoid every name in `avoid`.
std::string fresh_name(std::string_view base, const NameSet& avoid);

// Capture-avoiding substitution of `replacement` for free occurrences of
// `name`. Binders that would capture a free name of the replacement are
// renamed by priming (x -> x').
Expr subst(const Expr& e, const std::string& name, const Expr& replacement);
Formula subst(const Formula& f, const std::string& name, const Expr& replacement);

// `\t -> (t, w t, D(w) t)` with t fresh for w: the path-to-state lift.
Expr mk_expand(const Expr& path, SourceSpan span = {});

bool alpha_eq(const Expr& a, const Expr& b);
bool alpha_eq(const Formula& a, const Formula& b);
bool alpha_eq(const Term& a, const Term& b);

struct NameOccurrences {
  std::string name;
  std::vector<SourceSpan> spans;
};

struct ScopeReport {
  // Names not bound by a binder or the ambient set, in order of first use.
  std::vector<NameOccurrences> free;
  // Binders that hide an enclosing binder or ambient declaration.
  std::vector<NameOccurrences> shadowed;
  // One ImplicitBinder diagnostic per name, each inserting a single
  // quantifier; the suggestion carries the repaired formula.
  std::vector<Diagnostic> suggestions;
  // FreeVariable errors for names that no implication explains.
  std::vector<Diagnostic> errors;
  // Every suggestion applied together.
  std::optional<Formula> repaired;

  bool empty() const { return free.empty() && shadowed.empty(); }
};

ScopeReport diagnose_implicit_binders(const Formula& f, const NameSet& ambient);

// Scope report for an expression: FreeVariable errors and shadowing only.
ScopeReport scope_report(const Expr& e, const NameSet& ambient);

}  // namespace mathdsl

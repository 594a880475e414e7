#pragma once

// ASCII surface syntax for expressions, formulas and types, and the
// pretty-printer that inverts it. Unicode aliases (λ ∀ ∃ ⇒ ∘ ≤ ≠ ∈ ℝ) are
// accepted on input and never emitted.
//
// Precedence, loosest first:
//
//   formulas     forall/exists  <  =>  (right)  <  &&  (left)  <  !
//   comparisons  <  <=  >  >=  =  /=  ==   `in dom(f)`       (non-associative)
//   expressions  \x ->  <  + -  (left)  <  * /  (left)  <  unary -
//                <  ^  (right)  <  .  (compose, right)  <  application (left)
//
// Parse errors throw DiagnosticError with kind SyntaxError; the diagnostic
// may carry a suggested repair (chained comparisons).

#include "mathdsl/core.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace mathdsl {

Expr parse_expr(std::string_view text);
Formula parse_formula(std::string_view text);
// Formula when the text is one, otherwise an expression.
Term parse_term(std::string_view text);
Ty parse_type(std::string_view text);

// `name = expr` or `name :: formula`; `#` starts a comment.
struct Binding {
  std::string name;
  Term value;
  SourceSpan span;
};

// One binding per line; blank and comment-only lines are skipped. Spans are
// relative to the whole text.
std::vector<Binding> parse_bindings(std::string_view text);

// `name : type` declarations as used by the CLI's --decl flag.
std::pair<std::string, Ty> parse_declaration(std::string_view text);

std::string pretty(const Expr& e);
std::string pretty(const Formula& f);
std::string pretty(const Term& t);
// `R`, `(R, R, R)`, `R -> R`; labels print as `R{T}` only when verbose.
std::string pretty(const Ty& t, bool verbose = false);

bool is_identifier(std::string_view name);
bool is_reserved(std::string_view name);

// EBNF of the surface syntax.
std::string_view grammar_text();

}  // namespace mathdsl

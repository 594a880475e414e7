"""Typed DSL for mathematical analysis."""

from ._core import (
    DiagnosticError,
    alpha_eq,
    check_limit,
    check_path,
    diagnose_implicit_binders,
    differentiate,
    elaborate_traditional,
    evaluate,
    expr_equal,
    free_vars,
    infer,
    numeric_limit,
    pretty,
    run_cli,
    simplify,
    substitute,
)

__all__ = [
    "DiagnosticError",
    "alpha_eq",
    "check_limit",
    "check_path",
    "diagnose_implicit_binders",
    "differentiate",
    "elaborate_traditional",
    "evaluate",
    "expr_equal",
    "free_vars",
    "infer",
    "numeric_limit",
    "pretty",
    "run_cli",
    "simplify",
    "substitute",
]

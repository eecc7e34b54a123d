"""Expression kernel: parsing, exact differentiation and evaluation of metric components."""

from .expr import (
    NODE_CAP,
    DomainError,
    Expr,
    ExprError,
    NodeCapExceeded,
    NotRational,
    add,
    compile_exprs,
    const,
    diff,
    eval_exact,
    eval_float,
    evaluate,
    fold,
    inv,
    mul,
    neg,
    node_count,
    power,
    to_string,
    var,
)
from .derivs import DerivativeTable, monomial_index, monomials, n_monomials
from .parser import MetricFileError, MetricSpec, ParseError, metric_from_exprs, parse_expr, parse_metric

__all__ = [
    "NODE_CAP",
    "DerivativeTable",
    "DomainError",
    "Expr",
    "ExprError",
    "MetricFileError",
    "MetricSpec",
    "NodeCapExceeded",
    "NotRational",
    "ParseError",
    "add",
    "compile_exprs",
    "const",
    "diff",
    "eval_exact",
    "eval_float",
    "evaluate",
    "fold",
    "inv",
    "metric_from_exprs",
    "monomial_index",
    "monomials",
    "mul",
    "n_monomials",
    "neg",
    "node_count",
    "parse_expr",
    "parse_metric",
    "power",
    "to_string",
    "var",
]

"""Symbolic expression core: nodes, parsing, calculus, rendering, evaluation."""

from .calculus import depends_on, diff_multi, differentiate, free_symbols, substitute
from .compile import Program, compile_exprs
from .emit import emit
from .evaluate import Assignment, evaluate
from .nodes import (
    HALF,
    MINUS_ONE,
    ONE,
    ZERO,
    Const,
    Deriv,
    Expr,
    Func,
    Power,
    Product,
    Sum,
    Var,
    add,
    as_expr,
    const,
    deriv,
    div,
    func,
    mul,
    neg,
    power,
    sub,
    var,
    walk,
)
from .parser import parse
from .poly import TooLarge, collect, together
from .zero import SampleDomain, ZeroTest, is_zero, sample_points


def simplify(e, positive=()) -> Expr:
    """Best-effort normal form; always semantically equal to ``e``.

    Puts ``e`` over a common denominator and cancels exact factors.  Falls back
    to the constructor-level canonical form when expansion would be too large.
    ``positive`` names variables that may be assumed strictly positive.
    """
    e = as_expr(e)
    try:
        return together(e, positive)
    except TooLarge:
        return e


__all__ = [
    "Assignment", "Const", "Deriv", "Expr", "Func", "HALF", "MINUS_ONE", "ONE", "Power",
    "Product", "Program", "SampleDomain", "Sum", "Var", "ZERO", "ZeroTest", "add", "as_expr",
    "collect", "compile_exprs", "const", "depends_on", "deriv", "diff_multi", "differentiate",
    "div", "emit", "evaluate", "free_symbols", "func", "is_zero", "mul", "neg", "parse",
    "power", "sample_points", "simplify", "sub", "substitute", "together", "var", "walk",
]

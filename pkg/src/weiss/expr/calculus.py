"""Exact differentiation and substitution over expression DAGs."""

from __future__ import annotations

from functools import lru_cache
from typing import Mapping

from .nodes import (
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
    func,
    mul,
    power,
    rebuild,
    walk,
)


def free_symbols(e: Expr) -> frozenset:
    """Variables, parameters and unknown-function names occurring in ``e``."""
    return e.free_symbols


def depends_on(e: Expr, var: str) -> bool:
    return var in e.vars or bool(e.funcs)


@lru_cache(maxsize=1 << 18)
def _d(e: Expr, v: str) -> Expr:
    if isinstance(e, Deriv):
        return deriv(e.func, e.orders + ((v, 1),))
    if v not in e.vars and not e.funcs:
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == v else ZERO
    if isinstance(e, Sum):
        return add(*(_d(t, v) for t in e.terms))
    if isinstance(e, Product):
        fs = e.factors
        terms = []
        for i, f in enumerate(fs):
            df = _d(f, v)
            if df is ZERO:
                continue
            terms.append(mul(*fs[:i], df, *fs[i + 1:]))
        return add(*terms)
    if isinstance(e, Power):
        b, x = e.base, e.exp
        db = _d(b, v)
        if isinstance(x, Const):
            # D(A^m) = m A^(m-1) DA
            if db is ZERO:
                return ZERO
            return mul(x, power(b, const(x.value - 1)), db)
        dx = _d(x, v)
        return mul(e, add(mul(dx, func("log", b)), mul(x, db, power(b, MINUS_ONE))))
    if isinstance(e, Func):
        du = _d(e.arg, v)
        if du is ZERO:
            return ZERO
        u = e.arg
        if e.name == "exp":
            return mul(e, du)
        if e.name == "log":
            return mul(du, power(u, MINUS_ONE))
        if e.name == "sin":
            return mul(func("cos", u), du)
        if e.name == "cos":
            return mul(MINUS_ONE, func("sin", u), du)
    raise TypeError(f"cannot differentiate {type(e).__name__}")


def differentiate(e, var: str, times: int = 1) -> Expr:
    """Exact partial derivative of ``e`` with respect to ``var``.

    Unknown functions depend on every variable, so a derivative atom always
    picks up one more order in ``var``.
    """
    e = as_expr(e)
    for _ in range(times):
        e = _d(e, var)
    return e


def diff_multi(e: Expr, orders) -> Expr:
    for v, k in orders:
        e = differentiate(e, v, k)
    return e


def substitute(e, bindings: Mapping[str, object]) -> Expr:
    """Simultaneous substitution.

    Keys are variable names or unknown-function names.  Binding an unknown
    function to a closed form replaces every derivative atom of it by the
    matching derivative of that closed form.
    """
    e = as_expr(e)
    bound = {k: as_expr(v) for k, v in bindings.items()}
    if not bound:
        return e
    names = frozenset(bound)
    memo: dict[int, Expr] = {}
    for node in walk(e):
        if not (node.vars & names or node.funcs & names):
            memo[id(node)] = node
            continue
        if isinstance(node, Var):
            out = bound[node.name]
        elif isinstance(node, Deriv):
            out = diff_multi(bound[node.func], node.orders) if node.func in bound else node
        else:
            out = rebuild(node, [memo[id(a)] for a in node.args])
        memo[id(node)] = out
    return memo[id(e)]

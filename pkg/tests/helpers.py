"""Shared oracles and generators for the test suite."""

import random
from fractions import Fraction

import sympy
from hypothesis import strategies as st

from weiss.expr import (
    SampleDomain,
    add,
    const,
    emit,
    func,
    is_zero,
    mul,
    parse,
    power,
    var,
)

X, Y = var("x"), var("y")
BOX = SampleDomain.box(["x", "y"], 1.0, 2.0)


def to_sympy(e):
    """Independent oracle: re-read the plain rendering with sympy."""
    text = emit(e).replace("^", "**")
    return sympy.sympify(text, locals={n: sympy.Symbol(n) for n in _names(text)})


def _names(text):
    import re

    return set(re.findall(r"[A-Za-z_][A-Za-z0-9_]*", text)) - {"exp", "log", "sin", "cos", "sqrt"}


def sym_equal(e, expected, points=((1.3, 1.7), (1.9, 1.1), (1.5, 1.5))):
    """Compare against a sympy expression at a few points in x, y."""
    x, y = sympy.symbols("x y")
    got = to_sympy(e)
    want = sympy.sympify(expected) if isinstance(expected, str) else expected
    for px, py in points:
        a = complex(got.subs({x: px, y: py}).evalf())
        b = complex(want.subs({x: px, y: py}).evalf())
        if abs(a - b) > 1e-9 * (1 + abs(b)):
            return False
    return True


def zero(e, dom=BOX, tol=1e-10, samples=32, seed=42):
    return bool(is_zero(e, dom, samples, tol, seed))


# smooth on the box [1, 2]^2: fractional powers and logs only see positive arguments
def _leaf():
    return st.one_of(
        st.sampled_from([X, Y]),
        st.fractions(min_value=-3, max_value=3, max_denominator=5).map(const),
    )


def _positive(e):
    return add(const(3), mul(e, e))


def _extend(children):
    return st.one_of(
        st.lists(children, min_size=2, max_size=3).map(lambda xs: add(*xs)),
        st.lists(children, min_size=2, max_size=3).map(lambda xs: mul(*xs)),
        st.tuples(children, st.integers(-2, 3)).map(lambda t: power(_positive(t[0]), const(t[1]))),
        st.tuples(children, st.sampled_from([Fraction(1, 2), Fraction(-1, 2), Fraction(2, 3)]))
        .map(lambda t: power(_positive(t[0]), const(t[1]))),
        children.map(lambda c: func("sin", c)),
        children.map(lambda c: func("cos", c)),
        children.map(lambda c: func("log", _positive(c))),
        children.map(lambda c: func("exp", mul(const(Fraction(1, 4)), func("sin", c)))),
    )


expressions = st.recursive(_leaf(), _extend, max_leaves=8)


def random_expression(rng: random.Random, depth: int = 3):
    """Plain-Python generator of smooth expressions in x, y (for fixed-seed suites)."""
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.7:
            return rng.choice([X, Y])
        return const(Fraction(rng.randint(-6, 6), rng.randint(1, 3)))
    kind = rng.randrange(7)
    a = random_expression(rng, depth - 1)
    b = random_expression(rng, depth - 1)
    if kind == 0:
        return add(a, b)
    if kind == 1:
        return mul(a, b)
    if kind == 2:
        return power(_positive(a), const(rng.choice([-2, -1, 2, 3])))
    if kind == 3:
        return power(_positive(a), const(rng.choice([Fraction(1, 2), Fraction(-3, 2), Fraction(1, 3)])))
    if kind == 4:
        return func(rng.choice(["sin", "cos"]), a)
    if kind == 5:
        return func("log", _positive(a))
    return func("exp", mul(const(Fraction(1, 3)), func("cos", a)))


def smooth_expression(rng: random.Random, depth: int = 3):
    """Like :func:`random_expression`, but every power base and function argument
    is bounded (``2 + sin(a)`` lies in [1, 3]), so derivatives stay moderate and
    a step of 1e-4 resolves the function."""
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.7:
            return rng.choice([X, Y])
        return const(Fraction(rng.randint(-6, 6), rng.randint(1, 3)))
    kind = rng.randrange(6)
    a = smooth_expression(rng, depth - 1)
    b = smooth_expression(rng, depth - 1)
    bounded = add(const(2), func("sin", a))
    if kind == 0:
        return add(a, b)
    if kind == 1:
        return mul(a, b)
    if kind == 2:
        exps = [-2, -1, 2, 3, Fraction(1, 2), Fraction(-3, 2), Fraction(1, 3)]
        return power(bounded, const(rng.choice(exps)))
    if kind == 3:
        return func(rng.choice(["sin", "cos"]), func("sin", a))
    if kind == 4:
        return func("log", bounded)
    return func("exp", mul(const(Fraction(1, 2)), func("cos", a)))


__all__ = ["BOX", "X", "Y", "expressions", "parse", "random_expression", "smooth_expression", "sym_equal", "to_sympy", "zero"]

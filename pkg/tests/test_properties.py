"""Calculus identities checked by the zero test on generated expressions."""

import random
from fractions import Fraction

from hypothesis import given
from hypothesis import strategies as st

from helpers import X, Y, expressions, zero
from weiss.expr import add, const, differentiate, evaluate, mul, power, sub
from weiss.verify import fd_convergence, fd_crosscheck

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=7).map(const)


@given(expressions, expressions, rationals, rationals, st.sampled_from(["x", "y"]))
def test_linearity(f, g, a, b, v):
    lhs = differentiate(add(mul(a, f), mul(b, g)), v)
    rhs = add(mul(a, differentiate(f, v)), mul(b, differentiate(g, v)))
    assert zero(sub(lhs, rhs))


@given(expressions, expressions, st.sampled_from(["x", "y"]))
def test_leibniz(f, g, v):
    lhs = differentiate(mul(f, g), v)
    rhs = add(mul(f, differentiate(g, v)), mul(g, differentiate(f, v)))
    assert zero(sub(lhs, rhs))


@given(st.integers(-3, 3).filter(bool), st.lists(st.integers(-3, 3), min_size=6, max_size=6))
def test_power_rule(m, cs):
    monos = [const(1), X, Y, mul(X, X), mul(X, Y), mul(Y, Y)]
    A = add(const(5), *(mul(const(c), t) for c, t in zip(cs, monos)))
    dom_ok = add(A)  # A may vanish on the box; guard it away from zero
    from helpers import BOX

    dom = BOX.with_guards(dom_ok)
    lhs = differentiate(power(A, const(m)), "x")
    rhs = mul(const(m), power(A, const(m - 1)), differentiate(A, "x"))
    assert zero(sub(lhs, rhs), dom)


@given(expressions, st.floats(1.2, 1.8), st.floats(1.2, 1.8))
def test_fd_consistency(e, px, py):
    point = {"x": px, "y": py}
    h = 1e-4
    fd = fd_crosscheck(e, "x", point, h)
    # Taylor remainder of the central difference, plus cancellation noise
    third = abs(evaluate(differentiate(e, "x", 3), point))
    bound = 1.5 * h * h / 6 * third + 1e-11 * (1 + abs(evaluate(e, point))) / h
    assert fd.abs_diff <= bound
    ratio, ok = fd_convergence(e, "x", point, 1e-3)
    assert ok, ratio


def test_fd_ratio_is_quadratic_on_a_curved_function():
    e = power(add(X, Y), const(Fraction(-1, 2)))
    ratio, ok = fd_convergence(e, "y", {"x": 1.0, "y": 1.0}, 1e-2)
    assert ok and 90 < ratio < 110


def test_generator_is_reproducible():
    from helpers import random_expression

    a = [random_expression(random.Random(3)) for _ in range(3)]
    b = [random_expression(random.Random(3)) for _ in range(3)]
    assert a == b

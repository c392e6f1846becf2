import random
from fractions import Fraction

import pytest
import sympy

from helpers import BOX, sym_equal, zero
from weiss.diffop import (
    DirectionalOperator,
    apply,
    apply_power,
    apply_weiss,
    build_weiss,
    divide_common_factor,
    expand_pde,
    normal_form,
    pre_schwarzian,
    q_potential,
)
from weiss.errors import DegenerateProducingFunction, NonlinearOperator
from weiss.expr import SampleDomain, add, const, deriv, differentiate, emit, mul, parse, sub, substitute
from weiss.nullspace import random_polynomial

XY = ["x", "y"]
E1 = DirectionalOperator.from_strings(XY, ["1", "-1"])
LP = DirectionalOperator.from_strings(XY, ["1", "x^2"])
NP = DirectionalOperator.from_strings(XY, ["-psi", "psi"])
NP_DOM = SampleDomain({"x": (0, 1), "y": (2, 3)})
XYZ = ["x", "y", "z"]
IP = DirectionalOperator.from_strings(XYZ, ["1", "1", "psi"])
IP_DOM = SampleDomain.box(XYZ, 1, 2)


def P(text, variables=XY):
    return parse(text, variables)


def test_operator_validation():
    with pytest.raises(ValueError):
        DirectionalOperator(("x", "y"), (const(1),))
    with pytest.raises(ValueError):
        DirectionalOperator((), ())
    assert E1.is_linear and not NP.is_linear


def test_apply_examples():
    assert zero(sub(apply(E1, P("x/y")), P("(x+y)/y^2")))
    assert zero(sub(apply(LP, P("x+y")), P("1+x^2")))
    assert apply(LP, const(5)) is const(0)


def test_apply_power_examples():
    assert zero(sub(apply_power(E1, P("x/y"), 2), P("2*(x+y)/y^3")))
    assert zero(sub(apply_power(LP, P("x+y"), 2), P("2*x")))
    assert apply_power(LP, P("x*y"), 1) is apply(LP, P("x*y"))
    with pytest.raises(ValueError):
        apply_power(LP, P("x"), 0)


def test_pre_schwarzian_examples():
    assert emit(pre_schwarzian(E1, P("x/y"))) == "2/y"
    assert emit(pre_schwarzian(LP, P("x+y"))) == "2*x/(1+x^2)"
    assert zero(sub(pre_schwarzian(NP, P("y-x"), NP_DOM), P("psi_y - psi_x")), NP_DOM)


@pytest.mark.parametrize("phi", ["7", "x+y"])
def test_degenerate_producing_function(phi):
    with pytest.raises(DegenerateProducingFunction):
        pre_schwarzian(E1, P(phi))


def test_q_potential_examples():
    assert zero(sub(q_potential(LP, P("x+y")), P("(1-2*x^2)/(1+x^2)^2")))
    assert q_potential(E1, P("x/y")) is const(0)
    qcof = P("psi*psi_xx/2 + psi*psi_yy/2 - psi*psi_xy - psi_y^2/4 + psi_x*psi_y/2 - psi_x^2/4")
    assert zero(sub(q_potential(NP, P("y-x"), NP_DOM), qcof), NP_DOM)


def test_build_weiss_factor_order():
    assert build_weiss(E1, P("x/y"), 0).factors == (0,)
    L = build_weiss(E1, P("x/y"), 1)
    assert L.factors == (Fraction(-1, 2), Fraction(1, 2))
    assert build_weiss(E1, P("x/y"), 2).factors == (-1, 0, 1)
    assert build_weiss(E1, P("x/y"), 4).factors == (-2, -1, 0, 1, 2)
    with pytest.raises(ValueError):
        build_weiss(E1, P("x/y"), -1)
    with pytest.raises(ValueError):
        build_weiss(E1, P("x/y"), 17)


def test_apply_weiss_examples():
    L = build_weiss(E1, P("x/y"), 1)
    dom = BOX.with_intervals({"c0": (-2, 2), "c1": (-2, 2)})
    assert zero(apply_weiss(L, P("(c0*y + c1*x)/sqrt(x+y)")), dom)
    assert apply_weiss(build_weiss(E1, P("x/y"), 0), const(1)) is const(0)
    assert zero(apply_weiss(build_weiss(LP, P("x+y"), 1), P("(x+y)/sqrt(1+x^2)")))


def test_factors_applied_right_to_left():
    # with the order reversed the same factors do not annihilate the null function
    L = build_weiss(LP, P("x+y"), 1)
    f = P("(x+y)/sqrt(1+x^2)")
    swapped = L.replace(factors=tuple(reversed(L.factors)))
    assert zero(apply_weiss(L, f))
    assert not zero(apply_weiss(swapped, f))


def test_normal_form_examples():
    nf = normal_form(build_weiss(E1, P("x/y"), 1))
    assert {k: emit(v) for k, v in nf.coeffs.items()} == {(2, 0): "1", (1, 1): "-2", (0, 2): "1", (0, 0): "0"}
    D = DirectionalOperator.from_strings(["x"], ["1"])
    nf = normal_form(build_weiss(D, parse("x"), 1))
    assert {k: emit(v) for k, v in nf.coeffs.items()} == {(2,): "1", (0,): "0"}


def test_normal_form_rejects_nonlinear():
    with pytest.raises(NonlinearOperator):
        normal_form(build_weiss(NP, P("y-x"), 1, NP_DOM))


@pytest.mark.parametrize("seed", range(5))
def test_normal_form_faithful(seed):
    rng = random.Random(seed)
    L = build_weiss(LP, P("x+y"), rng.randint(0, 3))
    f = random_polynomial(rng, XY, 3)
    nf = normal_form(L)
    assert zero(sub(nf.apply(f), apply_weiss(L, f)))


def test_expand_pde_examples():
    lp = expand_pde(build_weiss(LP, P("x+y"), 1))
    paper = P("psi_xx + 2*x^2*psi_xy + x^4*psi_yy + 2*x*psi_y + (1-2*x^2)/(1+x^2)^2*psi")
    assert zero(sub(lp, paper), BOX, tol=1e-10)
    D = DirectionalOperator.from_strings(["x"], ["1"])
    assert expand_pde(build_weiss(D, parse("x"), 1)) is parse("psi_xx", ["x"])


def test_npde_paper_form():
    raw = expand_pde(build_weiss(NP, P("y-x"), 1, NP_DOM))
    paper = P("psi*psi_xx + psi*psi_yy - 2*psi*psi_xy + psi_x^2/2 + psi_y^2/2 - psi_x*psi_y")
    # the raw expansion is (3/2) psi times the paper's equation
    assert zero(sub(raw, mul(const(Fraction(3, 2)), deriv("psi"), paper)), NP_DOM)
    assert zero(sub(divide_common_factor(raw, "psi", XY), paper), NP_DOM)


def _random_linear_operator(rng, dims):
    vs = XYZ[:dims]
    coeffs = [random_polynomial(rng, vs, rng.randint(0, 2), 1, 3) for _ in vs]
    coeffs = [c if c is not const(0) else const(1) for c in coeffs]
    return DirectionalOperator(tuple(vs), tuple(coeffs)), vs


def _draw_phi(rng, D, vs):
    dom = SampleDomain.box(vs, 1, 2)
    while True:
        phi = random_polynomial(rng, vs, 2)
        dphi = apply(D, phi)
        try:
            build_weiss(D, phi, 1, dom)
        except DegenerateProducingFunction:
            continue
        return phi, dom.with_guards(dphi)


@pytest.mark.parametrize("seed", range(6))
def test_factorization_identities(seed):
    rng = random.Random(seed)
    D, vs = _random_linear_operator(rng, rng.randint(1, 3))
    phi, dom = _draw_phi(rng, D, vs)
    f = random_polynomial(rng, vs, 3)
    L2 = build_weiss(D, phi, 1, dom)
    Q = L2.Q
    assert zero(sub(apply_weiss(L2, f), add(apply_power(D, f, 2), mul(Q, f))), dom, tol=1e-9)
    L3 = build_weiss(D, phi, 2, dom)
    Df = apply(D, f)
    want = add(apply_power(D, f, 3), mul(const(4), Q, Df), mul(const(2), f, apply(D, Q)))
    assert zero(sub(apply_weiss(L3, f), want), dom, tol=1e-9)


@pytest.mark.parametrize("seed", range(6))
def test_pre_schwarzian_consistency(seed):
    rng = random.Random(100 + seed)
    D, vs = _random_linear_operator(rng, rng.randint(1, 3))
    phi, dom = _draw_phi(rng, D, vs)
    V = pre_schwarzian(D, phi, dom)
    assert zero(sub(mul(V, apply(D, phi)), apply_power(D, phi, 2)), dom, tol=1e-9)


@pytest.mark.parametrize("seed", range(4))
def test_xi_reduction(seed):
    rng = random.Random(200 + seed)
    vs = XYZ[: rng.randint(1, 3)]
    F = random_polynomial(rng, vs, 2, 1, 3)
    cs = [const(rng.choice([-3, -2, -1, 1, 2, 3])) for _ in vs]
    D = DirectionalOperator(tuple(vs), tuple(mul(F, c) for c in cs))
    Dc = DirectionalOperator(tuple(vs), tuple(cs))
    phi = random_polynomial(rng, vs, 3)
    assert zero(sub(apply(D, phi), mul(F, apply(Dc, phi))), SampleDomain.box(vs, 1, 2))


def test_classical_schwarzian_by_sympy():
    x = sympy.Symbol("x")
    phi = x**3 + 2 * x + 1
    V = sympy.diff(phi, x, 2) / sympy.diff(phi, x)
    S = sympy.diff(V, x) - V**2 / 2
    D = DirectionalOperator.from_strings(["x"], ["1"])
    nf = normal_form(build_weiss(D, parse("x^3 + 2*x + 1", ["x"]), 1))
    assert sym_equal(nf[(0,)], S / 2, points=((1.2, 0), (1.7, 0)))


def test_ipde_pde_identity():
    L3 = build_weiss(IP, P("x-y+z", XYZ), 2, IP_DOM)
    psi = deriv("psi")
    D = L3.D
    Q = L3.Q
    want = add(apply_power(D, psi, 3), mul(const(4), Q, apply(D, psi)), mul(const(2), psi, apply(D, Q)))
    dom = IP_DOM.with_guards(psi)
    assert zero(sub(expand_pde(L3), want), dom, tol=1e-10)
    assert zero(sub(L3.V, P("(psi_x + psi_y + psi*psi_z)/psi", XYZ)), dom)

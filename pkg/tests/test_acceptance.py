"""Acceptance criteria 1-9; each prints one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` or directly as a script.
"""

import random
import sys
import time
from fractions import Fraction

import pytest
import sympy

from helpers import smooth_expression
from weiss.diffop import (
    DirectionalOperator,
    apply,
    apply_power,
    build_weiss,
    divide_common_factor,
    expand_pde,
    normal_form,
)
from weiss.errors import DegenerateProducingFunction
from weiss.expr import SampleDomain, add, const, deriv, differentiate, emit, evaluate, is_zero, mul, parse, power, sub
from weiss.nullspace import (
    check_instance,
    flip_factor,
    general_null,
    random_instance,
    random_polynomial,
    solve_self_consistent,
    verify_solution,
    wrong_v,
)
from weiss.verify import fd_convergence, fd_crosscheck, residual_check

XY = ["x", "y"]
XYZ = ["x", "y", "z"]
SUITE_SEED = 2026
SUITE_SIZE = 100


class Criterion:
    """Collects named sub-checks; ``ok`` only if every one held."""

    def __init__(self, number, title):
        self.number, self.title = number, title
        self.failed = []
        self.notes = []

    def check(self, name, cond):
        if not cond:
            self.failed.append(name)
        return cond

    def zero(self, name, e, dom, tol, samples=32):
        z = is_zero(e, dom, samples, tol)
        self.check(name, z.passed and len(z.points) == samples)
        return z

    def line(self):
        verdict = "PASS" if not self.failed else "FAIL"
        detail = "; ".join(self.notes)
        if self.failed:
            detail = "failed: " + ", ".join(self.failed) + ("; " + detail if detail else "")
        return f"criterion {self.number} [{self.title}]: {verdict}" + (f" ({detail})" if detail else "")


def P(text, variables=XY):
    return parse(text, variables)


def criterion_1():
    c = Criterion(1, "example e1-e5")
    D = DirectionalOperator.from_strings(XY, ["1", "-1"])
    phi = P("x/y")
    box = SampleDomain.box(XY, 1, 2)
    c.zero("Dphi", sub(apply(D, phi), P("(x+y)/y^2")), box, 1e-10)
    c.zero("D2phi", sub(apply_power(D, phi, 2), P("2*(x+y)/y^3")), box, 1e-10)
    L = build_weiss(D, phi, 1, box)
    c.zero("V", sub(L.V, P("2/y")), box, 1e-10)
    c.zero("Q", L.Q, box, 1e-10)
    nf = normal_form(L)
    c.check("normal form", {k: emit(v) for k, v in nf.coeffs.items()}
            == {(2, 0): "1", (1, 1): "-2", (0, 2): "1", (0, 0): "0"})
    f = general_null(D, phi, 1, ["c0", "c1"], box).expr
    pdom = box.with_intervals({"c0": (-2, 2), "c1": (-2, 2)})
    c.zero("solution", sub(f, P("(c0*y + c1*x)/sqrt(x+y)")), pdom, 1e-10)
    r = residual_check(expand_pde(L), "psi", P("(y + 2*x)/sqrt(x+y)"), box, 32, 1e-8)
    c.check("residual", r.passed)
    c.notes.append(f"max residual {r.max_residual:.1e}")
    return c


def criterion_2():
    c = Criterion(2, "linear example lpde")
    D = DirectionalOperator.from_strings(XY, ["1", "x^2"])
    box = SampleDomain.box(XY, 1, 2)
    L = build_weiss(D, P("x+y"), 1, box)
    c.zero("V", sub(L.V, P("2*x/(1+x^2)")), box, 1e-10)
    c.zero("Q", sub(L.Q, P("(1-2*x^2)/(1+x^2)^2")), box, 1e-10)
    paper = P("psi_xx + 2*x^2*psi_xy + x^4*psi_yy + 2*x*psi_y + (1-2*x^2)/(1+x^2)^2*psi")
    c.zero("pde", sub(expand_pde(L), paper), box, 1e-10)
    r = verify_solution(D, P("x+y"), 1, "(c0 + c1*(x+y))/sqrt(1+x^2)", box, tol=1e-8)
    c.check("solution", r.passed)
    c.notes.append(f"max residual {r.max_residual:.1e} at c={r.parameters}")
    return c


def criterion_3():
    c = Criterion(3, "nonlinear n=1 npde")
    D = DirectionalOperator.from_strings(XY, ["-psi", "psi"])
    dom = SampleDomain({"x": (0, 1), "y": (2, 3)})
    L = build_weiss(D, P("y-x"), 1, dom)
    c.zero("Dphi", sub(apply(D, P("y-x")), P("2*psi")), dom, 1e-10)
    c.zero("V", sub(L.V, P("psi_y - psi_x")), dom, 1e-10)
    qcof = P("psi*psi_xx/2 + psi*psi_yy/2 - psi*psi_xy - psi_y^2/4 + psi_x*psi_y/2 - psi_x^2/4")
    c.zero("Q", sub(L.Q, qcof), dom, 1e-10)
    sol = solve_self_consistent(D, P("y-x"), 1, ["c0", "c1"], dom)
    pdom = dom.with_intervals({"c0": (1, 2), "c1": (1, 2)})
    c.check("one branch", len(sol.branches) == 1)
    c.zero("branch", sub(sol.branches[0], P("(c0 + c1*(y-x))^(2/3)/2^(1/3)")), pdom, 1e-10)
    npde = P("psi*psi_xx + psi*psi_yy - 2*psi*psi_xy + psi_x^2/2 + psi_y^2/2 - psi_x*psi_y")
    c.zero("paper form", sub(divide_common_factor(expand_pde(L), "psi", XY), npde), dom, 1e-10)
    cand = P("(1 + (y-x))^(2/3)/2^(1/3)")
    r = residual_check(npde, "psi", cand, dom.with_guards(P("1 + (y-x)")), 32, 1e-8)
    c.check("residual", r.passed)
    c.notes.append(f"max residual {r.max_residual:.1e}")
    return c


def criterion_4():
    c = Criterion(4, "nonlinear n=2 ipde")
    D = DirectionalOperator.from_strings(XYZ, ["1", "1", "psi"])
    phi = P("x-y+z", XYZ)
    dom = SampleDomain.box(XYZ, 1, 2)
    L = build_weiss(D, phi, 2, dom)
    psi = deriv("psi")
    c.zero("Dphi", sub(apply(D, phi), psi), dom, 1e-10)
    want = add(apply_power(D, psi, 3), mul(const(4), L.Q, apply(D, psi)), mul(const(2), psi, apply(D, L.Q)))
    c.zero("pde", sub(expand_pde(L), want), dom.with_guards(psi), 1e-10)
    sol = solve_self_consistent(D, phi, 2, ["c0", "c1", "c2"], dom)
    c.check("two branches", len(sol.branches) == 2)
    worst = 0.0
    for i, b in enumerate(sol.branches):
        r = verify_solution(D, phi, 2, b, dom, tol=1e-8, params={"c0": 1, "c1": 1, "c2": 1})
        c.check(f"branch {i + 1}", r.passed)
        worst = max(worst, r.max_residual or 0.0)
    c.notes.append(f"max residual {worst:.1e}")
    return c


def _schwarzian(phi_text):
    """S = phi'''/phi' - 3/2 (phi''/phi')^2, computed by sympy and read back."""
    x = sympy.Symbol("x")
    phi = sympy.sympify(phi_text.replace("^", "**"))
    p1, p2, p3 = (sympy.diff(phi, x, k) for k in (1, 2, 3))
    S = p3 / p1 - sympy.Rational(3, 2) * (p2 / p1) ** 2
    Sx = sympy.diff(S, x)
    return parse(str(S).replace("**", "^"), ["x"]), parse(str(Sx).replace("**", "^"), ["x"])


def _random_cubic(rng):
    x = sympy.Symbol("x")
    while True:
        cs = [rng.randint(-4, 4) for _ in range(4)]
        if cs[3] == 0:
            continue
        phi = sum(cc * x**k for k, cc in enumerate(cs))
        d = sympy.lambdify(x, sympy.diff(phi, x))
        if min(abs(d(1 + i / 200)) for i in range(201)) > 0.1:
            return str(phi).replace("**", "^")


def criterion_5():
    c = Criterion(5, "classical degeneration")
    rng = random.Random(5)
    D = DirectionalOperator.from_strings(["x"], ["1"])
    dom = SampleDomain({"x": (1, 2)})
    for i in range(10):
        text = _random_cubic(rng)
        phi = parse(text, ["x"])
        S, Sx = _schwarzian(text)
        nf2 = normal_form(build_weiss(D, phi, 1, dom))
        c.check(f"L2 top #{i}", emit(nf2[(2,)]) == "1" and nf2[(1,)] is const(0))
        c.zero(f"L2 S/2 #{i}", sub(nf2[(0,)], mul(const(Fraction(1, 2)), S)), dom, 1e-8)
        nf3 = normal_form(build_weiss(D, phi, 2, dom))
        c.check(f"L3 top #{i}", emit(nf3[(3,)]) == "1" and nf3[(2,)] is const(0))
        c.zero(f"L3 2S #{i}", sub(nf3[(1,)], mul(const(2), S)), dom, 1e-8)
        c.zero(f"L3 S_x #{i}", sub(nf3[(0,)], Sx), dom, 1e-8)
    c.notes.append("10 cubics")
    return c


def criterion_6():
    c = Criterion(6, "one-dimensional a(x) reduction")
    rng = random.Random(6)
    done = 0
    while done < 10:
        a = random_polynomial(rng, ["x"], 2, 1, 3)
        phi = random_polynomial(rng, ["x"], 3)
        if a is const(0):
            continue
        dom = SampleDomain({"x": (1, 2)}, guards=(a, differentiate(phi, "x")))
        D = DirectionalOperator(("x",), (a,))
        try:
            nf = normal_form(build_weiss(D, phi, 1, dom))
            is_zero(const(0), dom)  # the guards must leave room to sample
        except Exception:
            continue
        ax = differentiate(a, "x")
        p1, p2 = differentiate(phi, "x"), differentiate(phi, "x", 2)
        V = add(ax, mul(a, p2, power(p1, const(-1))))
        zeroth = sub(mul(const(Fraction(1, 2)), a, differentiate(V, "x")), mul(const(Fraction(1, 4)), V, V))
        c.zero(f"a^2 #{done}", sub(nf[(2,)], mul(a, a)), dom, 1e-8)
        c.zero(f"a a_x #{done}", sub(nf[(1,)], mul(a, ax)), dom, 1e-8)
        c.zero(f"potential #{done}", sub(nf[(0,)], zeroth), dom, 1e-8)
        done += 1
    c.notes.append("10 pairs")
    return c


def _suite(mutate=None, stop_on_failure=False):
    results = []
    for t in range(SUITE_SIZE):
        res = check_instance(random_instance(SUITE_SEED, t), tol=1e-7, mutate=mutate)
        results.append(res)
        if stop_on_failure and not res.passed:
            break
    return results


def criterion_7():
    c = Criterion(7, "theorem property suite")
    start = time.perf_counter()
    results = _suite()
    passed = sum(r.passed for r in results)
    traces = sum(len(r.telescoped) for r in results)
    worst = max((max(r.residuals) for r in results if r.residuals), default=0.0)
    c.check("all instances", passed == len(results))
    c.notes.append(f"{passed}/{len(results)} instances, {traces} telescoping traces, worst residual {worst:.1e}, "
                   f"{time.perf_counter() - start:.0f}s")
    for r in results:
        if not r.passed:
            c.notes.append("failing " + r.instance.describe())
    return c


def criterion_8():
    c = Criterion(8, "mutation sensitivity")
    mutations = [(f"flip factor {j}", flip_factor(j)) for j in range(5)] + [("V -> D2phi*Dphi", wrong_v)]
    caught = []
    for name, m in mutations:
        # a flip only mutates instances where bracket j exists with a nonzero coefficient
        results = _suite(mutate=m, stop_on_failure=True)
        hit = any(not r.passed for r in results)
        c.check(name, hit)
        if hit:
            caught.append(f"{name}@trial {len(results) - 1}")
    c.notes.append(", ".join(caught))
    return c


def criterion_9():
    c = Criterion(9, "finite-difference validation")
    rng = random.Random(2026)
    worst_abs = worst_rel = 0.0
    ratios = []
    skipped = 0
    while len(ratios) < 50:
        i = len(ratios)
        e = smooth_expression(rng, 3)
        point = {"x": rng.uniform(1.2, 1.8), "y": rng.uniform(1.2, 1.8)}
        v = rng.choice(XY)
        ratio, ok = fd_convergence(e, v, point, 1e-3)
        if ratio is None:
            # central differences are exact on quadratics: nothing to measure
            skipped += 1
            continue
        c.check(f"h^2 ratio #{i}", ok)
        ratios.append(ratio)
        r = fd_crosscheck(e, v, point, 1e-4)
        rel = r.abs_diff / (1 + abs(r.symbolic))
        worst_abs, worst_rel = max(worst_abs, r.abs_diff), max(worst_rel, rel)
        c.check(f"agreement #{i}", rel <= 1e-6)
    c.notes.append(f"50 expressions ({skipped} at the rounding floor redrawn), worst |diff|/(1+|d|) {worst_rel:.1e}, "
                   f"worst |diff| {worst_abs:.1e}, ratios {min(ratios):.0f}..{max(ratios):.0f}")
    return c


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 10)])
def test_criterion(criterion, capsys):
    c = criterion()
    with capsys.disabled():
        print("\n" + c.line())
    assert not c.failed, c.line()


if __name__ == "__main__":
    failures = 0
    for fn in CRITERIA:
        c = fn()
        failures += bool(c.failed)
        print(c.line(), flush=True)
    sys.exit(1 if failures else 0)

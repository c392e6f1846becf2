"""Null functions of Weiss operators.

For ``L_{n+1}`` built from ``D`` and ``phi`` the functions

    (D phi)^(-n/2) * phi^k,    k = 0..n

are annihilated by ``L_{n+1}``; so is any linear combination of them.  Each
bracket of the operator lowers the power of ``phi`` by one and raises the
power of ``D phi`` by one, which is what :func:`verify_telescoping` traces.

When the coefficients of ``D`` contain the unknown itself, the same formula
becomes an equation for the unknown; :func:`solve_self_consistent` handles the
case ``D phi = E * psi^m``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .diffop import (
    DirectionalOperator,
    WeissOperator,
    _check_nondegenerate,
    apply,
    apply_factor,
    build_weiss,
    expand_pde,
)
from .errors import (
    CoefficientArityMismatch,
    DegenerateProducingFunction,
    DomainExhausted,
    EvaluationError,
    PatternNotRecognized,
)
from .expr import (
    ZERO,
    Const,
    Deriv,
    Expr,
    SampleDomain,
    add,
    as_expr,
    compile_exprs,
    const,
    deriv,
    free_symbols,
    is_zero,
    mul,
    neg,
    parse,
    power,
    simplify,
    substitute,
    sub,
)
from .expr import poly
from .expr.zero import _draw

INDEPENDENCE_THRESHOLD = 1e-6
PARAM_BUDGET = 100


def _positive(domain: SampleDomain | None, D: DirectionalOperator) -> tuple:
    dom = domain or D.default_domain()
    return tuple(v for v, (lo, _) in dom.intervals.items() if lo > 0)


def _d_phi(D: DirectionalOperator, phi: Expr, domain) -> Expr:
    dphi = simplify(apply(D, phi))
    _check_nondegenerate(D, dphi, domain)
    return dphi


def basis(D: DirectionalOperator, phi, n: int, domain: SampleDomain | None = None) -> list:
    """``[(D phi)^(-n/2) * phi^k for k = 0..n]``, simplified.

    Radicals are split over variables whose domain interval is positive.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    phi = as_expr(phi)
    dphi = _d_phi(D, phi, domain)
    pos = _positive(domain, D)
    weight = power(dphi, const(Fraction(-n, 2)))
    return [simplify(mul(weight, power(phi, const(k))), pos) for k in range(n + 1)]


def _coeff(c, D: DirectionalOperator) -> Expr:
    if isinstance(c, str):
        return parse(c, None, (D.unknown,))
    return as_expr(c)


@dataclass(frozen=True)
class NullFunction:
    """``expr = d_phi^(-n/2) * sum_k coeffs[k] * phi^k``."""

    n: int
    phi: Expr
    d_phi: Expr
    coeffs: tuple
    expr: Expr

    @property
    def parameters(self) -> list:
        names = set()
        for c in self.coeffs:
            names |= free_symbols(c)
        return sorted(names)


def general_null(D: DirectionalOperator, phi, n: int, coeffs: Sequence,
                 domain: SampleDomain | None = None) -> NullFunction:
    if len(coeffs) != n + 1:
        raise CoefficientArityMismatch(f"order n = {n} needs {n + 1} coefficients, got {len(coeffs)}")
    phi = as_expr(phi)
    cs = tuple(_coeff(c, D) for c in coeffs)
    dphi = _d_phi(D, phi, domain)
    poly_phi = add(*(mul(c, power(phi, const(k))) for k, c in enumerate(cs)))
    e = simplify(mul(power(dphi, const(Fraction(-n, 2))), poly_phi), _positive(domain, D))
    return NullFunction(n, phi, dphi, cs, e)


# --- telescoping --------------------------------------------------------------

def falling(k: int, m: int) -> int:
    out = 1
    for i in range(m):
        out *= k - i
    return out


@dataclass
class Telescoping:
    """States of ``(D phi)^(-n/2) phi^k`` after each bracket, right to left.

    ``states[0]`` is the input; ``states[m]`` follows ``m`` brackets and should
    equal ``expected[m]``.  Iterating yields ``(states, passed)``.
    """

    n: int
    k: int
    states: list
    expected: list
    residuals: list
    passed: bool
    failed_step: int | None = None
    positive: tuple = ()

    def __iter__(self):
        return iter((self.states, self.passed))

    def simplified(self) -> list:
        """States in rational normal form, for display."""
        return [simplify(st, self.positive) for st in self.states]


def closed_state(dphi: Expr, phi: Expr, n: int, k: int, m: int) -> Expr:
    c = falling(k, m)
    if c == 0:
        return ZERO
    return mul(const(c), power(dphi, const(Fraction(-n, 2) + m)), power(phi, const(k - m)))


def telescope(L: WeissOperator, k: int, domain: SampleDomain, dphi: Expr | None = None,
              tol: float = 1e-8, samples: int = 32, seed: int = 42) -> Telescoping:
    """Trace of ``L`` acting on basis element ``k``; see :class:`Telescoping`."""
    n = L.n
    if not 0 <= k <= n:
        raise ValueError(f"k must lie in [0, {n}]")
    if dphi is None:
        dphi = simplify(apply(L.D, L.phi))
    pos = tuple(v for v, (lo, _) in domain.intervals.items() if lo > 0)
    # states stay unsimplified: normalising each one costs far more than the
    # zero test and the final state doubles as L applied to the basis element
    state = closed_state(dphi, L.phi, n, k, 0)
    states, expected, residuals = [state], [state], [0.0]
    failed = None
    for m, c in enumerate(reversed(L.factors), start=1):
        state = apply_factor(L, c, state)
        want = closed_state(dphi, L.phi, n, k, m)
        states.append(state)
        expected.append(want)
        check = is_zero(sub(state, want), domain, samples, tol, seed)
        residuals.append(check.max_residual)
        if not check and failed is None:
            failed = m
    return Telescoping(n, k, states, expected, residuals, failed is None, failed, pos)


def verify_telescoping(D: DirectionalOperator, phi, n: int, k: int, domain: SampleDomain | None = None,
                       tol: float = 1e-8, samples: int = 32, seed: int = 42) -> Telescoping:
    dom = domain or D.default_domain()
    L = build_weiss(D, phi, n, dom)
    return telescope(L, k, dom, tol=tol, samples=samples, seed=seed)


# --- nonlinear case -----------------------------------------------------------

@dataclass(frozen=True)
class SelfConsistentSolution:
    """Closed forms for the unknown solving ``psi = (D phi)^(-n/2) P(phi)``.

    With ``D phi = E * psi^m`` this is ``psi^exponent = rhs`` where
    ``exponent = 1 + m*n/2`` and ``rhs = E^(-n/2) * P(phi)``.
    """

    branches: tuple
    E: Expr
    m: int
    exponent: Fraction
    rhs: Expr
    unknown: str
    n: int
    phi: Expr
    d_phi: Expr
    coeffs: tuple

    @property
    def relation(self) -> Expr:
        """``(D phi)^(-n/2) * P(phi)`` with the unknown still free."""
        poly_phi = add(*(mul(c, power(self.phi, const(k))) for k, c in enumerate(self.coeffs)))
        return mul(power(self.d_phi, const(Fraction(-self.n, 2))), poly_phi)


def match_pattern(dphi: Expr, unknown: str) -> tuple:
    """Split ``dphi`` as ``(E, m)`` with ``dphi = E * psi^m``."""
    base = deriv(unknown)
    try:
        groups = poly.collect(dphi, lambda a: unknown in a.funcs)
    except poly.TooLarge:
        raise PatternNotRecognized("D(phi) too large to match") from None
    groups = {k: c for k, c in groups.items() if simplify(c) is not ZERO}
    if len(groups) != 1:
        raise PatternNotRecognized(f"D(phi) = {dphi} is not a single power of {unknown}")
    (mono, E), = groups.items()
    if not mono:
        return simplify(E), 0
    if len(mono) != 1 or mono[0][0] is not base or mono[0][1] < 1:
        raise PatternNotRecognized(f"D(phi) = {dphi} is not of the form E*{unknown}^m")
    return simplify(E), mono[0][1]


def solve_self_consistent(D: DirectionalOperator, phi, n: int, coeffs: Sequence,
                          domain: SampleDomain | None = None) -> SelfConsistentSolution:
    if len(coeffs) != n + 1:
        raise CoefficientArityMismatch(f"order n = {n} needs {n + 1} coefficients, got {len(coeffs)}")
    phi = as_expr(phi)
    cs = tuple(_coeff(c, D) for c in coeffs)
    dphi = _d_phi(D, phi, domain)
    E, m = match_pattern(dphi, D.unknown)
    pos = _positive(domain, D)
    if m == 0:
        null = general_null(D, phi, n, cs, domain)
        return SelfConsistentSolution((null.expr,), E, 0, Fraction(1), null.expr, D.unknown, n, phi, dphi, cs)
    exponent = 1 + Fraction(m * n, 2)
    poly_phi = add(*(mul(c, power(phi, const(k))) for k, c in enumerate(cs)))
    # P(phi) stays in terms of phi so the branches read like the textbook form
    rhs = mul(simplify(power(E, const(Fraction(-n, 2))), pos), poly_phi)
    root = power(rhs, const(1 / exponent))
    if exponent.numerator % 2 == 0:
        branches = (root, neg(root))
    else:
        branches = (root,)
    return SelfConsistentSolution(branches, E, m, exponent, rhs, D.unknown, n, phi, dphi, cs)


def closure_check(sol: SelfConsistentSolution, branch: Expr, domain: SampleDomain, params=None,
                  tol: float = 1e-8, samples: int = 32, seed: int = 42):
    """Zero test of ``b - relation[psi := b]`` with parameters bound by ``params``."""
    bind = {k: as_expr(v) for k, v in (params or {}).items()}
    b = substitute(as_expr(branch), bind)
    rel = substitute(substitute(sol.relation, bind), {sol.unknown: b})
    return is_zero(sub(b, rel), domain, samples, tol, seed)


# --- verification -------------------------------------------------------------

def random_rational(rng: random.Random, lo: int = -2, hi: int = 2, den: int = 4) -> Fraction:
    return Fraction(rng.randint(lo * den, hi * den), den)


def parameters_of(candidate: Expr, variables, unknown: str) -> list:
    return sorted(free_symbols(candidate) - set(variables) - {unknown})


def verify_solution(D: DirectionalOperator, phi, n: int, candidate, dom: SampleDomain,
                    tol: float = 1e-8, seed: int = 42, samples: int = 32, params=None):
    """Check ``L_{n+1} f = 0`` with ``f`` substituted for the unknown everywhere.

    Free parameters of ``candidate`` take the values in ``params``; missing
    ones get random rationals in [-2, 2], redrawn while the sample domain is
    inadmissible (e.g. a radicand turns negative).
    """
    from .verify import residual_check

    candidate = _coeff(candidate, D)
    L = build_weiss(D, phi, n, dom)
    lhs = pde_lhs(L)
    free = [p for p in parameters_of(candidate, dom.intervals, D.unknown) if p not in (params or {})]
    fixed = {k: as_expr(v) for k, v in (params or {}).items()}
    if not free:
        return residual_check(lhs, D.unknown, substitute(candidate, fixed), dom, samples, tol, seed)
    rng = random.Random(seed)
    report = None
    for _ in range(PARAM_BUDGET):
        binding = dict(fixed)
        binding.update({p: const(random_rational(rng)) for p in free})
        report = residual_check(lhs, D.unknown, substitute(candidate, binding), dom, samples, tol, seed)
        if report.verdict != "inconclusive":
            report.parameters = {k: str(v) for k, v in sorted(binding.items())}
            return report
    return report


def pde_lhs(L: WeissOperator) -> Expr:
    """``L psi`` expanded and collected in the unknown's derivative atoms."""
    from .diffop import pde_expr, pde_terms

    raw = expand_pde(L)
    try:
        return pde_expr(pde_terms(raw, L.D.unknown, L.D.vars))
    except poly.TooLarge:
        return raw


def independence(functions: Sequence[Expr], dom: SampleDomain, seed: int = 42) -> float:
    """Generalized Vandermonde determinant ``det[f_k(p_i)]`` at sampled points."""
    functions = [as_expr(f) for f in functions]
    draw = _draw(dom, functions, len(functions), seed)
    return float(np.linalg.det(draw.values))


def check_independence(D: DirectionalOperator, phi, n: int, dom: SampleDomain | None = None,
                       seed: int = 42, threshold: float = INDEPENDENCE_THRESHOLD) -> tuple:
    dom = dom or D.default_domain()
    det = independence(basis(D, phi, n, dom), dom, seed)
    return abs(det) > threshold, det


# --- randomized theorem suite -------------------------------------------------

VARIABLES = ("x", "y", "z", "w")


@dataclass
class TheoremInstance:
    """One random configuration ``(d, n, phi, a_i)`` for the theorem suite."""

    seed: int
    trial: int
    vars: tuple
    coeffs: tuple
    phi: Expr
    n: int
    domain: SampleDomain = field(repr=False)

    def operator(self) -> DirectionalOperator:
        return DirectionalOperator(self.vars, self.coeffs)

    def describe(self) -> str:
        a = ", ".join(str(c) for c in self.coeffs)
        return f"seed={self.seed} trial={self.trial} d={len(self.vars)} n={self.n} phi={self.phi} a=[{a}]"


def random_polynomial(rng: random.Random, variables, degree: int, lo: int = -3, hi: int = 3) -> Expr:
    monos = [()]
    for _ in range(degree):
        monos = sorted(set(monos) | {tuple(sorted(m + (v,))) for m in monos for v in variables})
    terms = []
    for m in monos:
        if rng.random() < 0.6:
            terms.append(mul(const(rng.randint(lo, hi)), *(parse(v) for v in m)))
    return add(*terms)


def random_instance(seed: int, trial: int, dims: int = 3, max_n: int = 4, degree: int = 2,
                    lo: float = 1.0, hi: float = 2.0) -> TheoremInstance:
    """Deterministic instance ``trial`` of the stream for ``seed``.

    Redraws until ``D phi`` is non-degenerate and positive somewhere on the
    box, so odd ``n`` (half-integer powers of ``D phi``) stays real.
    """
    rng = random.Random(f"{seed}:{trial}")
    while True:
        d = rng.randint(1, dims)
        vs = VARIABLES[:d]
        n = rng.randint(0, max_n)
        phi = random_polynomial(rng, vs, degree)
        coeffs = tuple(random_polynomial(rng, vs, rng.randint(0, degree), 1, 3) for _ in vs)
        if any(c is ZERO for c in coeffs):
            continue
        dom = SampleDomain.box(vs, lo, hi)
        D = DirectionalOperator(vs, coeffs)
        dphi = simplify(apply(D, phi))
        if isinstance(dphi, Const):
            if dphi.value == 0:
                continue
            if dphi.value < 0:
                phi = neg(phi)
            return TheoremInstance(seed, trial, vs, coeffs, phi, n, dom)
        mid = {v: (lo + hi) / 2 for v in vs}
        from .expr import evaluate

        if evaluate(dphi, mid) < 0:
            phi, dphi = neg(phi), neg(dphi)
        try:
            _draw(dom, [power(dphi, const(Fraction(-1, 2)))], 32, seed)
        except (DomainExhausted, EvaluationError):
            continue
        return TheoremInstance(seed, trial, vs, coeffs, phi, n, dom)


@dataclass
class InstanceResult:
    instance: TheoremInstance
    annihilated: list
    telescoped: list
    residuals: list
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and all(self.annihilated) and all(self.telescoped)


def check_instance(inst: TheoremInstance, tol: float = 1e-7, samples: int = 32, seed: int = 42,
                   mutate: Callable[[WeissOperator], WeissOperator] | None = None,
                   telescoping: bool = True) -> InstanceResult:
    """``L_{n+1} basis_k == 0`` for every ``k``, plus the telescoping trace.

    ``mutate`` rewrites the operator before use; it exists so tests can
    confirm that a corrupted operator is caught.
    """
    D = inst.operator()
    try:
        L = build_weiss(D, inst.phi, inst.n, inst.domain)
        if mutate is not None:
            L = mutate(L)
        dphi = simplify(apply(D, inst.phi))
        annihilated, telescoped, residuals = [], [], []
        for k in range(inst.n + 1):
            if telescoping:
                # the last state of the trace is L applied to basis element k
                trace = telescope(L, k, inst.domain, dphi, tol, samples, seed)
                telescoped.append(trace.passed)
                final = trace.residuals[-1]
            else:
                f = closed_state(dphi, inst.phi, inst.n, k, 0)
                final = is_zero(L(f), inst.domain, samples, tol, seed).max_residual
            annihilated.append(final <= tol)
            residuals.append(final)
        return InstanceResult(inst, annihilated, telescoped, residuals)
    except (DegenerateProducingFunction, DomainExhausted, EvaluationError) as exc:
        return InstanceResult(inst, [], [], [], f"{type(exc).__name__}: {exc}")


def flip_factor(j: int) -> Callable[[WeissOperator], WeissOperator]:
    """Mutation: negate the coefficient of bracket ``j`` (a no-op on a zero coefficient)."""
    def mutate(L: WeissOperator) -> WeissOperator:
        if j > L.n:
            return L
        fs = list(L.factors)
        fs[j] = -fs[j]
        return L.replace(factors=tuple(fs))
    return mutate


def wrong_v(L: WeissOperator) -> WeissOperator:
    """Mutation: ``V -> D^2 phi * D phi`` instead of the quotient."""
    d1 = apply(L.D, L.phi)
    return L.replace(V=mul(apply(L.D, d1), d1))

"""Guarded random sampling and the probabilistic zero test."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from ..errors import DomainExhausted
from .compile import compile_exprs, leaves
from .nodes import Const, Deriv, Expr, Func, Power, as_expr, walk

DEFAULT_SAMPLES = 32
DEFAULT_TOL = 1e-8
DEFAULT_SEED = 42
DEFAULT_EPS = 1e-3
REJECTION_BUDGET = 100
_BLOCK = 64


@dataclass(frozen=True)
class SampleDomain:
    """Box of admissible points plus guard expressions.

    Derivative atoms left in an expression are sampled as independent jet
    coordinates from ``jet_interval``; an identity that holds at random jet
    points holds for every unknown function.
    """

    intervals: Mapping[str, tuple]
    guards: tuple = ()
    eps: float = DEFAULT_EPS
    jet_interval: tuple = (0.5, 1.5)

    def __post_init__(self):
        iv = {str(k): (float(lo), float(hi)) for k, (lo, hi) in dict(self.intervals).items()}
        for name, (lo, hi) in iv.items():
            if not lo < hi:
                raise ValueError(f"empty interval for {name}: [{lo}, {hi}]")
        object.__setattr__(self, "intervals", iv)
        object.__setattr__(self, "guards", tuple(as_expr(g) for g in self.guards))

    @classmethod
    def box(cls, variables, lo=1.0, hi=2.0, **kw) -> "SampleDomain":
        return cls({v: (lo, hi) for v in variables}, **kw)

    def with_intervals(self, extra: Mapping[str, tuple]) -> "SampleDomain":
        merged = dict(self.intervals)
        merged.update(extra)
        return SampleDomain(merged, self.guards, self.eps, self.jet_interval)

    def with_guards(self, *guards) -> "SampleDomain":
        return SampleDomain(self.intervals, self.guards + tuple(guards), self.eps, self.jet_interval)

    def describe(self) -> str:
        parts = [f"{v}:[{lo:g},{hi:g}]" for v, (lo, hi) in self.intervals.items()]
        return " ".join(parts) + f" eps={self.eps:g}"


def singular_guards(exprs) -> tuple[list, list]:
    """Bases that must stay away from zero, and bases that must stay positive."""
    nonzero, positive = [], []
    seen = set()
    for e in exprs:
        for node in walk(e):
            if isinstance(node, Power) and not isinstance(node.base, Const):
                x = node.exp
                if isinstance(x, Const) and x.value.denominator == 1:
                    if x.value < 0 and node.base not in seen:
                        seen.add(node.base)
                        nonzero.append(node.base)
                elif ("+", node.base) not in seen:
                    seen.add(("+", node.base))
                    positive.append(node.base)
            elif isinstance(node, Func) and node.name == "log" and ("+", node.arg) not in seen:
                seen.add(("+", node.arg))
                positive.append(node.arg)
    return nonzero, positive


def _columns(dom: SampleDomain, exprs) -> tuple:
    keys = leaves(exprs)
    jets = sorted((k for k in keys if isinstance(k, Deriv)), key=str)
    return tuple(dom.intervals) + tuple(jets)


def _bounds(dom: SampleDomain, columns) -> tuple[np.ndarray, np.ndarray]:
    lo = np.array([dom.intervals[c][0] if isinstance(c, str) else dom.jet_interval[0] for c in columns])
    hi = np.array([dom.intervals[c][1] if isinstance(c, str) else dom.jet_interval[1] for c in columns])
    return lo, hi


def candidate(seed: int, index: int, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Candidate point ``index`` of the stream for ``seed``, independent of all others."""
    ss = np.random.SeedSequence(entropy=int(seed) & ((1 << 64) - 1), spawn_key=(index,))
    u = np.random.default_rng(ss).random(len(lo))
    return lo + (hi - lo) * u


@dataclass
class _Draw:
    columns: tuple
    points: np.ndarray
    values: np.ndarray
    rejected: int


def _draw(dom: SampleDomain, outputs, count: int, seed: int, magnitudes=(), requires=()) -> _Draw:
    """Accept ``count`` points where the guards hold and ``outputs`` evaluate.

    ``requires`` are expressions that must also be defined at accepted points
    (their singularities are guarded) without being reported.  Output columns
    of the returned values follow ``outputs`` and then ``magnitudes``.
    """
    outputs = list(outputs)
    magnitudes = list(magnitudes)
    requires = [as_expr(r) for r in requires]
    nonzero, positive = singular_guards(outputs + requires + list(dom.guards))
    nonzero = list(dom.guards) + nonzero
    prog_exprs = nonzero + positive + requires + outputs
    columns = _columns(dom, prog_exprs)
    prog = compile_exprs(prog_exprs, columns, magnitudes)
    lo, hi = _bounds(dom, columns)
    ng, npos = len(nonzero), len(positive)
    skip = ng + npos + len(requires)
    accepted_pts, accepted_vals = [], []
    rejected = 0
    budget = REJECTION_BUDGET * count
    index = 0
    while len(accepted_pts) < count:
        block = np.array([candidate(seed, index + j, lo, hi) for j in range(_BLOCK)]).reshape(_BLOCK, len(columns))
        index += _BLOCK
        values, status = prog.run(block)
        ok = status == 0
        if ng:
            ok &= np.all(np.abs(values[:, :ng]) > dom.eps, axis=1)
        if npos:
            ok &= np.all(values[:, ng:ng + npos] > dom.eps, axis=1)
        for row in range(_BLOCK):
            if ok[row]:
                accepted_pts.append(block[row])
                accepted_vals.append(values[row, skip:])
                if len(accepted_pts) == count:
                    break
            else:
                rejected += 1
                if rejected > budget:
                    raise DomainExhausted(
                        f"{rejected} of {rejected + len(accepted_pts)} candidates rejected on {dom.describe()}"
                    )
    return _Draw(
        columns,
        np.array(accepted_pts).reshape(count, len(columns)),
        np.array(accepted_vals).reshape(count, len(outputs) + len(magnitudes)),
        rejected,
    )


def sample_points(dom: SampleDomain, count: int, seed: int = DEFAULT_SEED, exprs=()) -> list:
    """Deterministic guarded uniform sample of ``count`` points.

    ``exprs`` contribute their own singularities (negative-power bases,
    fractional-power bases, log arguments) as extra guards.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    exprs = [as_expr(e) for e in exprs]
    draw = _draw(dom, exprs, count, seed)
    return [tuple(float(v) for v in p) for p in draw.points]


@dataclass
class ZeroTest:
    """Outcome of :func:`is_zero`; truthy iff the expression tested as zero."""

    passed: bool
    max_residual: float
    tolerance: float
    columns: tuple
    points: np.ndarray
    residuals: np.ndarray
    raw: np.ndarray
    seed: int
    witness: dict | None = None
    witness_residual: float | None = None
    rejected: int = 0

    def __bool__(self):
        return self.passed


def is_zero(e, dom: SampleDomain, samples: int = DEFAULT_SAMPLES, tol: float = DEFAULT_TOL,
            seed: int = DEFAULT_SEED, requires=()) -> ZeroTest:
    """Probabilistic identity test.

    Passes iff at every sampled point ``|e| <= tol * (1 + scale)``.  The
    scale is the sum of the absolute values of the additive terms of ``e``
    once fully expanded (computed without expanding, see
    :func:`compile_exprs`), so cancellation anywhere inside ``e`` is allowed
    for, not just between its top-level summands.  Points must also lie
    where every expression in ``requires`` is defined.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    e = as_expr(e)
    draw = _draw(dom, [e], samples, seed, magnitudes=[e], requires=requires)
    raw = np.abs(draw.values[:, 0])
    scale = 1.0 + draw.values[:, 1]
    residuals = raw / scale
    worst = int(np.argmax(residuals))
    max_res = float(residuals[worst])
    passed = bool(max_res <= tol)
    witness = None
    if not passed:
        witness = {str(c): float(v) for c, v in zip(draw.columns, draw.points[worst])}
    return ZeroTest(
        passed=passed,
        max_residual=max_res,
        tolerance=tol,
        columns=draw.columns,
        points=draw.points,
        residuals=residuals,
        raw=raw,
        seed=seed,
        witness=witness,
        witness_residual=None if passed else max_res,
        rejected=draw.rejected,
    )

"""Numeric verification: residual checks, finite-difference cross-checks, reports."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Mapping, NamedTuple

from .errors import DomainExhausted, EvaluationError
from .expr import (
    Expr,
    SampleDomain,
    as_expr,
    differentiate,
    emit,
    evaluate,
    is_zero,
    sample_points,
    substitute,
)
from .expr.zero import DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_TOL

DEFAULT_H = 1e-4
FD_FLOOR = 1e-10

__all__ = [
    "FDResult", "VerificationReport", "fd_convergence", "fd_crosscheck", "residual_check",
    "sample_points",
]


@dataclass
class VerificationReport:
    """Outcome of a residual check.

    ``verdict`` is ``"pass"`` iff every requested point was accepted and the
    largest normalized residual is within ``tolerance``; ``"inconclusive"``
    when the domain could not be sampled or evaluation failed.
    """

    expression: str
    domain: str
    seed: int
    samples: int
    points: list
    residuals: list
    max_residual: float | None
    tolerance: float
    verdict: str
    raw_residuals: list = field(default_factory=list)
    columns: list = field(default_factory=list)
    reason: str = ""
    parameters: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_text(self) -> str:
        """Flat ``key=value`` lines; lists are comma separated."""
        lines = [
            f"expression={self.expression}",
            f"domain={self.domain}",
            f"seed={self.seed}",
            f"samples={self.samples}",
            f"accepted={len(self.points)}",
            f"columns={','.join(self.columns)}",
            f"tolerance={self.tolerance!r}",
            f"max_residual={self.max_residual!r}",
            f"verdict={self.verdict}",
        ]
        for k, v in self.parameters.items():
            lines.append(f"param.{k}={v}")
        if self.reason:
            lines.append(f"reason={self.reason}")
        for i, (p, r) in enumerate(zip(self.points, self.residuals)):
            coords = ",".join(repr(x) for x in p)
            lines.append(f"point.{i}={coords} residual={r!r}")
        return "\n".join(lines) + "\n"


def check_expression(e, dom: SampleDomain, count: int = DEFAULT_SAMPLES, tol: float = DEFAULT_TOL,
                     seed: int = DEFAULT_SEED, label: str | None = None, requires=()) -> VerificationReport:
    """Report for the zero test of ``e`` itself; see :func:`is_zero` for ``requires``."""
    e = as_expr(e)
    text = label if label is not None else emit(e)
    try:
        z = is_zero(e, dom, count, tol, seed, requires)
    except (DomainExhausted, EvaluationError) as exc:
        return VerificationReport(text, dom.describe(), seed, count, [], [], None, tol, "inconclusive",
                                  reason=f"{type(exc).__name__}: {exc}")
    verdict = "pass" if z.passed and len(z.points) == count else "fail"
    return VerificationReport(
        expression=text,
        domain=dom.describe(),
        seed=seed,
        samples=count,
        points=[[float(v) for v in p] for p in z.points],
        residuals=[float(r) for r in z.residuals],
        max_residual=z.max_residual,
        tolerance=tol,
        verdict=verdict,
        raw_residuals=[float(r) for r in z.raw],
        columns=[str(c) for c in z.columns],
    )


def residual_check(pde_lhs, unknown: str, candidate, dom: SampleDomain, count: int = DEFAULT_SAMPLES,
                   tol: float = DEFAULT_TOL, seed: int = DEFAULT_SEED) -> VerificationReport:
    """Substitute ``unknown := candidate`` into ``pde_lhs`` and zero-test the result.

    Sample points must lie where the candidate itself is defined, even when
    the substituted expression cancels to a constant.
    """
    candidate = as_expr(candidate)
    e = substitute(as_expr(pde_lhs), {unknown: candidate})
    return check_expression(e, dom, count, tol, seed, label=emit(candidate), requires=[candidate])


class FDResult(NamedTuple):
    symbolic: float
    numeric: float
    abs_diff: float


def fd_crosscheck(e, var: str, point: Mapping[str, float], h: float = DEFAULT_H) -> FDResult:
    """Central difference along ``var`` against the symbolic derivative."""
    e = as_expr(e)
    point = {str(k): float(v) for k, v in point.items()}
    symbolic = evaluate(differentiate(e, var), point)
    up, down = dict(point), dict(point)
    up[var] += h
    down[var] -= h
    numeric = (evaluate(e, up) - evaluate(e, down)) / (2 * h)
    return FDResult(symbolic, numeric, abs(symbolic - numeric))


def fd_convergence(e, var: str, point: Mapping[str, float], h: float = DEFAULT_H,
                   floor: float = FD_FLOOR) -> tuple:
    """``(ratio, ok)`` for ``abs_diff(h) / abs_diff(h/10)``.

    Second-order accuracy predicts 100; [25, 400] is accepted.  Once either
    error sits below ``floor`` times the scale of ``e`` rounding dominates and
    the ratio carries no information, so the check passes.
    """
    e = as_expr(e)
    coarse = fd_crosscheck(e, var, point, h)
    fine = fd_crosscheck(e, var, point, h / 10)
    scale = 1.0 + abs(evaluate(e, point)) + abs(coarse.symbolic)
    if coarse.abs_diff <= floor * scale or fine.abs_diff <= floor * scale:
        return None, True
    ratio = coarse.abs_diff / fine.abs_diff
    return ratio, 25.0 <= ratio <= 400.0

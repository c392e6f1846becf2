from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .calculus import substitute
from .compile import compile_exprs, leaves, status_error
from .nodes import Expr, as_expr


@dataclass(frozen=True)
class Assignment:
    """Point values for variables, plus optional closed forms for unknowns.

    ``values`` may also be keyed by derivative atoms to evaluate at a jet
    point without any closed form.
    """

    values: Mapping = field(default_factory=dict)
    unknowns: Mapping[str, Expr] = field(default_factory=dict)


def resolve(e: Expr, unknowns: Mapping) -> Expr:
    if not unknowns:
        return e
    return substitute(e, {k: as_expr(v) for k, v in unknowns.items()})


def evaluate(e, a) -> float:
    """Evaluate ``e`` at a point (principal real branch).

    ``a`` is an :class:`Assignment` or a plain mapping of values.
    """
    if not isinstance(a, Assignment):
        a = Assignment(values=dict(a))
    e = resolve(as_expr(e), a.unknowns)
    needed = leaves([e])
    columns = tuple(c for c in a.values if c in needed)
    prog = compile_exprs([e], columns)
    point = np.array([[float(a.values[c]) for c in columns]]).reshape(1, len(columns))
    values, status = prog.run(point)
    if status[0]:
        raise status_error(int(status[0]))
    return float(values[0, 0])

"""Flatten expression DAGs into register programs and evaluate them.

A program has one instruction per distinct node, so shared subexpressions are
computed once per point.  Several expressions can be compiled into a single
program; each becomes one output column.  The per-point loop lives in the
kernel selected by :mod:`weiss._backend`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _backend
from .._kernel_py import (
    OP_ABS, OP_ADD, OP_CONST, OP_COS, OP_EXP, OP_LOG, OP_MUL, OP_POWF, OP_POWI, OP_SIN, OP_VAR,
)
from ..errors import (
    DivisionByZero,
    LogDomainError,
    MissingSymbolError,
    NonFiniteValue,
    NonPositiveBase,
)
from .nodes import Const, Deriv, Expr, Func, Power, Product, Sum, Var, walk

STATUS_OK, STATUS_DIV0, STATUS_BASE, STATUS_LOG, STATUS_NONFINITE = range(5)

_ERRORS = {
    STATUS_DIV0: (DivisionByZero, "division by zero"),
    STATUS_BASE: (NonPositiveBase, "non-positive base under a fractional power"),
    STATUS_LOG: (LogDomainError, "log of a non-positive argument"),
    STATUS_NONFINITE: (NonFiniteValue, "non-finite value"),
}

_FUNC_OPS = {"exp": OP_EXP, "log": OP_LOG, "sin": OP_SIN, "cos": OP_COS}


def status_error(code: int, where: str = ""):
    cls, text = _ERRORS[code]
    return cls(text + (f" at {where}" if where else ""))


def symbol_key(node: Expr):
    """Column key of a leaf: variable name, or the derivative atom itself."""
    return node.name if isinstance(node, Var) else node


def leaves(exprs) -> set:
    keys = set()
    for e in exprs:
        for node in walk(e):
            if isinstance(node, (Var, Deriv)):
                keys.add(symbol_key(node))
    return keys


@dataclass(frozen=True)
class Program:
    columns: tuple
    ops: np.ndarray
    a0: np.ndarray
    a1: np.ndarray
    argv: np.ndarray
    consts: np.ndarray
    outputs: np.ndarray

    @property
    def size(self) -> int:
        return len(self.ops)

    def run(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Evaluate all outputs at each row of ``points``.

        Returns ``(values, status)``; rows with a nonzero status hold NaN.
        """
        pts = np.ascontiguousarray(points, dtype=np.float64)
        if pts.ndim != 2:
            # a 1-d input is a single point; with no columns that is an empty row
            pts = pts.reshape(1 if not self.columns else -1, len(self.columns))
        return _backend.run_program(self.ops, self.a0, self.a1, self.argv, self.consts, pts, self.outputs)


def compile_exprs(exprs, columns, magnitudes=()) -> Program:
    """Compile ``exprs`` against ``columns`` (variable names or derivative atoms).

    Each entry of ``magnitudes`` adds an output holding its absolute-value
    evaluation: sums add and products multiply the magnitudes of their
    operands, positive integer powers raise them.  This equals the sum of
    ``|term|`` over the full expansion without performing it, and bounds the
    rounding error of evaluating the expression.
    """
    exprs = list(exprs)
    magnitudes = list(magnitudes)
    columns = tuple(columns)
    col_index = {c: i for i, c in enumerate(columns)}
    slot: dict[int, int] = {}
    ops, a0, a1, argv = [], [], [], []
    consts: list[float] = []
    const_index: dict = {}

    def emit(op, x=0, y=0):
        ops.append(op)
        a0.append(x)
        a1.append(y)
        return len(ops) - 1

    def const_slot(value) -> int:
        if value not in const_index:
            consts.append(float(value))
            const_index[value] = len(consts) - 1
        return emit(OP_CONST, const_index[value])

    for root in exprs + magnitudes:
        for node in walk(root):
            if id(node) in slot:
                continue
            if isinstance(node, Const):
                s = const_slot(node.value)
            elif isinstance(node, (Var, Deriv)):
                key = symbol_key(node)
                if key not in col_index:
                    raise MissingSymbolError(f"no value for symbol {key if isinstance(key, str) else str(key)!r}")
                s = emit(OP_VAR, col_index[key])
            elif isinstance(node, (Sum, Product)):
                start = len(argv)
                argv.extend(slot[id(a)] for a in node.args)
                s = emit(OP_ADD if isinstance(node, Sum) else OP_MUL, start, len(node.args))
            elif isinstance(node, Power):
                x = node.exp
                if isinstance(x, Const) and x.value.denominator == 1:
                    s = emit(OP_POWI, slot[id(node.base)], x.value.numerator)
                else:
                    s = emit(OP_POWF, slot[id(node.base)], slot[id(x)])
            elif isinstance(node, Func):
                s = emit(_FUNC_OPS[node.name], slot[id(node.arg)])
            else:
                raise TypeError(f"cannot compile {type(node).__name__}")
            slot[id(node)] = s
    outputs = [slot[id(e)] for e in exprs]
    mslot: dict[int, int] = {}
    for root in magnitudes:
        for node in walk(root):
            if id(node) in mslot:
                continue
            if isinstance(node, Const):
                s = const_slot(abs(node.value))
            elif isinstance(node, (Sum, Product)):
                start = len(argv)
                argv.extend(mslot[id(a)] for a in node.args)
                s = emit(OP_ADD if isinstance(node, Sum) else OP_MUL, start, len(node.args))
            elif isinstance(node, Power) and isinstance(node.exp, Const) and node.exp.value.denominator == 1 \
                    and node.exp.value > 0:
                s = emit(OP_POWI, mslot[id(node.base)], node.exp.value.numerator)
            else:
                s = emit(OP_ABS, slot[id(node)])
            mslot[id(node)] = s
        outputs.append(mslot[id(root)])
    i64 = np.int64
    return Program(
        columns=columns,
        ops=np.asarray(ops, dtype=i64),
        a0=np.asarray(a0, dtype=i64),
        a1=np.asarray(a1, dtype=i64),
        argv=np.asarray(argv if argv else [0], dtype=i64),
        consts=np.asarray(consts if consts else [0.0], dtype=np.float64),
        outputs=np.asarray(outputs, dtype=i64),
    )

"""Pure-Python evaluator for flattened expression programs.

Used when the compiled ``_kernel`` extension is unavailable or when
``WEISS_PURE_PYTHON=1`` is set.  Each instruction is one numpy operation over
all points.  Semantics match the Cython kernel: a point's status is the code
of the first instruction (in program order) that fails there, and its outputs
are NaN.
"""

import numpy as np

OP_CONST, OP_VAR, OP_ADD, OP_MUL, OP_POWI, OP_POWF, OP_EXP, OP_LOG, OP_SIN, OP_COS, OP_ABS = range(11)


def run_program(ops, a0, a1, argv, consts, points, outputs):
    ops = ops.tolist()
    a0 = a0.tolist()
    a1 = a1.tolist()
    argv = argv.tolist()
    consts = consts.tolist()
    outputs = outputs.tolist()
    npts = points.shape[0]
    cols = np.ascontiguousarray(points.T)
    reg = np.empty((max(len(ops), 1), npts))
    status = np.zeros(npts, dtype=np.int64)

    def fail(mask, code):
        status[mask & (status == 0)] = code

    with np.errstate(all="ignore"):
        for i, op in enumerate(ops):
            if op == OP_CONST:
                reg[i] = consts[a0[i]]
            elif op == OP_VAR:
                reg[i] = cols[a0[i]]
            elif op == OP_ADD:
                v = reg[i]
                v[:] = 0.0
                for k in range(a0[i], a0[i] + a1[i]):
                    v += reg[argv[k]]
            elif op == OP_MUL:
                v = reg[i]
                v[:] = 1.0
                for k in range(a0[i], a0[i] + a1[i]):
                    v *= reg[argv[k]]
            elif op == OP_POWI:
                b = reg[a0[i]]
                if a1[i] < 0:
                    fail(b == 0.0, 1)
                np.power(b, float(a1[i]), out=reg[i])
            elif op == OP_POWF:
                b = reg[a0[i]]
                fail(b <= 0.0, 2)
                np.power(b, reg[a1[i]], out=reg[i])
            elif op == OP_EXP:
                np.exp(reg[a0[i]], out=reg[i])
            elif op == OP_LOG:
                b = reg[a0[i]]
                fail(b <= 0.0, 3)
                np.log(b, out=reg[i])
            elif op == OP_SIN:
                np.sin(reg[a0[i]], out=reg[i])
            elif op == OP_COS:
                np.cos(reg[a0[i]], out=reg[i])
            else:
                np.abs(reg[a0[i]], out=reg[i])
    out = reg[outputs].T.copy() if outputs else np.empty((npts, 0))
    fail(~np.isfinite(out).all(axis=1), 4)
    out[status != 0] = np.nan
    return out, status

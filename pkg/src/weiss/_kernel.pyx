# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled evaluator for flattened expression programs.

Same contract as ``_kernel_py.run_program``: a point's status is the code of
the first instruction (in program order) that fails there, and its outputs
are NaN.  Points are processed in chunks with the instruction loop outside,
so dispatch is paid once per chunk and the inner loops are plain arrays.
"""

import numpy as np

from libc.math cimport pow, exp, log, sin, cos, fabs, isfinite, NAN

cdef enum:
    OP_CONST = 0
    OP_VAR = 1
    OP_ADD = 2
    OP_MUL = 3
    OP_POWI = 4
    OP_POWF = 5
    OP_EXP = 6
    OP_LOG = 7
    OP_SIN = 8
    OP_COS = 9
    OP_ABS = 10

DEF CHUNK = 128


def run_program(const long long[::1] ops, const long long[::1] a0, const long long[::1] a1,
                const long long[::1] argv, const double[::1] consts,
                const double[:, ::1] points, const long long[::1] outputs):
    cdef Py_ssize_t npts = points.shape[0]
    cdef Py_ssize_t nins = ops.shape[0]
    cdef Py_ssize_t nout = outputs.shape[0]
    out_arr = np.empty((npts, nout))
    status_arr = np.zeros(npts, dtype=np.int64)
    reg_arr = np.empty((max(nins, 1), CHUNK))
    cdef double[:, ::1] out = out_arr
    cdef long long[::1] status = status_arr
    cdef double[:, ::1] reg = reg_arr
    cdef Py_ssize_t start, n, p, i, j, k, stop
    cdef long long op, code
    cdef double c, e, b
    cdef double* r
    cdef double* s

    with nogil:
        for start in range(0, npts, CHUNK):
            n = min(CHUNK, npts - start)
            for i in range(nins):
                op = ops[i]
                r = &reg[i, 0]
                if op == OP_CONST:
                    c = consts[a0[i]]
                    for p in range(n):
                        r[p] = c
                elif op == OP_VAR:
                    for p in range(n):
                        r[p] = points[start + p, a0[i]]
                elif op == OP_ADD or op == OP_MUL:
                    c = 0.0 if op == OP_ADD else 1.0
                    for p in range(n):
                        r[p] = c
                    stop = a0[i] + a1[i]
                    for k in range(a0[i], stop):
                        s = &reg[argv[k], 0]
                        if op == OP_ADD:
                            for p in range(n):
                                r[p] = r[p] + s[p]
                        else:
                            for p in range(n):
                                r[p] = r[p] * s[p]
                elif op == OP_POWI:
                    s = &reg[a0[i], 0]
                    e = <double>a1[i]
                    for p in range(n):
                        b = s[p]
                        if a1[i] < 0 and b == 0.0 and status[start + p] == 0:
                            status[start + p] = 1
                        r[p] = pow(b, e)
                elif op == OP_POWF:
                    s = &reg[a0[i], 0]
                    for p in range(n):
                        b = s[p]
                        if b <= 0.0 and status[start + p] == 0:
                            status[start + p] = 2
                        r[p] = pow(b, reg[a1[i], p])
                elif op == OP_EXP:
                    s = &reg[a0[i], 0]
                    for p in range(n):
                        r[p] = exp(s[p])
                elif op == OP_LOG:
                    s = &reg[a0[i], 0]
                    for p in range(n):
                        b = s[p]
                        if b <= 0.0 and status[start + p] == 0:
                            status[start + p] = 3
                        r[p] = log(b)
                elif op == OP_SIN:
                    s = &reg[a0[i], 0]
                    for p in range(n):
                        r[p] = sin(s[p])
                elif op == OP_COS:
                    s = &reg[a0[i], 0]
                    for p in range(n):
                        r[p] = cos(s[p])
                else:
                    s = &reg[a0[i], 0]
                    for p in range(n):
                        r[p] = fabs(s[p])
            for p in range(n):
                code = status[start + p]
                if code == 0:
                    for j in range(nout):
                        if not isfinite(reg[outputs[j], p]):
                            code = 4
                    status[start + p] = code
                for j in range(nout):
                    out[start + p, j] = reg[outputs[j], p] if code == 0 else NAN
    return out_arr, status_arr

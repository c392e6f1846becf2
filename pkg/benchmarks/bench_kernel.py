"""Compiled kernel vs pure-Python fallback on realistic zero-test programs.

    python benchmarks/bench_kernel.py [--points N ...] [--repeat R]

Programs are the expanded PDE left-hand sides and telescoping states that the
verifier evaluates; each is run at the same points with both backends.  The
zero test evaluates candidate points in blocks of 64, so that is the size that
matters in practice; large batches are dominated by libm calls in both kernels.
"""

import argparse
import time

import numpy as np

from weiss import _backend
from weiss.diffop import DirectionalOperator, build_weiss, expand_pde
from weiss.expr import SampleDomain, compile_exprs, parse, substitute
from weiss.expr.zero import _columns
from weiss.nullspace import closed_state, random_instance


def workloads():
    xy = ["x", "y"]
    lp = DirectionalOperator.from_strings(xy, ["1", "x^2"])
    for n in (1, 3, 5):
        L = build_weiss(lp, parse("x+y"), n)
        e = substitute(expand_pde(L), {"psi": parse("(1+x+y)/sqrt(1+x^2)")})
        yield f"lpde L{n + 1} residual", e, SampleDomain.box(xy, 1, 2)
    for trial in (0, 1, 2):
        inst = random_instance(2026, trial)
        L = build_weiss(inst.operator(), inst.phi, inst.n, inst.domain)
        dphi = inst.operator()(inst.phi)
        f = closed_state(dphi, inst.phi, inst.n, inst.n, 0)
        yield f"theorem trial {trial} (d={len(inst.vars)}, n={inst.n})", L(f), inst.domain


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, nargs="+", default=[64, 2048])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = _backend.available()
    if "cython" not in backends:
        print("compiled extension not built; only the fallback can be timed")
    programs = []
    for name, e, dom in workloads():
        cols = _columns(dom, [e])
        lo = np.array([dom.intervals[c][0] if isinstance(c, str) else dom.jet_interval[0] for c in cols])
        hi = np.array([dom.intervals[c][1] if isinstance(c, str) else dom.jet_interval[1] for c in cols])
        programs.append((name, compile_exprs([e], cols, magnitudes=[e]), lo, hi))
    for npts in args.points:
        print(f"\npoints={npts}, best of {args.repeat}")
        header = f"{'workload':42} {'ops':>7}" + "".join(f" {b + ' ms':>12}" for b in backends)
        if len(backends) > 1:
            header += f" {'speedup':>8}"
        print(header)
        rng = np.random.default_rng(0)
        for name, prog, lo, hi in programs:
            pts = lo + (hi - lo) * rng.random((npts, len(lo)))
            timings, results = {}, {}
            for b in backends:
                with _backend.using(b):
                    timings[b] = best_of(lambda: prog.run(pts), args.repeat)
                    results[b] = prog.run(pts)[0]
            if len(backends) > 1:
                # pow and exp differ in the last bits between libm and numpy; compare at the
                # scale of the magnitude column, as the zero test does
                scale = 1 + results["python"][:, 1:].max()
                np.testing.assert_allclose(results["cython"], results["python"], rtol=1e-12, atol=1e-12 * scale)
            row = f"{name:42} {prog.size:7d}" + "".join(f" {timings[b] * 1e3:12.3f}" for b in backends)
            if len(backends) > 1:
                row += f" {timings['python'] / timings['cython']:7.1f}x"
            print(row)

if __name__ == "__main__":
    main()

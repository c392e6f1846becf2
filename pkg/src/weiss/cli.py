"""Command-line front end: ``weiss <command> [options]``.

Exit codes: 0 success or pass, 1 verification failure, 2 invalid input,
3 degenerate producing function, 4 unrecognized nonlinear pattern,
5 inconclusive (the sample domain could not be evaluated).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import nullspace
from .diffop import (
    DirectionalOperator,
    build_weiss,
    divide_common_factor,
    expand_pde,
    pde_terms,
    render_terms,
)
from .errors import (
    DegenerateProducingFunction,
    DomainExhausted,
    EvaluationError,
    PatternNotRecognized,
    WeissError,
)
from .expr import SampleDomain, emit, parse, simplify
from .expr.zero import DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_TOL

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_DEGENERATE, EXIT_PATTERN, EXIT_INCONCLUSIVE = range(6)
BUNDLED = ("e1", "lpde", "npde", "ipde")
MAX_DIMS = len(nullspace.VARIABLES)
MAX_N = 8


class ProblemError(WeissError, ValueError):
    """Invalid problem file or command-line override."""


@dataclass
class ProblemSpec:
    """Inputs of one problem: the operator, producing function, order and domain."""

    variables: list
    coefficients: list
    phi: str
    order_n: int
    unknown: str = "psi"
    solution_coefficients: list = field(default_factory=list)
    domain: dict = field(default_factory=dict)
    parameters: dict = field(default_factory=dict)
    tolerance: float | None = None
    samples: int | None = None
    seed: int | None = None
    name: str = ""

    def validate(self) -> "ProblemSpec":
        if not self.variables or len(set(self.variables)) != len(self.variables):
            raise ProblemError("variables must be a non-empty list of distinct names")
        if len(self.coefficients) != len(self.variables):
            raise ProblemError(f"{len(self.variables)} variables but {len(self.coefficients)} coefficients")
        if not isinstance(self.order_n, int) or self.order_n < 0:
            raise ProblemError("order_n must be a non-negative integer")
        if not self.solution_coefficients:
            self.solution_coefficients = [f"c{k}" for k in range(self.order_n + 1)]
        if len(self.solution_coefficients) != self.order_n + 1:
            raise ProblemError(f"order_n = {self.order_n} needs {self.order_n + 1} solution coefficients")
        for v in self.variables:
            self.domain.setdefault(v, [1.0, 2.0])
        for name, iv in self.domain.items():
            if len(iv) != 2 or not float(iv[0]) < float(iv[1]):
                raise ProblemError(f"bad interval for {name}: {iv}")
        # every expression must parse; errors surface here, not mid-command
        for text in list(self.coefficients) + [self.phi] + [str(c) for c in self.solution_coefficients]:
            parse(str(text), self.variables, (self.unknown,))
        for text in self.parameters.values():
            parse(str(text))
        return self

    def operator(self) -> DirectionalOperator:
        return DirectionalOperator.from_strings(self.variables, [str(c) for c in self.coefficients], self.unknown)

    def phi_expr(self):
        return parse(self.phi, self.variables, (self.unknown,))

    def sample_domain(self) -> SampleDomain:
        return SampleDomain({k: tuple(v) for k, v in self.domain.items()})

    def positive(self) -> tuple:
        return tuple(v for v, (lo, _) in self.domain.items() if float(lo) > 0)


_FIELDS = {"variables", "coefficients", "phi", "order_n", "unknown", "solution_coefficients",
           "domain", "parameters", "tolerance", "samples", "seed"}


def load_problem(ref: str) -> ProblemSpec:
    """Read a problem from a file path or by bundled name (``e1``, ``lpde``, ...)."""
    path = Path(ref)
    if path.is_file():
        text, name = path.read_text(), path.stem
    elif ref in BUNDLED:
        text, name = (resources.files("weiss") / "problems" / f"{ref}.toml").read_text(), ref
    else:
        raise ProblemError(f"no problem file {ref!r} (bundled: {', '.join(BUNDLED)})")
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ProblemError(f"{ref}: {exc}") from None
    unknown = set(data) - _FIELDS
    if unknown:
        raise ProblemError(f"{ref}: unknown fields {sorted(unknown)}")
    missing = {"variables", "coefficients", "phi", "order_n"} - set(data)
    if missing:
        raise ProblemError(f"{ref}: missing fields {sorted(missing)}")
    data["parameters"] = {k: str(v) for k, v in data.get("parameters", {}).items()}
    data["solution_coefficients"] = [str(c) for c in data.get("solution_coefficients", [])]
    return ProblemSpec(name=name, **data)


def parse_domain(items) -> dict:
    out = {}
    for item in items or ():
        parts = item.split(":")
        if len(parts) != 3:
            raise ProblemError(f"--domain expects VAR:LO:HI, got {item!r}")
        try:
            out[parts[0]] = [float(parts[1]), float(parts[2])]
        except ValueError:
            raise ProblemError(f"--domain bounds must be numbers, got {item!r}") from None
    return out


def spec_from_args(args) -> ProblemSpec:
    spec = load_problem(args.problem)
    spec.domain.update(parse_domain(args.domain))
    return spec.validate()


def settings(args, spec: ProblemSpec | None) -> tuple:
    """Effective (tolerance, samples, seed): flags beat the problem file beat defaults."""
    def pick(flag, attr, default):
        if flag is not None:
            return flag
        if spec is not None and getattr(spec, attr) is not None:
            return getattr(spec, attr)
        return default

    tol = float(pick(args.tol, "tolerance", DEFAULT_TOL))
    samples = int(pick(args.samples, "samples", DEFAULT_SAMPLES))
    seed = int(pick(args.seed, "seed", DEFAULT_SEED))
    if samples < 1:
        raise ProblemError("--samples must be >= 1")
    if not 0 <= seed < 1 << 64:
        raise ProblemError("--seed must be an unsigned 64-bit integer")
    if tol <= 0:
        raise ProblemError("--tol must be positive")
    return tol, samples, seed


# --- output -------------------------------------------------------------------

class Output:
    """Collects human-readable lines or a single machine record."""

    def __init__(self, command: str, machine: bool, stream=None):
        self.command = command
        self.machine = machine
        self.stream = stream or sys.stdout
        self.record = {
            "command": command, "verdict": "ok", "max_residual": None, "tolerance": None,
            "samples": None, "seed": None, "rendered_expressions": [],
        }

    def line(self, text: str = "") -> None:
        if not self.machine:
            print(text, file=self.stream)

    def expr(self, label: str, text: str) -> None:
        self.record["rendered_expressions"].append(text if not label else f"{label} = {text}")
        self.line(text if not label else f"{label} = {text}")

    def finish(self, **fields) -> None:
        self.record.update(fields)
        if self.machine:
            print(json.dumps(self.record, sort_keys=True), file=self.stream)


# --- commands -----------------------------------------------------------------

def _factor_text(c: Fraction, fmt: str) -> str:
    if c == 0:
        return r"\left(D\right)" if fmt == "latex" else "(D)"
    sign = "+" if c > 0 else "-"
    mag = "" if abs(c) == 1 else emit(parse(str(abs(c))), fmt)
    if fmt == "latex":
        return rf"\left(D {sign} {mag + ' ' if mag else ''}V\right)"
    return f"(D {sign} {mag + '*' if mag else ''}V)"


def cmd_emit_operator(args, out: Output) -> int:
    spec = spec_from_args(args)
    D, phi = spec.operator(), spec.phi_expr()
    L = build_weiss(D, phi, spec.order_n, spec.sample_domain())
    pos, fmt, vs = spec.positive(), args.format, spec.variables
    dphi = simplify(D(phi), pos)
    out.expr("phi", emit(phi, fmt, vs))
    out.expr("Dphi", emit(dphi, fmt, vs))
    out.expr("V", emit(simplify(L.V, pos), fmt, vs))
    out.expr("Q", emit(simplify(L.Q, pos), fmt, vs))
    out.expr("factors", "".join(_factor_text(c, fmt) for c in L.factors))
    out.finish()
    return EXIT_OK


def cmd_emit_pde(args, out: Output) -> int:
    spec = spec_from_args(args)
    D, phi = spec.operator(), spec.phi_expr()
    L = build_weiss(D, phi, spec.order_n, spec.sample_domain())
    lhs = expand_pde(L)
    if args.paper_form:
        lhs = divide_common_factor(lhs, spec.unknown, D.vars)
    terms = pde_terms(lhs, spec.unknown, D.vars)
    out.expr("", render_terms(terms, args.format, D.vars) + " = 0")
    out.finish()
    return EXIT_OK


def _solutions(spec: ProblemSpec) -> list:
    D, phi = spec.operator(), spec.phi_expr()
    dom = spec.sample_domain()
    if D.is_linear:
        return [nullspace.general_null(D, phi, spec.order_n, spec.solution_coefficients, dom).expr]
    sol = nullspace.solve_self_consistent(D, phi, spec.order_n, spec.solution_coefficients, dom)
    return list(sol.branches)


def cmd_solve(args, out: Output) -> int:
    spec = spec_from_args(args)
    for b in _solutions(spec):
        out.expr(spec.unknown, emit(b, args.format, spec.variables))
    out.finish()
    return EXIT_OK


def cmd_verify(args, out: Output) -> int:
    spec = spec_from_args(args)
    tol, samples, seed = settings(args, spec)
    if args.candidate is not None:
        candidates = [parse(args.candidate, spec.variables, (spec.unknown,))]
    else:
        candidates = _solutions(spec)
    D, phi, dom = spec.operator(), spec.phi_expr(), spec.sample_domain()
    reports = []
    for i, cand in enumerate(candidates, start=1):
        report = nullspace.verify_solution(D, phi, spec.order_n, cand, dom, tol, seed, samples,
                                           params=spec.parameters)
        reports.append(report)
        out.expr(f"candidate.{i}", emit(cand))
        out.line(f"[candidate {i}]")
        for text in report.to_text().splitlines():
            if not text.startswith("point."):
                out.line("  " + text)
        if report.raw_residuals:
            out.line(f"  max_raw_residual={max(report.raw_residuals)!r}")
    verdicts = [r.verdict for r in reports]
    if "fail" in verdicts:
        verdict, code = "fail", EXIT_FAIL
    elif "inconclusive" in verdicts:
        verdict, code = "inconclusive", EXIT_INCONCLUSIVE
    else:
        verdict, code = "pass", EXIT_OK
    residuals = [r.max_residual for r in reports if r.max_residual is not None]
    out.line(f"verdict={verdict}")
    out.finish(
        verdict=verdict,
        max_residual=max(residuals) if residuals else None,
        tolerance=tol,
        samples=samples,
        seed=seed,
        reports=[r.to_dict() for r in reports],
    )
    return code


def cmd_theorem_check(args, out: Output) -> int:
    tol, samples, seed = settings(args, None)
    if args.tol is None:
        tol = 1e-7
    if not 1 <= args.dims <= MAX_DIMS:
        raise ProblemError(f"--dims must lie in [1, {MAX_DIMS}]")
    if not 0 <= args.max_n <= MAX_N:
        raise ProblemError(f"--max-n must lie in [0, {MAX_N}]")
    if args.trials < 0:
        raise ProblemError("--trials must be non-negative")
    mutate = nullspace.flip_factor(args.corrupt_factor) if args.corrupt_factor is not None else None
    passed, funcs, traces, traces_ok = 0, 0, 0, 0
    failures = []
    for trial in range(args.trials):
        inst = nullspace.random_instance(seed, trial, args.dims, args.max_n)
        res = nullspace.check_instance(inst, tol, samples, seed, mutate=mutate)
        funcs += len(res.annihilated)
        traces += len(res.telescoped)
        traces_ok += sum(res.telescoped)
        if res.passed:
            passed += 1
        else:
            failures.append(res)
            out.line(f"FAIL {inst.describe()}")
            if res.error:
                out.line(f"  error: {res.error}")
            else:
                out.line(f"  residuals: {', '.join(f'{r:.3e}' for r in res.residuals)}")
            hook = f" --corrupt-factor {args.corrupt_factor}" if args.corrupt_factor is not None else ""
            out.line(f"  replay: weiss theorem-check --seed {seed} --dims {args.dims} "
                     f"--max-n {args.max_n} --trials {trial + 1}{hook}")
    out.line(f"instances: {passed}/{args.trials} pass")
    out.line(f"null functions checked: {funcs}")
    out.line(f"telescoping traces: {traces_ok}/{traces} pass")
    verdict = "pass" if not failures else "fail"
    worst = max((r for res in failures for r in res.residuals), default=None)
    out.line(f"verdict={verdict}")
    out.finish(
        verdict=verdict, max_residual=worst, tolerance=tol, samples=samples, seed=seed,
        trials=args.trials, passed=passed,
        failures=[res.instance.describe() for res in failures],
    )
    return EXIT_OK if not failures else EXIT_FAIL


COMMANDS = {
    "emit-operator": cmd_emit_operator,
    "emit-pde": cmd_emit_pde,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "theorem-check": cmd_theorem_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weiss", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="zero-test tolerance")
    common.add_argument("--samples", type=int, default=None, help="number of sample points")
    common.add_argument("--seed", type=int, default=None, help="unsigned 64-bit sampling seed")
    common.add_argument("--machine", action="store_true", help="print one JSON record")
    problem = argparse.ArgumentParser(add_help=False)
    problem.add_argument("--problem", default="e1", help="problem file or bundled name (default: e1)")
    problem.add_argument("--format", choices=("plain", "latex"), default="plain")
    problem.add_argument("--domain", action="append", metavar="VAR:LO:HI", help="override a domain interval")
    problem.add_argument("--paper-form", action="store_true", help="divide out the common factor")
    for name in ("emit-operator", "emit-pde", "solve", "verify"):
        p = sub.add_parser(name, parents=[common, problem])
        if name == "verify":
            p.add_argument("--candidate", default=None, help="expression to verify instead of the solution")
    p = sub.add_parser("theorem-check", parents=[common])
    p.add_argument("--dims", type=int, default=3, help="largest dimension drawn (<= 4)")
    p.add_argument("--max-n", type=int, default=4, help="largest order index drawn (<= 8)")
    p.add_argument("--trials", type=int, default=20)
    # mutation hook for testing the checker itself
    p.add_argument("--corrupt-factor", type=int, default=None, help=argparse.SUPPRESS)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) if exc.code in (0, 2) else EXIT_INPUT
    out = Output(args.command, args.machine)
    try:
        return COMMANDS[args.command](args, out)
    except DegenerateProducingFunction as exc:
        code, msg = EXIT_DEGENERATE, f"degenerate producing function: {exc}"
    except PatternNotRecognized as exc:
        code, msg = EXIT_PATTERN, f"pattern not recognized: {exc}"
    except (DomainExhausted, EvaluationError) as exc:
        code, msg = EXIT_INCONCLUSIVE, f"inconclusive: {exc}"
    except (WeissError, ValueError) as exc:
        code, msg = EXIT_INPUT, f"invalid input: {exc}"
    except Exception as exc:  # keep the exit-code contract total
        code, msg = EXIT_FAIL, f"internal error: {type(exc).__name__}: {exc}"
    print(f"weiss: {msg}", file=sys.stderr)
    out.finish(verdict="error", error=msg, exit_code=code)
    return code


if __name__ == "__main__":
    sys.exit(main())

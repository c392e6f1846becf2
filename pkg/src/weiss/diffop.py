"""Directional operators, the generalized pre-Schwarzian, and factored Weiss operators.

A Weiss operator of order ``n + 1`` built from a producing function ``phi`` and
a first-order operator ``D = sum_i a_i d/dx_i`` is the ordered product

    (D - n/2 V) (D - (n/2 - 1) V) ... (D + n/2 V),     V = D^2 phi / D phi.

Factors are applied right to left; they do not commute.  Operators are never
expanded into a symbol table: everything happens by applying them to concrete
expressions or to derivative atoms of an unknown.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import DegenerateProducingFunction, NonlinearOperator, WeissError
from .expr import (
    ONE,
    ZERO,
    Const,
    Deriv,
    Expr,
    Product,
    Power,
    SampleDomain,
    Sum,
    add,
    as_expr,
    const,
    deriv,
    differentiate,
    is_zero,
    mul,
    parse,
    power,
    simplify,
)
from .expr import poly

MAX_ORDER = 16


@dataclass(frozen=True)
class DirectionalOperator:
    """``D = sum_i coeffs[i] * d/d vars[i]``; coefficients may contain the unknown."""

    vars: tuple
    coeffs: tuple
    unknown: str = "psi"

    def __post_init__(self):
        vs = tuple(self.vars)
        cs = tuple(as_expr(c) for c in self.coeffs)
        if not vs:
            raise ValueError("a directional operator needs at least one variable")
        if len(vs) != len(cs):
            raise ValueError(f"{len(vs)} variables but {len(cs)} coefficients")
        object.__setattr__(self, "vars", vs)
        object.__setattr__(self, "coeffs", cs)

    @classmethod
    def from_strings(cls, variables: Sequence[str], coeffs: Sequence[str], unknown: str = "psi"):
        return cls(tuple(variables), tuple(parse(c, variables, (unknown,)) for c in coeffs), unknown)

    @property
    def is_linear(self) -> bool:
        """True when no coefficient depends on the unknown."""
        return not any(self.unknown in c.funcs for c in self.coeffs)

    def __call__(self, e) -> Expr:
        return apply(self, e)

    def default_domain(self, lo: float = 1.0, hi: float = 2.0) -> SampleDomain:
        return SampleDomain.box(self.vars, lo, hi)


def apply(D: DirectionalOperator, e) -> Expr:
    e = as_expr(e)
    return add(*(mul(a, differentiate(e, v)) for v, a in zip(D.vars, D.coeffs)))


def apply_power(D: DirectionalOperator, e, k: int) -> Expr:
    if k < 1:
        raise ValueError("k must be a positive integer")
    e = as_expr(e)
    for _ in range(k):
        e = apply(D, e)
    return e


def _check_nondegenerate(D: DirectionalOperator, dphi: Expr, domain: SampleDomain | None) -> None:
    if isinstance(dphi, Const):
        if dphi.value == 0:
            raise DegenerateProducingFunction("D(phi) is identically zero")
        return
    dom = domain or D.default_domain()
    try:
        zero = is_zero(dphi, dom)
    except WeissError:
        # cannot sample D(phi) here; the algebraic check above is all we have
        return
    if zero:
        raise DegenerateProducingFunction(f"D(phi) = {dphi} vanishes on {dom.describe()}")


def pre_schwarzian(D: DirectionalOperator, phi, domain: SampleDomain | None = None) -> Expr:
    """``V = D^2 phi / D phi``, simplified."""
    phi = as_expr(phi)
    dphi = simplify(apply(D, phi))
    _check_nondegenerate(D, dphi, domain)
    return simplify(mul(apply(D, dphi), dphi ** const(-1)))


def q_potential(D: DirectionalOperator, phi, domain: SampleDomain | None = None) -> Expr:
    """``Q = (DV - V^2 / 2) / 2``; the zeroth-order term of ``L_2``."""
    V = pre_schwarzian(D, phi, domain)
    return _q_from(D, V)


def _q_from(D, V) -> Expr:
    return simplify(mul(const(Fraction(1, 2)), add(apply(D, V), mul(const(Fraction(-1, 2)), V, V))))


@dataclass(frozen=True)
class WeissOperator:
    """The factored operator ``prod_{j=0..n} (D + (j - n/2) V)``.

    ``factors`` lists the coefficients ``j - n/2`` left to right.  The record
    may be altered with :func:`dataclasses.replace` (used to mutate operators
    when testing the verifier itself).
    """

    n: int
    D: DirectionalOperator
    phi: Expr
    V: Expr
    factors: tuple

    @property
    def order(self) -> int:
        return self.n + 1

    @property
    def Q(self) -> Expr:
        return _q_from(self.D, self.V)

    def __call__(self, f) -> Expr:
        return apply_weiss(self, f)

    def replace(self, **changes) -> "WeissOperator":
        return dataclasses.replace(self, **changes)


def factor_coefficients(n: int) -> tuple:
    return tuple(Fraction(j) - Fraction(n, 2) for j in range(n + 1))


def build_weiss(D: DirectionalOperator, phi, n: int, domain: SampleDomain | None = None,
                max_order: int = MAX_ORDER) -> WeissOperator:
    if n < 0:
        raise ValueError("n must be non-negative")
    if n > max_order:
        raise ValueError(f"n = {n} exceeds the configured cap {max_order}")
    phi = as_expr(phi)
    V = pre_schwarzian(D, phi, domain)
    return WeissOperator(n, D, phi, V, factor_coefficients(n))


def apply_factor(L: WeissOperator, c: Fraction, f: Expr) -> Expr:
    """One bracket: ``f -> D f + c V f``."""
    if c == 0:
        return apply(L.D, f)
    return add(apply(L.D, f), mul(const(c), L.V, f))


def apply_weiss(L: WeissOperator, f) -> Expr:
    """Apply the factors right to left (the rightmost bracket acts first)."""
    f = as_expr(f)
    for c in reversed(L.factors):
        f = apply_factor(L, c, f)
    return f


def _unknown_atom(L: WeissOperator) -> Deriv:
    return deriv(L.D.unknown)


def expand_pde(L: WeissOperator, unknown: str | None = None) -> Expr:
    """Left-hand side of ``L psi = 0`` with ``psi`` kept as derivative atoms.

    Works for operators whose coefficients contain the unknown (nonlinear PDEs).
    """
    return apply_weiss(L, deriv(unknown or L.D.unknown))


@dataclass(frozen=True)
class NormalForm:
    """``sum_alpha coeffs[alpha] * d^alpha`` acting on the unknown."""

    variables: tuple
    unknown: str
    coeffs: dict

    def __getitem__(self, alpha) -> Expr:
        return self.coeffs.get(tuple(alpha), ZERO)

    def apply(self, f) -> Expr:
        f = as_expr(f)
        terms = []
        for alpha, c in self.coeffs.items():
            g = f
            for v, k in zip(self.variables, alpha):
                g = differentiate(g, v, k)
            terms.append(mul(c, g))
        return add(*terms)

    @property
    def order(self) -> int:
        return max((sum(a) for a, c in self.coeffs.items() if c is not ZERO), default=0)


def _linear_collect(e: Expr, unknown: str) -> dict:
    """Coefficients of each derivative atom in an expression linear in them."""
    memo: dict = {}

    def go(node):
        hit = memo.get(node)
        if hit is not None:
            return hit
        if unknown not in node.funcs:
            out = {None: node}
        elif isinstance(node, Deriv):
            out = {node: ONE}
        elif isinstance(node, Sum):
            out = {}
            for t in node.terms:
                for k, c in go(t).items():
                    out.setdefault(k, []).append(c)
            out = {k: add(*v) for k, v in out.items()}
        elif isinstance(node, Product):
            dependent = [f for f in node.factors if unknown in f.funcs]
            if len(dependent) != 1:
                raise NonlinearOperator("expression is not linear in the unknown")
            rest = mul(*(f for f in node.factors if unknown not in f.funcs))
            out = {k: mul(rest, c) for k, c in go(dependent[0]).items()}
        else:
            raise NonlinearOperator(f"unknown appears non-linearly in {node}")
        memo[node] = out
        return out

    return go(e)


def normal_form(L: WeissOperator, unknown: str | None = None) -> NormalForm:
    unknown = unknown or L.D.unknown
    if not L.D.is_linear or unknown in L.V.funcs:
        raise NonlinearOperator("operator coefficients depend on the unknown")
    parts = _linear_collect(expand_pde(L, unknown), unknown)
    free = parts.pop(None, ZERO)
    if simplify(free) is not ZERO:
        raise NonlinearOperator("inhomogeneous term in the expansion")
    zero_index = (0,) * len(L.D.vars)
    coeffs = {zero_index: ZERO}
    for atom, c in parts.items():
        c = simplify(c)
        alpha = atom.multi_index(L.D.vars)
        if c is ZERO and alpha != zero_index:
            continue
        coeffs[alpha] = c
    ordered = dict(sorted(coeffs.items(), key=lambda kv: (-sum(kv[0]), tuple(-a for a in kv[0]))))
    return NormalForm(tuple(L.D.vars), unknown, ordered)


def pde_terms(e: Expr, unknown: str, variables: Sequence[str]) -> list:
    """Expand ``e`` in the derivative atoms of ``unknown``.

    Returns ``[(monomial, coefficient)]`` sorted with the highest derivative
    first; ``monomial`` is a tuple of ``(Deriv, power)`` pairs.
    """
    def is_key(a):
        return unknown in a.funcs

    groups = poly.collect(e, is_key)
    out = []
    for mono, coeff in groups.items():
        c = simplify(coeff)
        if c is ZERO:
            continue
        out.append((mono, c))
    out.sort(key=lambda mc: _mono_rank(mc[0], variables))
    return out


def _mono_rank(mono, variables) -> tuple:
    atoms = []
    for a, k in mono:
        alpha = a.multi_index(variables) if isinstance(a, Deriv) else ()
        atoms.extend([alpha] * abs(k))
    top = max((sum(al) for al in atoms), default=0)
    highest = sorted(atoms, key=lambda al: (-sum(al), tuple(-x for x in al)))
    return (-top, [tuple(-x for x in al) for al in highest], -len(atoms))


def pde_expr(terms) -> Expr:
    return add(*(mul(c, poly.mono_expr(m)) for m, c in terms))


def divide_common_factor(e: Expr, unknown: str, variables: Sequence[str]) -> Expr:
    """Paper-style normalisation of a PDE left-hand side.

    Removes the largest monomial in the unknown's derivative atoms that divides
    every term, then scales so the leading term has coefficient one when that
    coefficient is a rational constant.  Only valid as a statement about the
    equation ``e = 0`` away from zeros of the removed factor.
    """
    terms = pde_terms(e, unknown, variables)
    if not terms:
        return ZERO
    common = poly.mono_content({m: 1 for m, _ in terms})
    inv = poly.mono_pow(common, -1)
    terms = [(poly.mono_mul(m, inv), c) for m, c in terms]
    lead = terms[0][1]
    if isinstance(lead, Const) and lead.value not in (0, 1):
        scale = const(1 / lead.value)
        terms = [(m, simplify(mul(scale, c))) for m, c in terms]
    return pde_expr(terms)


def _atom_rank(a: Expr, variables) -> tuple:
    if isinstance(a, Power):
        a = a.base
    if isinstance(a, Deriv):
        alpha = a.multi_index(variables)
        return (sum(alpha), tuple(-x for x in alpha))
    return (-1, ())


def render_terms(terms, format: str = "plain", variables=None) -> str:
    """Render ``[(monomial, coefficient)]`` in the given order, coefficient first.

    Within a term the unknown comes before its derivatives (``psi*psi_xx``).

    ``emit`` would reorder the summands by degree; PDEs read better with the
    highest derivatives first, as :func:`pde_terms` sorts them.
    """
    from .expr import emit
    from .expr.nodes import split_coeff

    latex = format == "latex"
    order = list(variables) if variables is not None else None
    join = " " if latex else "*"
    parts = []
    for mono, coeff in terms:
        r, rest = split_coeff(coeff)
        sign = "-" if r < 0 else "+"
        r = abs(r)
        num, den = [], []
        for a, k in sorted(mono, key=lambda ak: _atom_rank(ak[0], order or [])):
            f = power(a, const(k))
            if isinstance(f, Power) and isinstance(f.exp, Const) and f.exp.value < 0:
                den.append(emit(power(f.base, const(-f.exp.value)), format, variables))
            else:
                num.append(emit(f, format, variables))
        if rest is ONE:
            body = [] if (r == 1 and (num or den)) else [emit(const(r), format, variables)]
        else:
            text = emit(mul(const(r), rest), format, variables)
            if isinstance(rest, Sum):
                text = rf"\left({text}\right)" if latex else f"({text})"
            body = [text]
        if den and latex:
            frac = rf"\frac{{{join.join(num) or '1'}}}{{{join.join(den)}}}"
            text = join.join(body + [frac])
        elif den:
            lower = den[0] if len(den) == 1 else f"({join.join(den)})"
            text = f"{join.join(body + num) or '1'}/{lower}"
        else:
            text = join.join(body + num)
        parts.append((sign, text))
    if not parts:
        return "0"
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, text in parts[1:]:
        out += f" {sign} {text}"
    return out

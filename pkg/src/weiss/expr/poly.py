"""Sparse Laurent polynomials over opaque atoms, and rational normalisation.

Anything that is not a sum, product or integer power is an *atom*: variables,
derivative atoms, function applications, and radicals ``b^(1/q)``.  A
polynomial is a dict from monomial to :class:`~fractions.Fraction`; a monomial
is a tuple of ``(atom, exponent)`` pairs sorted by atom digest, exponents
non-zero and possibly negative.

:func:`together` puts an expression over a factored common denominator,
expands the numerator and cancels denominator factors that divide it exactly.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

from .nodes import (
    ONE,
    Const,
    Deriv,
    Expr,
    Func,
    Power,
    Product,
    Sum,
    Var,
    add,
    const,
    func,
    mul,
    power,
)

MAX_TERMS = 4000


class TooLarge(Exception):
    """Expansion would exceed ``MAX_TERMS``."""


# --- monomials ----------------------------------------------------------------

def _mono(items: dict) -> tuple:
    return tuple(sorted(((a, k) for a, k in items.items() if k), key=lambda p: p[0].digest))


def mono_mul(m1: tuple, m2: tuple) -> tuple:
    if not m1:
        return m2
    if not m2:
        return m1
    d = dict(m1)
    for a, k in m2:
        d[a] = d.get(a, 0) + k
    return _mono(d)


def mono_pow(m: tuple, k: int) -> tuple:
    return tuple((a, e * k) for a, e in m)


def mono_div(m1: tuple, m2: tuple):
    """``m1 / m2`` if it has non-negative exponents, else None."""
    d = dict(m1)
    for a, k in m2:
        d[a] = d.get(a, 0) - k
        if d[a] < 0:
            return None
    return _mono(d)


def mono_degree(m: tuple) -> int:
    return sum(k for _, k in m)


# --- polynomials --------------------------------------------------------------

def p_const(c) -> dict:
    c = Fraction(c)
    return {(): c} if c else {}


def p_add(*ps) -> dict:
    out: dict = {}
    for p in ps:
        for m, c in p.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    return out


def p_scale(p: dict, c, m: tuple = ()) -> dict:
    if not c:
        return {}
    return {mono_mul(mm, m): cc * c for mm, cc in p.items()}


def p_mul(p: dict, q: dict) -> dict:
    if len(p) * len(q) > MAX_TERMS * 4:
        raise TooLarge
    out: dict = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = mono_mul(m1, m2)
            v = out.get(m, 0) + c1 * c2
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    if len(out) > MAX_TERMS:
        raise TooLarge
    return out


def p_pow(p: dict, k: int) -> dict:
    if k == 0:
        return p_const(1)
    if len(p) == 1:
        (m, c), = p.items()
        return {mono_pow(m, k): c**k}
    out = p_const(1)
    base = p
    while k:
        if k & 1:
            out = p_mul(out, base)
        k >>= 1
        if k:
            base = p_mul(base, base)
    return out


def mono_content(p: dict) -> tuple:
    """Largest monomial dividing every term (minimum exponent per atom)."""
    if not p:
        return ()
    monos = list(p)
    atoms = {a for m in monos for a, _ in m}
    mins = {}
    for a in atoms:
        mins[a] = min(dict(m).get(a, 0) for m in monos)
    return _mono(mins)


def rational_content(p: dict) -> Fraction:
    num = 0
    den = 1
    for c in p.values():
        num = gcd(num, c.numerator)
        den = den * c.denominator // gcd(den, c.denominator)
    return Fraction(num, den) if num else Fraction(1)


def leading(p: dict) -> tuple:
    return max(p, key=lambda m: (mono_degree(m), [(a.digest, k) for a, k in m]))


def primitive(p: dict):
    """Split ``p`` as ``c * m * q`` with ``q`` sign-normalised and content-free."""
    m = mono_content(p)
    inv = mono_pow(m, -1)
    q = {mono_mul(mm, inv): c for mm, c in p.items()}
    c = rational_content(q)
    if q[leading(q)] < 0:
        c = -c
    q = {mm: cc / c for mm, cc in q.items()}
    return c, m, q


def _lex_key(m: tuple, order: dict) -> tuple:
    vec = [0] * len(order)
    for a, k in m:
        vec[order[a]] = k
    return tuple(vec)


def p_divide(n: dict, d: dict):
    """Exact quotient ``n / d`` for polynomials with non-negative exponents, else None."""
    if not d:
        raise ZeroDivisionError
    atoms = sorted({a for m in list(n) + list(d) for a, _ in m}, key=lambda a: a.digest)
    order = {a: i for i, a in enumerate(atoms)}
    lt_d = max(d, key=lambda m: _lex_key(m, order))
    c_d = d[lt_d]
    r = dict(n)
    q: dict = {}
    steps = 0
    while r:
        steps += 1
        if steps > MAX_TERMS:
            return None
        lt = max(r, key=lambda m: _lex_key(m, order))
        t = mono_div(lt, lt_d)
        if t is None:
            return None
        c = r[lt] / c_d
        q[t] = q.get(t, 0) + c
        r = p_add(r, p_scale(d, -c, t))
    return q


# --- expression <-> polynomial ----------------------------------------------

def _is_atom(e: Expr) -> bool:
    return isinstance(e, (Var, Deriv, Func))


def to_poly(e: Expr, memo=None) -> dict:
    if memo is None:
        memo = {}
    hit = memo.get(e)
    if hit is not None:
        return hit
    if isinstance(e, Const):
        out = p_const(e.value)
    elif _is_atom(e):
        out = {((e, 1),): Fraction(1)}
    elif isinstance(e, Sum):
        out = p_add(*(to_poly(t, memo) for t in e.terms))
        if len(out) > MAX_TERMS:
            raise TooLarge
    elif isinstance(e, Product):
        out = p_const(1)
        for f in e.factors:
            out = p_mul(out, to_poly(f, memo))
    elif isinstance(e, Power):
        out = _power_poly(e, memo)
    else:
        raise TypeError(type(e).__name__)
    memo[e] = out
    return out


def _power_poly(e: Power, memo) -> dict:
    b, x = e.base, e.exp
    if isinstance(x, Const):
        r = x.value
        if r.denominator == 1:
            k = r.numerator
            if k > 0:
                return p_pow(to_poly(b, memo), k)
            pb = to_poly(b, memo)
            if len(pb) == 1:
                (m, c), = pb.items()
                return {mono_pow(m, k): c**k}
            return {((power(b, const(-1)), -k),): Fraction(1)}
        root = power(b, const(Fraction(1, r.denominator)))
        if isinstance(root, Power):
            return {((root, r.numerator),): Fraction(1)}
        return to_poly(power(root, const(r.numerator)), memo)
    return {((e, 1),): Fraction(1)}


def mono_expr(m: tuple) -> Expr:
    return mul(*(power(a, const(k)) for a, k in m))


def from_poly(p: dict) -> Expr:
    return add(*(mul(const(c), mono_expr(m)) for m, c in p.items()))


# --- rational normalisation ---------------------------------------------------

class _Rat:
    __slots__ = ("num", "dens")

    def __init__(self, num: dict, dens: dict):
        self.num = num      # Laurent polynomial
        self.dens = dens    # key -> [poly, exponent]; polys primitive, exponents > 0


def _key(p: dict):
    return frozenset(p.items())


def _den_product(dens: dict, want: dict) -> dict:
    out = p_const(1)
    for k, (q, e) in dens.items():
        extra = want.get(k, 0)
        if extra:
            out = p_mul(out, p_pow(q, extra))
    return out


def _out_of_range(a: Expr, k: int) -> bool:
    if not isinstance(a, Power) or not isinstance(a.exp, Const):
        return False
    r = a.exp.value
    return r.numerator == 1 and r.denominator > 1 and not 0 <= k < r.denominator


def _r_add(parts) -> _Rat:
    common: dict = {}
    for r in parts:
        for k, (q, x) in r.dens.items():
            if x > common.get(k, (None, 0))[1]:
                common[k] = (q, x)
    num: dict = {}
    for r in parts:
        want = {k: x - r.dens.get(k, (None, 0))[1] for k, (_, x) in common.items()}
        num = p_add(num, p_mul(r.num, _den_product(common, want)))
    return _Rat(num, dict(common))


def _r_mul(parts) -> _Rat:
    num = p_const(1)
    dens: dict = {}
    for r in parts:
        num = p_mul(num, r.num)
        for k, (q, x) in r.dens.items():
            dens[k] = (q, dens.get(k, (q, 0))[1] + x)
    return _Rat(num, dens)


class _Together:
    def __init__(self, positive):
        self.positive = frozenset(positive)
        self.memo: dict = {}

    def rat(self, e: Expr) -> _Rat:
        hit = self.memo.get(e)
        if hit is None:
            hit = self._rat(e)
            self.memo[e] = hit
        return hit

    def _atom(self, e: Expr) -> _Rat:
        return _Rat(to_poly(e), {})

    def _rat(self, e: Expr) -> _Rat:
        if isinstance(e, (Const, Var, Deriv)):
            return self._atom(e)
        if isinstance(e, Func):
            return self._atom(func(e.name, self.expr(e.arg)))
        if isinstance(e, Sum):
            return self._reduce(_r_add([self.rat(t) for t in e.terms]))
        if isinstance(e, Product):
            return self._reduce(_r_mul([self.rat(f) for f in e.factors]))
        if isinstance(e, Power):
            return self._power(e)
        raise TypeError(type(e).__name__)

    def _reduce(self, r: _Rat) -> _Rat:
        """Bring exponents of radical atoms ``b^(1/q)`` into ``[0, q)``.

        ``b^(1/q)`` only evaluates for ``b > 0``, so ``(b^(1/q))^q = b`` holds
        wherever the expression is defined.
        """
        if not any(_out_of_range(a, k) for m in r.num for a, k in m):
            return r
        parts = []
        for m, c in r.num.items():
            keep, extra = {}, []
            for a, k in m:
                if _out_of_range(a, k):
                    j, k = divmod(k, a.exp.value.denominator)
                    extra.append(self.rat(power(a.base, const(j))))
                if k:
                    keep[a] = k
            parts.append(_r_mul([_Rat({_mono(keep): c}, {}), *extra]))
        out = _r_add(parts)
        out = _r_mul([out, _Rat(p_const(1), dict(r.dens))])
        return self._reduce(out)

    def _power(self, e: Power) -> _Rat:
        b, x = e.base, e.exp
        if not isinstance(x, Const):
            return self._atom(power(self.expr(b), self.expr(x)))
        r = x.value
        if r.denominator == 1:
            k = r.numerator
            rb = self.rat(b)
            if k < 0:
                rb = self._invert(rb, e)
                if rb is None:
                    return self._atom(e)
                k = -k
            num = p_pow(rb.num, k)
            return self._reduce(_Rat(num, {kk: (q, xx * k) for kk, (q, xx) in rb.dens.items()}))
        return self._radical(b, r)

    def _invert(self, rb: _Rat, e: Expr):
        if not rb.num:
            return None
        c, m, q = primitive(rb.num)
        num = p_mul(_den_product(rb.dens, {k: xx for k, (_, xx) in rb.dens.items()}),
                    {mono_pow(m, -1): 1 / c})
        if q == {(): Fraction(1)}:
            return self._reduce(_Rat(num, {}))
        return self._reduce(_Rat(num, {_key(q): (q, 1)}))

    def _radical(self, b: Expr, r: Fraction) -> _Rat:
        rb = self.rat(b)
        if not rb.num:
            return self._atom(power(b, const(r)))
        c, m, q = primitive(rb.num)
        pulled = []
        rest_m = []
        if c > 0:
            pulled.append(power(const(c), const(r)))
        else:
            rest_m.append(const(c))
        for a, k in m:
            if isinstance(a, Var) and a.name in self.positive:
                pulled.append(power(a, const(k * r)))
            else:
                rest_m.append(power(a, const(k)))
        rest = mul(*rest_m, from_poly(q), *(power(from_poly(qq), const(-xx)) for qq, xx in rb.dens.values()))
        out = mul(*pulled, power(rest, const(r)))
        return self._reduce(_Rat(to_poly(out), {}))

    def finish(self, r: _Rat) -> Expr:
        if not r.num:
            return const(0)
        m = mono_content(r.num)
        inv = mono_pow(m, -1)
        n = {mono_mul(mm, inv): c for mm, c in r.num.items()}
        dens = []
        for q, x in r.dens.values():
            while x > 0:
                quotient = p_divide(n, q)
                if quotient is None:
                    break
                n = quotient
                x -= 1
            if x:
                dens.append((q, x))
        # cancellation may expose more monomial content
        m2 = mono_content(n)
        if m2:
            n = {mono_mul(mm, mono_pow(m2, -1)): c for mm, c in n.items()}
            m = mono_mul(m, m2)
        factors = [mono_expr(m)]
        if len(n) > 1:
            c = rational_content(n)
            factors.append(const(c))
            factors.append(from_poly({mm: cc / c for mm, cc in n.items()}))
        else:
            factors.append(from_poly(n))
        factors.extend(power(from_poly(q), const(-x)) for q, x in dens)
        return mul(*factors)

    def expr(self, e: Expr) -> Expr:
        return self.finish(self.rat(e))


def together(e: Expr, positive=()) -> Expr:
    """Rational normal form of ``e``.

    Variables named in ``positive`` are assumed strictly positive, which lets
    radicals split over them, e.g. ``((x+y)/y^2)^(1/2) -> (x+y)^(1/2)/y``.
    Raises :class:`TooLarge` when the expansion blows past ``MAX_TERMS``.
    """
    return _Together(positive).expr(e)


def collect(e: Expr, is_key) -> dict:
    """Group the expansion of ``e`` by the monomial in its key atoms.

    Returns ``{key monomial: coefficient expression}``.
    """
    p = to_poly(e)
    groups: dict = {}
    for m, c in p.items():
        key = tuple((a, k) for a, k in m if is_key(a))
        rest = tuple((a, k) for a, k in m if not is_key(a))
        groups.setdefault(key, {})[rest] = c
    return {k: from_poly(v) for k, v in groups.items()}

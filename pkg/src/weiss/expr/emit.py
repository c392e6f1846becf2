"""Deterministic plain-text and LaTeX rendering.

Plain output re-parses to the same expression.  Terms of a sum are ordered by
polynomial degree and then lexically, so ``1 - 2 x^2`` renders as
``1-2*x^2`` and second derivatives come out as ``psi_xx - 2*psi_xy + psi_yy``.
Only the outermost sum is spaced.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .nodes import Const, Deriv, Expr, Func, Power, Product, Sum, Var, const, mul, power

_SUM, _MUL, _POW = 1, 2, 3

_GREEK = {
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "kappa",
    "lambda", "mu", "nu", "xi", "pi", "rho", "sigma", "tau", "phi", "chi", "psi", "omega",
}


def degree(e: Expr) -> float:
    if isinstance(e, (Var, Deriv, Func)):
        return 1.0
    if isinstance(e, Const):
        return 0.0
    if isinstance(e, Product):
        return sum(degree(f) for f in e.factors)
    if isinstance(e, Power):
        if isinstance(e.exp, Const):
            return float(e.exp.value) * degree(e.base)
        return degree(e.base)
    if isinstance(e, Sum):
        return max(degree(t) for t in e.terms)
    return 0.0


class _Renderer:
    def __init__(self, latex: bool, variables):
        self.latex = latex
        self.variables = list(variables) if variables is not None else None
        self.cache: dict[tuple, str] = {}

    # --- leaves -------------------------------------------------------------
    def name(self, s: str) -> str:
        if not self.latex:
            return s
        m = re.fullmatch(r"([A-Za-z]+)_?(\d+)", s)
        if m and (len(m.group(1)) == 1 or m.group(1) in _GREEK):
            return f"{self.name(m.group(1))}_{{{m.group(2)}}}"
        if s in _GREEK:
            return "\\" + s
        if len(s) > 1:
            return f"\\mathrm{{{s}}}"
        return s

    def deriv(self, e: Deriv) -> str:
        order = self.variables or sorted(v for v, _ in e.orders)
        known = [v for v in order if e.order(v)]
        extra = sorted(v for v, _ in e.orders if v not in known)
        suffix = "".join(v * e.order(v) for v in known + extra)
        if not suffix:
            return self.name(e.func)
        if self.latex:
            return f"{self.name(e.func)}_{{{suffix}}}"
        return f"{e.func}_{suffix}"

    def number(self, c: Fraction) -> str:
        c = abs(c)
        if c.denominator == 1:
            return str(c.numerator)
        if self.latex:
            return f"\\frac{{{c.numerator}}}{{{c.denominator}}}"
        return f"{c.numerator}/{c.denominator}"

    # --- structure ----------------------------------------------------------
    def signed(self, e: Expr) -> tuple[bool, str]:
        """Render ``e`` as (negative, magnitude) in multiplicative context."""
        if isinstance(e, Const):
            return e.value < 0, self.number(e.value)
        if isinstance(e, (Product, Power)):
            return self.monomial(e)
        return False, self.render(e, _MUL)

    def monomial(self, e: Expr) -> tuple[bool, str]:
        factors = e.factors if isinstance(e, Product) else (e,)
        coeff = Fraction(1)
        num, den = [], []
        for f in factors:
            if isinstance(f, Const):
                coeff *= f.value
            elif isinstance(f, Power) and isinstance(f.exp, Const) and f.exp.value < 0:
                den.append(power(f.base, const(-f.exp.value)))
            else:
                num.append(f)
        neg = coeff < 0
        coeff = abs(coeff)
        # inside \frac a lone numerator or denominator needs no parentheses
        num_ctx = 0 if self.latex and den and len(num) == 1 and coeff.numerator == 1 else _MUL
        den_ctx = 0 if self.latex and len(den) == 1 and coeff.denominator == 1 else _MUL
        num_parts = [self.render(f, num_ctx) for f in self._ordered(num)]
        den_parts = [self.render(f, den_ctx) for f in self._ordered(den)]
        if coeff.numerator != 1:
            num_parts.insert(0, str(coeff.numerator))
        if coeff.denominator != 1:
            den_parts.insert(0, str(coeff.denominator))
        if self.latex:
            top = " ".join(num_parts) if num_parts else "1"
            if den_parts:
                return neg, f"\\frac{{{top}}}{{{' '.join(den_parts)}}}"
            return neg, top
        top = "*".join(num_parts) if num_parts else "1"
        if not den_parts:
            return neg, top
        if len(den_parts) == 1:
            return neg, f"{top}/{den_parts[0]}"
        return neg, f"{top}/({'*'.join(den_parts)})"

    def sort_key(self, t: Expr) -> str:
        """Rendering of ``t`` with its rational coefficient dropped."""
        if isinstance(t, Const):
            return ""
        if isinstance(t, Product) and isinstance(t.factors[0], Const):
            rest = t.factors[1:]
            t = rest[0] if len(rest) == 1 else mul(*rest)
        return self.monomial(t)[1] if isinstance(t, (Product, Power)) else self.render(t, _MUL)

    def _ordered(self, factors):
        # atoms and their powers first, then parenthesized sums: c2*(x+y)^2
        def composite(f):
            return isinstance(f, Sum) or (isinstance(f, Power) and isinstance(f.base, Sum))

        return sorted(factors, key=lambda f: (composite(f), -degree(f), self.render(f, _MUL)))

    def terms(self, e: Sum, top: bool) -> str:
        rendered = []
        for t in e.terms:
            neg, body = self.signed(t)
            rendered.append((degree(t), self.sort_key(t), body, neg))
        rendered.sort(key=lambda r: (r[0], r[1], r[2]))
        plus, minus = (" + ", " - ") if top else ("+", "-")
        out = []
        for i, (_, _, body, neg) in enumerate(rendered):
            if i == 0:
                out.append(("-" if neg else "") + body)
            else:
                out.append((minus if neg else plus) + body)
        return "".join(out)

    def render(self, e: Expr, ctx: int = 0, top: bool = False) -> str:
        key = (e, ctx, top)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        out = self._render(e, ctx, top)
        self.cache[key] = out
        return out

    def _render(self, e: Expr, ctx: int, top: bool) -> str:
        if isinstance(e, Var):
            return self.name(e.name)
        if isinstance(e, Deriv):
            return self.deriv(e)
        if isinstance(e, Const):
            s = self.number(e.value)
            neg = e.value < 0
            needs = (ctx >= _POW and (neg or e.value.denominator != 1)) or (ctx >= _MUL and neg)
            s = ("-" + s) if neg else s
            return self.paren(s) if needs else s
        if isinstance(e, Sum):
            s = self.terms(e, top)
            return self.paren(s) if ctx >= _MUL else s
        if isinstance(e, Func):
            arg = self.render(e.arg, 0)
            if self.latex:
                return f"\\{e.name}\\left({arg}\\right)"
            return f"{e.name}({arg})"
        if isinstance(e, Power) and not (isinstance(e.exp, Const) and e.exp.value < 0):
            return self.power(e, ctx)
        neg, body = self.monomial(e)
        s = ("-" + body) if neg else body
        if ctx >= _POW or (neg and ctx >= _MUL):
            return self.paren(s)
        if ctx >= _MUL and "/" in body and not self.latex:
            return self.paren(s)
        return s

    def power(self, e: Power, ctx: int) -> str:
        b, x = e.base, e.exp
        if self.latex:
            if isinstance(x, Const) and x.value == Fraction(1, 2):
                return f"\\sqrt{{{self.render(b, 0)}}}"
            base = self.render(b, _POW)
            return f"{base}^{{{self.render(x, 0)}}}"
        base = self.render(b, _POW)
        if isinstance(x, Const) and x.value.denominator == 1 and x.value > 0:
            s = f"{base}^{x.value.numerator}"
        else:
            s = f"{base}^({self.render(x, 0)})"
        return self.paren(s) if ctx >= _POW else s

    def paren(self, s: str) -> str:
        return f"\\left({s}\\right)" if self.latex else f"({s})"


def emit(e: Expr, format: str = "plain", variables=None) -> str:
    """Render ``e`` as ``plain`` (re-parsable) or ``latex`` text."""
    if format not in ("plain", "latex"):
        raise ValueError(f"unknown format {format!r}")
    return _Renderer(format == "latex", variables).render(e, 0, top=True)

"""Immutable, hash-consed expression nodes.

Every node is interned: two structurally equal expressions are the same Python
object, so equality is identity and hashing is O(1).  Nodes are only ever built
through the constructors at the bottom of this module (:func:`add`,
:func:`mul`, :func:`power`, ...), which keep every tree in a light canonical
form: constants folded, sums and products flattened, like terms collected and
equal bases merged.

Each node carries a ``digest``, a 64-bit structural hash that does not depend on
object addresses.  Operand order inside sums and products is the digest order,
which keeps construction and every rendering deterministic across runs.
"""

from __future__ import annotations

import hashlib
import threading
import weakref
from fractions import Fraction
from numbers import Rational

FUNCTIONS = frozenset({"exp", "log", "sin", "cos", "sqrt"})

_TABLE: "weakref.WeakValueDictionary[tuple, Expr]" = weakref.WeakValueDictionary()
_LOCK = threading.Lock()


def _hash(*parts) -> int:
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        if isinstance(part, int) and 0 <= part < 1 << 64:
            h.update(part.to_bytes(8, "little"))
        else:
            h.update(str(part).encode())
        h.update(b"\x00")
    return int.from_bytes(h.digest(), "little")


_MASK = (1 << 64) - 1


def _mix(*ints) -> int:
    # tuples of ints hash identically in every process (no string salting),
    # so this is as reproducible as _hash and much cheaper for inner nodes
    return hash(ints) & _MASK


class Expr:
    """Base class of all expression nodes.

    ``vars`` holds the names of free variables (including parameters such as
    ``c0``) and ``funcs`` the names of unknown functions referenced through
    derivative atoms.
    """

    __slots__ = ("digest", "vars", "funcs", "__weakref__")

    def __setattr__(self, key, value):
        raise AttributeError("expression nodes are immutable")

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self

    def __reduce__(self):
        from .emit import emit

        return (_reparse, (emit(self), tuple(sorted(_deriv_vars(self))), tuple(sorted(self.funcs))))

    # arithmetic sugar; subtraction and division lower to add/mul
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, mul(MINUS_ONE, as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), mul(MINUS_ONE, self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return mul(self, power(as_expr(other), MINUS_ONE))

    def __rtruediv__(self, other):
        return mul(as_expr(other), power(self, MINUS_ONE))

    def __pow__(self, other):
        return power(self, as_expr(other))

    def __rpow__(self, other):
        return power(as_expr(other), self)

    def __neg__(self):
        return mul(MINUS_ONE, self)

    def __str__(self):
        from .emit import emit

        return emit(self)

    def __repr__(self):
        return f"{type(self).__name__}({str(self)!r})"

    @property
    def free_symbols(self) -> frozenset:
        return self.vars | self.funcs

    @property
    def args(self) -> tuple:
        return ()


class Const(Expr):
    __slots__ = ("value",)

    @property
    def is_integer(self) -> bool:
        return self.value.denominator == 1


class Var(Expr):
    __slots__ = ("name",)


class Sum(Expr):
    __slots__ = ("terms",)

    @property
    def args(self):
        return self.terms


class Product(Expr):
    __slots__ = ("factors", "_split")

    @property
    def args(self):
        return self.factors


class Power(Expr):
    __slots__ = ("base", "exp")

    @property
    def args(self):
        return (self.base, self.exp)


class Func(Expr):
    __slots__ = ("name", "arg")

    @property
    def args(self):
        return (self.arg,)


class Deriv(Expr):
    """Partial derivative of an unknown function.

    ``orders`` is a tuple of ``(variable, order)`` pairs sorted by variable name
    with every order positive; the empty tuple is the undifferentiated unknown.
    """

    __slots__ = ("func", "orders")

    def order(self, var: str) -> int:
        for name, k in self.orders:
            if name == var:
                return k
        return 0

    def multi_index(self, variables) -> tuple:
        return tuple(self.order(v) for v in variables)

    @property
    def total_order(self) -> int:
        return sum(k for _, k in self.orders)


def _new(cls, key, digest, vars_, funcs, **fields):
    node = _TABLE.get(key)
    if node is not None:
        return node
    with _LOCK:
        node = _TABLE.get(key)
        if node is None:
            node = object.__new__(cls)
            object.__setattr__(node, "digest", digest)
            object.__setattr__(node, "vars", vars_)
            object.__setattr__(node, "funcs", funcs)
            for name, value in fields.items():
                object.__setattr__(node, name, value)
            _TABLE[key] = node
    return node


_EMPTY = frozenset()


def _union(nodes, attr):
    sets = [getattr(n, attr) for n in nodes]
    sets = [s for s in sets if s]
    if not sets:
        return _EMPTY
    if len(sets) == 1:
        return sets[0]
    return frozenset().union(*sets)


def const(value) -> Const:
    if type(value) is not Fraction:
        value = Fraction(value)
    key = ("c", value)
    node = _TABLE.get(key)
    if node is not None:
        return node
    return _new(Const, key, _hash("c", value.numerator, value.denominator), _EMPTY, _EMPTY, value=value)


def var(name: str) -> Var:
    return _new(Var, ("v", name), _hash("v", name), frozenset((name,)), _EMPTY, name=name)


def deriv(func: str, orders=None) -> Deriv:
    if orders is None:
        items = ()
    elif isinstance(orders, dict):
        items = tuple(orders.items())
    else:
        items = tuple(orders)
    merged: dict[str, int] = {}
    for name, k in items:
        if not isinstance(k, int) or k < 0:
            raise ValueError(f"derivative order must be a non-negative integer, got {k!r}")
        merged[name] = merged.get(name, 0) + k
    canon = tuple(sorted((n, k) for n, k in merged.items() if k))
    return _new(
        Deriv, ("d", func, canon), _hash("d", func, canon), _EMPTY, frozenset((func,)),
        func=func, orders=canon,
    )


def _raw_sum(terms: tuple) -> Sum:
    node = _TABLE.get(("+", terms))
    if node is not None:
        return node
    return _new(
        Sum, ("+", terms), _mix(1, *(t.digest for t in terms)),
        _union(terms, "vars"), _union(terms, "funcs"), terms=terms,
    )


def _raw_product(factors: tuple) -> Product:
    node = _TABLE.get(("*", factors))
    if node is not None:
        return node
    return _new(
        Product, ("*", factors), _mix(2, *(f.digest for f in factors)),
        _union(factors, "vars"), _union(factors, "funcs"), factors=factors,
    )


def _raw_power(base: Expr, exp: Expr) -> Power:
    node = _TABLE.get(("^", base, exp))
    if node is not None:
        return node
    return _new(
        Power, ("^", base, exp), _mix(3, base.digest, exp.digest),
        base.vars | exp.vars, base.funcs | exp.funcs, base=base, exp=exp,
    )


def _raw_func(name: str, arg: Expr) -> Func:
    return _new(Func, ("f", name, arg), _mix(4, _hash("f", name), arg.digest), arg.vars, arg.funcs,
                name=name, arg=arg)


_F1 = Fraction(1)
ZERO = const(0)
ONE = const(1)
MINUS_ONE = const(-1)
HALF = const(Fraction(1, 2))


def _by_digest(nodes):
    return tuple(sorted(nodes, key=lambda n: n.digest))


def _product_of(factors: tuple) -> Expr:
    if not factors:
        return ONE
    if len(factors) == 1:
        return factors[0]
    return _raw_product(factors)


def split_coeff(e: Expr) -> tuple[Fraction, Expr]:
    """Split ``e`` into a rational coefficient and the remaining factor."""
    if isinstance(e, Const):
        return e.value, ONE
    if isinstance(e, Product) and isinstance(e.factors[0], Const):
        try:
            return e._split
        except AttributeError:
            out = (e.factors[0].value, _product_of(e.factors[1:]))
            object.__setattr__(e, "_split", out)
            return out
    return _F1, e


def _scaled(c: Fraction, rest: Expr) -> Expr:
    if c is _F1 or c == 1:
        return rest
    if rest is ONE:
        return const(c)
    if isinstance(rest, Product):
        return _raw_product((const(c),) + rest.factors)
    return _raw_product((const(c), rest))


def add(*args) -> Expr:
    total = Fraction(0)
    coeffs: dict[Expr, tuple] = {}
    stack = list(reversed(args))
    while stack:
        a = stack.pop()
        if isinstance(a, Sum):
            stack.extend(reversed(a.terms))
            continue
        if isinstance(a, Const):
            total += a.value
            continue
        c, rest = split_coeff(a)
        hit = coeffs.get(rest)
        # keep the original node while a term is seen only once
        coeffs[rest] = (c, a) if hit is None else (hit[0] + c, None)
    terms = [orig if orig is not None else _scaled(c, rest) for rest, (c, orig) in coeffs.items() if c]
    if total:
        terms.append(const(total))
    if not terms:
        return ZERO
    if len(terms) == 1:
        return terms[0]
    return _raw_sum(_by_digest(terms))


def _even_integer(e: Expr) -> bool:
    return isinstance(e, Const) and e.value.denominator == 1 and e.value.numerator % 2 == 0


def mul(*args, _depth: int = 0) -> Expr:
    coeff = _F1
    groups: dict[Expr, list] = {}
    stack = list(reversed(args))
    while stack:
        a = stack.pop()
        if isinstance(a, Product):
            stack.extend(reversed(a.factors))
            continue
        if isinstance(a, Const):
            if not a.value:
                return ZERO
            if a is not ONE:
                coeff = coeff * a.value
            continue
        if isinstance(a, Power):
            groups.setdefault(a.base, []).append((a.exp, a))
        else:
            groups.setdefault(a, []).append((ONE, a))
    factors = []
    refold = False
    for base, items in groups.items():
        if len(items) == 1:
            factors.append(items[0][1])
            continue
        p = power(base, add(*(e for e, _ in items)))
        if isinstance(p, Const):
            if not p.value:
                return ZERO
            coeff = coeff * p.value
        elif isinstance(p, Product):
            refold = True
            factors.append(p)
        elif p is not ONE:
            factors.append(p)
    if refold and _depth < 4:
        return mul(const(coeff), *factors, _depth=_depth + 1)
    if not factors:
        return const(coeff)
    if len(factors) == 1:
        only = factors[0]
        if coeff is _F1 or coeff == 1:
            return only
        if isinstance(only, Sum):
            c = const(coeff)
            return add(*(mul(c, t) for t in only.terms))
        return _scaled(coeff, only)
    body = _by_digest(factors)
    if coeff is _F1 or coeff == 1:
        return _raw_product(body)
    return _raw_product((const(coeff),) + body)


def iroot(n: int, m: int):
    """Exact integer m-th root of n >= 0, or None."""
    if n < 2:
        return n
    guess = int(round(n ** (1.0 / m))) if n.bit_length() < 1000 else 1 << (n.bit_length() // m)
    # Newton refinement copes with floats that are off for big n
    x = max(guess, 1)
    for _ in range(200):
        nxt = ((m - 1) * x + n // x ** (m - 1)) // m
        if abs(nxt - x) <= 1:
            break
        x = nxt
    for cand in (x - 1, x, x + 1):
        if cand >= 0 and cand**m == n:
            return cand
    return None


def _const_power(c: Fraction, r: Fraction) -> Expr:
    if r.denominator == 1:
        if c == 0 and r < 0:
            return _raw_power(const(c), const(r))
        return const(c**r.numerator)
    if c > 0:
        m = r.denominator
        p, q = iroot(c.numerator, m), iroot(c.denominator, m)
        if p is not None and q is not None:
            return const(Fraction(p, q) ** r.numerator)
        if c.numerator == 1:
            # 1/q^r -> q^(-r) keeps a single canonical spelling
            return _const_power(Fraction(c.denominator), -r)
    return _raw_power(const(c), const(r))


def _positive_constant(e: Expr) -> bool:
    if isinstance(e, Const):
        return e.value > 0
    return isinstance(e, Power) and isinstance(e.base, Const) and e.base.value > 0 and isinstance(e.exp, Const)


def power(base: Expr, exp: Expr) -> Expr:
    if isinstance(exp, Const):
        r = exp.value
        if r == 0:
            return ONE
        if r == 1:
            return base
        if isinstance(base, Const):
            return _const_power(base.value, r)
        if isinstance(base, Power):
            # (b^s)^r = b^(s r) unless s is an even integer and r is not an integer
            if r.denominator == 1 or not _even_integer(base.exp):
                return power(base.base, mul(base.exp, exp))
        if isinstance(base, Product):
            if r.denominator == 1:
                return mul(*(power(f, exp) for f in base.factors))
            # positive constants (and their powers) move outside the root
            pos = [f for f in base.factors if _positive_constant(f)]
            if pos:
                rest = [f for f in base.factors if not _positive_constant(f)]
                return mul(*(power(f, exp) for f in pos), power(_product_of(tuple(rest)), exp))
    else:
        if isinstance(base, Power) and not _even_integer(base.exp):
            return power(base.base, mul(base.exp, exp))
    if base is ONE:
        return ONE
    if base is ZERO and isinstance(exp, Const) and exp.value > 0:
        return ZERO
    return _raw_power(base, exp)


def func(name: str, arg: Expr) -> Expr:
    if name not in FUNCTIONS:
        raise ValueError(f"unknown function {name!r}")
    if name == "sqrt":
        return power(arg, HALF)
    if isinstance(arg, Const):
        if arg.value == 0 and name in ("exp", "cos"):
            return ONE
        if arg.value == 0 and name == "sin":
            return ZERO
        if arg.value == 1 and name == "log":
            return ZERO
    if name == "log" and isinstance(arg, Func) and arg.name == "exp":
        return arg.arg
    if name == "exp" and isinstance(arg, Func) and arg.name == "log":
        return arg.arg
    return _raw_func(name, arg)


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not expressions")
    if isinstance(x, (int, Rational)):
        return const(Fraction(x))
    if isinstance(x, float):
        return const(Fraction(repr(x)))
    if isinstance(x, str):
        from .parser import parse

        return parse(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an expression")


def sub(a, b) -> Expr:
    return add(as_expr(a), mul(MINUS_ONE, as_expr(b)))


def div(a, b) -> Expr:
    return mul(as_expr(a), power(as_expr(b), MINUS_ONE))


def neg(a) -> Expr:
    return mul(MINUS_ONE, as_expr(a))


def rebuild(e: Expr, args) -> Expr:
    """Reconstruct a node of the same kind from new children."""
    if isinstance(e, Sum):
        return add(*args)
    if isinstance(e, Product):
        return mul(*args)
    if isinstance(e, Power):
        return power(*args)
    if isinstance(e, Func):
        return func(e.name, args[0])
    return e


def _deriv_vars(e: Expr) -> set:
    out: set = set()
    seen: set = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        if isinstance(n, Deriv):
            out.update(v for v, _ in n.orders)
        stack.extend(n.args)
    return out | set(e.vars)


def _reparse(text, variables, unknowns):
    from .parser import parse

    return parse(text, variables=variables, unknowns=unknowns or ("psi",))


def walk(e: Expr):
    """Yield every distinct node of the DAG once, children before parents."""
    seen: set = set()
    out = []
    stack = [(e, False)]
    while stack:
        node, done = stack.pop()
        if done:
            out.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for child in reversed(node.args):
            if id(child) not in seen:
                stack.append((child, False))
    return out

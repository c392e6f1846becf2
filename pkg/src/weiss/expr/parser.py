"""Recursive-descent parser for the plain infix expression syntax.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | base ('^' factor)?
    base   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'

``^`` is right associative and binds tighter than unary minus, so ``-x^2`` is
``-(x^2)``.  Numbers are decimal literals; ``p/q`` spells an exact rational
through ordinary division, which folds to a constant.  ``psi_xy`` style
identifiers become derivative atoms when the prefix is a declared unknown and
the suffix splits into declared variables.
"""

from __future__ import annotations

import re
from fractions import Fraction

from ..errors import ParseError, UnknownFunctionError
from .nodes import FUNCTIONS, MINUS_ONE, Expr, add, const, deriv, func, mul, power, var

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\*\*|[-+*/^(),])
    """,
    re.VERBOSE,
)


def tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", _offset(text, pos),
                             {"number", "identifier", "operator"})
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            if value == "**":
                value = "^"
            tokens.append((kind, value, _offset(text, pos)))
        pos = m.end()
    tokens.append(("end", "", _offset(text, len(text))))
    return tokens


def _offset(text: str, pos: int) -> int:
    return len(text[:pos].encode())


def split_derivative(name: str, variables, unknowns):
    """Return ``(unknown, orders)`` if ``name`` denotes a derivative atom."""
    if name in unknowns:
        return name, ()
    head, sep, suffix = name.partition("_")
    if not sep or head not in unknowns or not suffix:
        return None
    if variables is None:
        variables = [c for c in suffix]
    names = sorted(set(variables), key=len, reverse=True)
    orders: dict[str, int] = {}
    i = 0
    while i < len(suffix):
        for v in names:
            if suffix.startswith(v, i):
                orders[v] = orders.get(v, 0) + 1
                i += len(v)
                break
        else:
            return None
    return head, tuple(orders.items())


class _Parser:
    def __init__(self, text, variables, unknowns):
        self.tokens = tokenize(text)
        self.i = 0
        self.variables = None if variables is None else list(variables)
        self.unknowns = frozenset(unknowns)

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, off = self.peek()
        if val != value or kind == "end":
            raise ParseError(f"unexpected {_describe(self.peek())}", off, {repr(value)})
        return self.advance()

    def parse(self) -> Expr:
        e = self.expr()
        kind, _, off = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {_describe(self.peek())}", off,
                             {"'+'", "'-'", "'*'", "'/'", "'^'", "end of input"})
        return e

    def expr(self) -> Expr:
        terms = [self.term()]
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.advance()[1]
            t = self.term()
            terms.append(t if op == "+" else mul(MINUS_ONE, t))
        return terms[0] if len(terms) == 1 else add(*terms)

    def term(self) -> Expr:
        factors = [self.factor()]
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.advance()[1]
            f = self.factor()
            factors.append(f if op == "*" else power(f, MINUS_ONE))
        return factors[0] if len(factors) == 1 else mul(*factors)

    def factor(self) -> Expr:
        if self.peek()[:2] == ("op", "-"):
            self.advance()
            return mul(MINUS_ONE, self.factor())
        b = self.base()
        if self.peek()[:2] == ("op", "^"):
            self.advance()
            return power(b, self.factor())
        return b

    def base(self) -> Expr:
        kind, value, off = self.peek()
        if kind == "number":
            self.advance()
            return const(Fraction(value))
        if kind == "ident":
            self.advance()
            if self.peek()[:2] == ("op", "("):
                if value not in FUNCTIONS:
                    raise UnknownFunctionError(f"unknown function {value!r}", off,
                                               {repr(f) for f in FUNCTIONS})
                self.advance()
                arg = self.expr()
                self.expect(")")
                return func(value, arg)
            atom = split_derivative(value, self.variables, self.unknowns)
            if atom is not None:
                return deriv(*atom)
            return var(value)
        if (kind, value) == ("op", "("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        raise ParseError(f"unexpected {_describe(self.peek())}", off,
                         {"number", "identifier", "'('", "'-'"})


def _describe(tok) -> str:
    kind, value, _ = tok
    if kind == "end":
        return "end of input"
    return f"{kind} {value!r}"


def parse(text: str, variables=None, unknowns=("psi",)) -> Expr:
    """Parse ``text`` into an expression.

    ``variables`` lists the declared coordinate names used to split derivative
    suffixes (``psi_xy``); without it every suffix character is one variable.
    """
    if not isinstance(text, str):
        raise TypeError("parse expects a string")
    return _Parser(text, variables, unknowns).parse()

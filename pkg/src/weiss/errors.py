"""Exception hierarchy shared by every weiss module."""


class WeissError(Exception):
    """Base class for all errors raised by the toolkit."""


class ParseError(WeissError, ValueError):
    """Syntax error in an expression string.

    ``offset`` is the byte offset of the offending token and ``expected`` the
    set of token kinds that would have been accepted there.
    """

    def __init__(self, message, offset=None, expected=()):
        self.offset = offset
        self.expected = frozenset(expected)
        detail = message
        if offset is not None:
            detail += f" at offset {offset}"
        if self.expected:
            detail += f" (expected one of: {', '.join(sorted(self.expected))})"
        super().__init__(detail)


class UnknownFunctionError(ParseError):
    pass


class EvaluationError(WeissError, ArithmeticError):
    """Numeric evaluation failed at a point."""


class MissingSymbolError(EvaluationError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class DivisionByZero(EvaluationError):
    pass


class NonPositiveBase(EvaluationError):
    """A power with non-integer exponent met a base <= 0."""


class LogDomainError(EvaluationError):
    pass


class NonFiniteValue(EvaluationError):
    pass


class DomainExhausted(WeissError):
    """Guard rejection left too few admissible sample points."""


class DegenerateProducingFunction(WeissError):
    """D(phi) vanishes identically, so the pre-Schwarzian is undefined."""


class NonlinearOperator(WeissError):
    """The operator coefficients depend on the unknown function."""


class PatternNotRecognized(WeissError):
    """D(phi) is not of the form E * psi**m with E free of psi."""


class CoefficientArityMismatch(WeissError, ValueError):
    pass

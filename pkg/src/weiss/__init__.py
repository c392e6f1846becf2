"""Generalized Weiss operators: construction, null functions, verification."""

from .diffop import (
    DirectionalOperator,
    NormalForm,
    WeissOperator,
    apply,
    apply_power,
    apply_weiss,
    build_weiss,
    divide_common_factor,
    expand_pde,
    normal_form,
    pre_schwarzian,
    q_potential,
)
from .errors import (
    CoefficientArityMismatch,
    DegenerateProducingFunction,
    DomainExhausted,
    EvaluationError,
    NonlinearOperator,
    ParseError,
    PatternNotRecognized,
    WeissError,
)
from .expr import (
    Expr,
    SampleDomain,
    differentiate,
    emit,
    evaluate,
    free_symbols,
    is_zero,
    parse,
    simplify,
    substitute,
)
from .nullspace import (
    NullFunction,
    SelfConsistentSolution,
    basis,
    general_null,
    solve_self_consistent,
    verify_solution,
    verify_telescoping,
)
from .verify import VerificationReport, fd_crosscheck, residual_check, sample_points

__version__ = "0.1.0"

__all__ = [
    "CoefficientArityMismatch", "DegenerateProducingFunction", "DirectionalOperator",
    "DomainExhausted", "EvaluationError", "Expr", "NonlinearOperator", "NormalForm",
    "NullFunction", "ParseError", "PatternNotRecognized", "SampleDomain",
    "SelfConsistentSolution", "VerificationReport", "WeissError", "WeissOperator", "apply",
    "apply_power", "apply_weiss", "basis", "build_weiss", "differentiate",
    "divide_common_factor", "emit", "evaluate", "expand_pde", "fd_crosscheck", "free_symbols",
    "general_null", "is_zero", "normal_form", "parse", "pre_schwarzian", "q_potential",
    "residual_check", "sample_points", "simplify", "solve_self_consistent", "substitute",
    "verify_solution", "verify_telescoping",
]

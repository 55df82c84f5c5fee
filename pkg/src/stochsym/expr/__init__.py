"""Symbolic expressions: parsing, simplification, calculus, numerics."""

from .calculus import (
    NoClosedFormInverse,
    differentiate,
    integrate_univariate,
    invert_candidates,
    substitute,
)
from .canonical import simplify
from .nodes import (
    FUNCTIONS,
    HALF,
    MINUS_ONE,
    ONE,
    ZERO,
    Add,
    Dec,
    Expr,
    Func,
    Mul,
    Neg,
    Num,
    Pow,
    Var,
    as_expr,
    cos,
    exp,
    log,
    sin,
    sqrt,
)
from .numeric import (
    DomainError,
    NonZero,
    NumericZero,
    SamplingExhausted,
    SymbolicZero,
    ZeroTestConfig,
    compile_expr,
    eval_array,
    eval_numeric,
    is_zero,
)
from .parser import ExprSyntaxError, UnknownIdentifierError, identifiers, parse, parse_many
from .space import DEFAULT_DOMAINS, Domains, VarSpace

__all__ = [name for name in dir() if not name.startswith("_")]

"""Immutable expression nodes and their grammar-conformant printed form."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterator

FUNCTIONS = ("exp", "log", "sqrt", "sin", "cos")

# printing precedence levels
_P_ADD, _P_MUL, _P_NEG, _P_POW, _P_ATOM = 1, 2, 3, 4, 5


class Expr:
    """Base class of the expression tree.

    Nodes are hashable values compared structurally.  Arithmetic operators
    build raw (unsimplified) trees; call :func:`stochsym.expr.simplify` to
    canonicalize.
    """

    __slots__ = ("_hash", "_str", "_cache")

    def _fields(self) -> tuple:
        raise NotImplementedError

    def _setup(self) -> None:
        self._hash = hash((type(self).__name__,) + self._fields())
        self._str = None
        self._cache = None

    @property
    def children(self) -> tuple[Expr, ...]:
        return ()

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if type(self) is not type(other) or self._hash != other._hash:
            return False
        return self._fields() == other._fields()

    def __ne__(self, other: object) -> bool:
        return not self.__eq__(other)

    def __setattr__(self, name, value):
        if name in ("_str", "_cache") or not hasattr(self, "_hash"):
            object.__setattr__(self, name, value)
        else:
            raise AttributeError(f"{type(self).__name__} is immutable")

    def __str__(self) -> str:
        if self._str is None:
            object.__setattr__(self, "_str", _print(self, 0))
        return self._str

    def __repr__(self) -> str:
        return f"Expr({str(self)!r})"

    def walk(self) -> Iterator[Expr]:
        yield self
        for c in self.children:
            yield from c.walk()

    def free_vars(self) -> frozenset[str]:
        return frozenset(n.name for n in self.walk() if isinstance(n, Var))

    def size(self) -> int:
        return sum(1 for _ in self.walk())

    # raw tree builders
    def __add__(self, other):
        return Add((self, as_expr(other)))

    def __radd__(self, other):
        return Add((as_expr(other), self))

    def __sub__(self, other):
        return Add((self, Neg(as_expr(other))))

    def __rsub__(self, other):
        return Add((as_expr(other), Neg(self)))

    def __mul__(self, other):
        return Mul((self, as_expr(other)))

    def __rmul__(self, other):
        return Mul((as_expr(other), self))

    def __truediv__(self, other):
        return Mul((self, Pow(as_expr(other), MINUS_ONE)))

    def __rtruediv__(self, other):
        return Mul((as_expr(other), Pow(self, MINUS_ONE)))

    def __pow__(self, other):
        return Pow(self, as_expr(other))

    def __neg__(self):
        return Neg(self)


class Num(Expr):
    """Exact rational constant (integer when the denominator is 1)."""

    __slots__ = ("value",)

    def __init__(self, value) -> None:
        v = Fraction(value)
        object.__setattr__(self, "value", v)
        self._setup()

    def _fields(self):
        return (self.value,)

    @property
    def kind(self) -> str:
        return "integer" if self.value.denominator == 1 else "rational"


class Dec(Expr):
    """Decimal (floating point) literal."""

    __slots__ = ("value",)

    def __init__(self, value: float) -> None:
        object.__setattr__(self, "value", float(value))
        self._setup()

    def _fields(self):
        return (self.value,)

    kind = "decimal"


class Var(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str) -> None:
        object.__setattr__(self, "name", name)
        self._setup()

    def _fields(self):
        return (self.name,)


class Add(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms) -> None:
        terms = tuple(terms)
        if len(terms) < 2:
            raise ValueError("Add needs at least two terms")
        object.__setattr__(self, "terms", terms)
        self._setup()

    def _fields(self):
        return self.terms

    @property
    def children(self):
        return self.terms


class Mul(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors) -> None:
        factors = tuple(factors)
        if len(factors) < 2:
            raise ValueError("Mul needs at least two factors")
        object.__setattr__(self, "factors", factors)
        self._setup()

    def _fields(self):
        return self.factors

    @property
    def children(self):
        return self.factors


class Pow(Expr):
    __slots__ = ("base", "exp")

    def __init__(self, base: Expr, exp: Expr) -> None:
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "exp", exp)
        self._setup()

    def _fields(self):
        return (self.base, self.exp)

    @property
    def children(self):
        return (self.base, self.exp)


class Neg(Expr):
    __slots__ = ("arg",)

    def __init__(self, arg: Expr) -> None:
        object.__setattr__(self, "arg", arg)
        self._setup()

    def _fields(self):
        return (self.arg,)

    @property
    def children(self):
        return (self.arg,)


class Func(Expr):
    __slots__ = ("name", "arg")

    def __init__(self, name: str, arg: Expr) -> None:
        if name not in FUNCTIONS:
            raise ValueError(f"unknown function {name!r}")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "arg", arg)
        self._setup()

    def _fields(self):
        return (self.name, self.arg)

    @property
    def children(self):
        return (self.arg,)


ZERO = Num(0)
ONE = Num(1)
MINUS_ONE = Num(-1)
HALF = Num(Fraction(1, 2))


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, Fraction)):
        return Num(value)
    if isinstance(value, float):
        return Dec(value)
    raise TypeError(f"cannot convert {type(value).__name__} to Expr")


def exp(e) -> Expr:
    return Func("exp", as_expr(e))


def log(e) -> Expr:
    return Func("log", as_expr(e))


def sqrt(e) -> Expr:
    return Func("sqrt", as_expr(e))


def sin(e) -> Expr:
    return Func("sin", as_expr(e))


def cos(e) -> Expr:
    return Func("cos", as_expr(e))


def add(*terms) -> Expr:
    terms = [as_expr(t) for t in terms]
    if not terms:
        return ZERO
    return terms[0] if len(terms) == 1 else Add(terms)


def mul(*factors) -> Expr:
    factors = [as_expr(f) for f in factors]
    if not factors:
        return ONE
    return factors[0] if len(factors) == 1 else Mul(factors)


# ---------------------------------------------------------------- printing


def _prec(e: Expr) -> int:
    if isinstance(e, Num):
        if e.value.denominator != 1:
            return _P_MUL
        return _P_NEG if e.value < 0 else _P_ATOM
    if isinstance(e, Dec):
        return _P_NEG if e.value < 0 or str(e.value).startswith("-") else _P_ATOM
    if isinstance(e, (Var, Func)):
        return _P_ATOM
    if isinstance(e, Add):
        return _P_ADD
    if isinstance(e, Mul):
        return _P_MUL
    if isinstance(e, Neg):
        return _P_NEG
    return _P_POW


def _wrap(e: Expr, min_prec: int) -> str:
    s = _print(e, min_prec)
    return f"({s})" if _prec(e) < min_prec else s


def _negated(e: Expr) -> Expr | None:
    """The positive counterpart of a term that prints with a leading minus."""
    if isinstance(e, Neg):
        return e.arg
    if isinstance(e, Num) and e.value < 0:
        return Num(-e.value)
    if isinstance(e, Mul) and isinstance(e.factors[0], Num) and e.factors[0].value < 0:
        lead = -e.factors[0].value
        rest = e.factors[1:]
        if lead == 1:
            return rest[0] if len(rest) == 1 else Mul(rest)
        return Mul((Num(lead),) + rest)
    return None


def _print_num(v: Fraction) -> str:
    if v.denominator == 1:
        return str(v.numerator)
    return f"{v.numerator}/{v.denominator}"


def _print(e: Expr, ctx: int) -> str:
    if isinstance(e, Num):
        return _print_num(e.value)
    if isinstance(e, Dec):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Func):
        return f"{e.name}({_print(e.arg, 0)})"
    if isinstance(e, Neg):
        return "-" + _wrap(e.arg, _P_POW)
    if isinstance(e, Pow):
        base = _wrap(e.base, _P_ATOM)
        x = e.exp
        if isinstance(x, Num) and x.value.denominator == 1 and x.value >= 0:
            return f"{base}^{x.value.numerator}"
        return f"{base}^{_wrap(x, _P_ATOM)}"
    if isinstance(e, Add):
        parts = [_wrap(e.terms[0], _P_ADD)]
        for t in e.terms[1:]:
            pos = _negated(t)
            if pos is not None:
                parts.append(" - " + _wrap(pos, _P_MUL))
            else:
                parts.append(" + " + _wrap(t, _P_MUL))
        return "".join(parts)
    if isinstance(e, Mul):
        return _print_mul(e)
    raise TypeError(type(e))


def _print_mul(e: Mul) -> str:
    num: list[Expr] = []
    den: list[Expr] = []
    for f in e.factors:
        if (
            isinstance(f, Pow)
            and isinstance(f.exp, Num)
            and f.exp.value < 0
        ):
            k = -f.exp.value
            den.append(f.base if k == 1 else Pow(f.base, Num(k)))
        else:
            num.append(f)
    if den and num and isinstance(num[0], Num) and num[0].value.denominator != 1:
        v = num[0].value
        den.insert(0, Num(v.denominator))
        num = [Num(v.numerator)] + num[1:]
        if num[0] == Num(1) and len(num) > 1:
            num = num[1:]
    sign = ""
    if num and isinstance(num[0], Num) and num[0].value < 0 and num[0].value.denominator == 1:
        v = -num[0].value
        sign = "-"
        num = ([Num(v)] if v != 1 or len(num) == 1 else []) + num[1:]
    if num:
        pieces = [_wrap(num[0], _P_MUL)] + [_wrap(f, _P_NEG) for f in num[1:]]
        top = "*".join(pieces)
    else:
        top = "1"
    if not den:
        return sign + top
    if len(den) == 1:
        bottom = _wrap(den[0], _P_POW)
    else:
        bottom = "(" + "*".join(_wrap(f, _P_NEG) for f in den) + ")"
    return f"{sign}{top}/{bottom}"

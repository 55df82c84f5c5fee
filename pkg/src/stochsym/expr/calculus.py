"""Differentiation, substitution, rule-based integration and inversion."""

from __future__ import annotations

from fractions import Fraction
from math import factorial
from typing import Mapping

from ..errors import NoClosedFormInverse
from .canonical import (
    RF,
    _expand,
    _is_dirty,
    _node_cache,
    gen_kind,
    mono_mul,
    simplify,
    to_expr,
    to_rf,
)
from .nodes import (
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
)


def _depends(e: Expr, v: str) -> bool:
    c = _node_cache(e)
    fv = c.get("fv")
    if fv is None:
        fv = e.free_vars()
        c["fv"] = fv
    return v in fv


def _add(terms: list[Expr]) -> Expr:
    terms = [t for t in terms if t != ZERO]
    if not terms:
        return ZERO
    return terms[0] if len(terms) == 1 else Add(terms)


def _mul(factors: list[Expr]) -> Expr:
    if any(f == ZERO for f in factors):
        return ZERO
    factors = [f for f in factors if f != ONE]
    if not factors:
        return ONE
    return factors[0] if len(factors) == 1 else Mul(factors)


def _d(e: Expr, v: str) -> Expr:
    if not _depends(e, v):
        return ZERO
    if isinstance(e, Var):
        return ONE
    if isinstance(e, Add):
        return _add([_d(t, v) for t in e.terms])
    if isinstance(e, Mul):
        out = []
        fs = e.factors
        for i, f in enumerate(fs):
            df = _d(f, v)
            if df != ZERO:
                out.append(_mul([df, *fs[:i], *fs[i + 1:]]))
        return _add(out)
    if isinstance(e, Neg):
        return Neg(_d(e.arg, v))
    if isinstance(e, Pow):
        b, x = e.base, e.exp
        db = _d(b, v)
        if not _depends(x, v):
            if isinstance(x, Num):
                lowered: Expr = Pow(b, Num(x.value - 1))
            else:
                lowered = Pow(b, Add((x, MINUS_ONE)))
            return _mul([x, lowered, db])
        dx = _d(x, v)
        inner = _add([_mul([dx, Func("log", b)]), _mul([x, db, Pow(b, MINUS_ONE)])])
        return _mul([e, inner])
    if isinstance(e, Func):
        a = e.arg
        da = _d(a, v)
        if e.name == "exp":
            return _mul([e, da])
        if e.name == "log":
            return _mul([da, Pow(a, MINUS_ONE)])
        if e.name == "sqrt":
            return _mul([HALF, da, Pow(e, MINUS_ONE)])
        if e.name == "sin":
            return _mul([Func("cos", a), da])
        if e.name == "cos":
            return Neg(_mul([Func("sin", a), da]))
    raise TypeError(type(e))


def differentiate(e: Expr, v: str | Var) -> Expr:
    """Exact partial derivative of ``e`` with respect to ``v``, simplified."""
    name = v.name if isinstance(v, Var) else v
    s = simplify(e)
    c = _node_cache(s)
    key = ("d", name)
    r = c.get(key)
    if r is None:
        r = simplify(_d(s, name))
        c[key] = r
    return r


def _subst(e: Expr, b: Mapping[str, Expr]) -> Expr:
    if isinstance(e, Var):
        return b.get(e.name, e)
    if isinstance(e, (Num, Dec)):
        return e
    if not (e.free_vars() & b.keys()):
        return e
    if isinstance(e, Add):
        return Add(tuple(_subst(t, b) for t in e.terms))
    if isinstance(e, Mul):
        return Mul(tuple(_subst(t, b) for t in e.factors))
    if isinstance(e, Pow):
        return Pow(_subst(e.base, b), _subst(e.exp, b))
    if isinstance(e, Neg):
        return Neg(_subst(e.arg, b))
    if isinstance(e, Func):
        return Func(e.name, _subst(e.arg, b))
    raise TypeError(type(e))


def substitute(e: Expr, bindings: Mapping) -> Expr:
    """Simultaneous substitution of variables, followed by simplification."""
    b = {(k.name if isinstance(k, Var) else k): as_expr(val) for k, val in bindings.items()}
    return simplify(_subst(e, b))


# ------------------------------------------------------------ integration


def _split_terms(rf: RF) -> list[RF]:
    """Additive pieces sharing the denominator factors of ``rf``."""
    if rf.coef == 0:
        return []
    pos = {k: e for k, e in rf.factors if e > 0}
    neg = tuple((k, e) for k, e in rf.factors if e < 0)
    p = _expand(rf.coef, rf.mono, pos)
    if any(_is_dirty(m) for m in p):
        return [rf]
    return [RF(c, m, neg) for m, c in p.items()]


def _v_poly(key: tuple, v: str) -> dict | None:
    """Coefficients of a factor viewed as a polynomial in ``v``."""
    out: dict = {}
    for m, c in key:
        deg = 0
        rest = []
        for g, e in m:
            if isinstance(g, Var) and g.name == v:
                deg = e
            elif _depends(g, v):
                return None
            else:
                rest.append((g, e))
        if not isinstance(deg, int) or deg < 0:
            return None
        piece = to_expr(RF(c, tuple(rest)))
        out[deg] = simplify(Add((out[deg], piece))) if deg in out else piece
    return out


def _integrate_term(rf: RF, v: str) -> Expr | None:
    e = to_expr(rf)
    if not _depends(e, v):
        return _mul([e, Var(v)])
    r: Fraction | int = 0
    rate: list[Expr] = []
    const_mono = []
    for g, k in rf.mono:
        if not _depends(g, v):
            const_mono.append((g, k))
        elif isinstance(g, Var):
            r = k
        elif gen_kind(g) == "exp":
            arg = to_rf(g.arg)
            if arg.factors or len(arg.mono) == 0:
                return None
            d = dict(arg.mono)
            if d.get(Var(v)) != 1:
                return None
            rest = mono_mul(arg.mono, ((Var(v), 1),), -1)
            if any(_depends(h, v) for h, _ in rest):
                return None
            rate.append(to_expr(RF(arg.coef * k, rest)))
        else:
            return None
    vfac = [(key, k) for key, k in rf.factors if any(_depends(g, v) for m, _ in key for g, _ in m)]
    cfac = tuple((key, k) for key, k in rf.factors if (key, k) not in vfac)
    C = to_expr(RF(rf.coef, tuple(const_mono), cfac))
    x = Var(v)
    if not vfac:
        if not rate:
            if r == -1:
                return _mul([C, Func("log", x)])
            return _mul([C, Num(Fraction(1) / (r + 1)), Pow(x, Num(r + 1))])
        if not (isinstance(r, int) and r >= 0):
            return None
        alpha = simplify(_add(rate))
        ex = Func("exp", _mul([alpha, x]))
        acc = []
        for j in range(r + 1):
            coef = Fraction((-1) ** j * factorial(r), factorial(r - j))
            acc.append(_mul([Num(coef), Pow(x, Num(r - j)), Pow(alpha, Num(-(j + 1)))]))
        return _mul([C, ex, _add(acc)])
    if rate or len(vfac) != 1:
        return None
    key, k = vfac[0]
    poly = _v_poly(key, v)
    if poly is None:
        return None
    F = to_expr(RF(1, (), ((key, 1),)))
    degs = sorted(poly)
    if degs == [0, 1] and r == 0:
        a = poly[1]
        scale = Pow(a, MINUS_ONE)
    elif degs == [0, 2] and r == 1:
        a = poly[2]
        scale = _mul([HALF, Pow(a, MINUS_ONE)])
    else:
        return None
    if k == -1:
        prim: Expr = Func("log", F)
    else:
        prim = _mul([Num(Fraction(1, k + 1)), Pow(F, Num(k + 1))])
    return _mul([C, scale, prim])


def integrate_univariate(e: Expr, v: str | Var) -> Expr | None:
    """Antiderivative of ``e`` in ``v`` from a small rule table, or None.

    Every returned result satisfies ``d/dv F - e == 0`` after simplification;
    candidates failing that check are discarded.
    """
    name = v.name if isinstance(v, Var) else v
    rf = to_rf(simplify(e))
    if rf.coef == 0:
        return ZERO
    parts = []
    for piece in _split_terms(rf):
        got = _integrate_term(piece, name)
        if got is None:
            return None
        parts.append(got)
    F = simplify(_add(parts))
    check = to_rf(Add((differentiate(F, name), Neg(e))))
    if check.coef != 0:
        return None
    return F


# ------------------------------------------------------------ inversion


def _peel(e: Expr, target: Expr, x: str) -> list[Expr]:
    if isinstance(e, Var) and e.name == x:
        return [target]
    if isinstance(e, Add):
        dep = [t for t in e.terms if _depends(t, x)]
        if len(dep) != 1:
            raise NoClosedFormInverse(f"{x} occurs in several terms of {e}")
        rest = [Neg(t) for t in e.terms if t is not dep[0]]
        return _peel(dep[0], Add((target, *rest)), x)
    if isinstance(e, Mul):
        dep = [f for f in e.factors if _depends(f, x)]
        if len(dep) != 1:
            raise NoClosedFormInverse(f"{x} occurs in several factors of {e}")
        rest = [Pow(f, MINUS_ONE) for f in e.factors if f is not dep[0]]
        return _peel(dep[0], Mul((target, *rest)), x)
    if isinstance(e, Neg):
        return _peel(e.arg, Neg(target), x)
    if isinstance(e, Pow):
        b, c = e.base, e.exp
        if _depends(b, x) and not _depends(c, x):
            root = Pow(target, Pow(c, MINUS_ONE))
            cv = to_rf(c)
            even = cv.is_const and cv.coef.denominator == 1 and cv.coef.numerator % 2 == 0
            if even:
                return _peel(b, root, x) + _peel(b, Neg(root), x)
            return _peel(b, root, x)
        if _depends(c, x) and not _depends(b, x):
            return _peel(c, Mul((Func("log", target), Pow(Func("log", b), MINUS_ONE))), x)
        raise NoClosedFormInverse(f"cannot invert {e}")
    if isinstance(e, Func):
        if e.name == "exp":
            return _peel(e.arg, Func("log", target), x)
        if e.name == "log":
            return _peel(e.arg, Func("exp", target), x)
        if e.name == "sqrt":
            return _peel(e.arg, Pow(target, Num(2)), x)
    raise NoClosedFormInverse(f"cannot invert {e}")


def invert_candidates(forward: Expr, old: str, new: str) -> list[Expr]:
    """Closed-form candidates for ``old`` solving ``new = forward(old)``.

    Raises :class:`NoClosedFormInverse` when the peeling rules do not apply.
    """
    f = simplify(forward)
    if not _depends(f, old):
        raise NoClosedFormInverse(f"{forward} does not depend on {old}")
    out = []
    for cand in _peel(f, Var(new), old):
        s = simplify(cand)
        if s not in out:
            out.append(s)
    return out

"""Factored rational-function normal form behind :func:`simplify`.

An expression is mapped to ``coef * mono * prod(F_k ** e_k)`` where

* ``coef`` is an exact rational,
* ``mono`` is a product of *generators* raised to rational powers
  (variables, ``log``/``sin``/``cos`` atoms, ``exp`` atoms and radicals),
* each ``F_k`` is a primitive polynomial in the generators with integer
  coefficients, positive leading coefficient and no monomial content, and
  ``e_k`` is a nonzero integer.

Products only touch exponent vectors; sums expand over the common factors,
so an identity between rational functions of independent generators always
collapses to the literal zero.  Rewrites beyond that (``exp``/``log``
inverses, splitting of ``exp`` over sums, radical powers) are syntactic.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd

from .nodes import (
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
)

_RANK = {"var": 0, "log": 1, "sin": 2, "cos": 3, "exp": 4, "rad": 5}
_DIV_STEP_LIMIT = 20000

E1 = Func("exp", ONE)


def _node_cache(e: Expr) -> dict:
    c = e._cache
    if c is None:
        c = {}
        object.__setattr__(e, "_cache", c)
    return c


def gen_kind(g: Expr) -> str:
    if isinstance(g, Var):
        return "var"
    if isinstance(g, Func):
        return g.name
    return "rad"


def gen_key(g: Expr) -> tuple:
    c = _node_cache(g)
    k = c.get("gkey")
    if k is None:
        k = (_RANK[gen_kind(g)], str(g))
        c["gkey"] = k
    return k


def _nexp(e):
    if isinstance(e, Fraction) and e.denominator == 1:
        return e.numerator
    return e


def _mono(d: dict) -> tuple:
    return tuple(sorted(d.items(), key=lambda ge: gen_key(ge[0])))


def mono_mul(a: tuple, b: tuple, sign: int = 1) -> tuple:
    if not b:
        return a
    if not a and sign == 1:
        return b
    d = dict(a)
    for g, e in b:
        v = d.get(g, 0) + sign * e
        if v:
            d[g] = _nexp(v)
        else:
            d.pop(g, None)
    return _mono(d)


def mono_pow(m: tuple, k) -> tuple:
    if k == 0:
        return ()
    return tuple((g, _nexp(e * k)) for g, e in m)


def _rad_q(g: Expr) -> int:
    return g.exp.value.denominator


def _is_dirty(m: tuple) -> bool:
    for g, e in m:
        if gen_kind(g) == "rad" and not (0 <= e < _rad_q(g)):
            return True
    return False


# ------------------------------------------------------------ polynomials


def poly_mul(p: dict, q: dict) -> dict:
    out: dict = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = mono_mul(m1, m2)
            v = out.get(m, 0) + c1 * c2
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    return out


def poly_add(p: dict, q: dict) -> dict:
    out = dict(p)
    for m, c in q.items():
        v = out.get(m, 0) + c
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def _gens_of(*polys) -> list:
    gs = set()
    for p in polys:
        for m in p:
            for g, _ in m:
                gs.add(g)
    return sorted(gs, key=gen_key)


def _lexkey_fn(gens: list):
    def key(m):
        d = dict(m)
        return tuple(d.get(g, 0) for g in gens)

    return key


def _poly_key(p: dict) -> tuple:
    key = _lexkey_fn(_gens_of(p))
    return tuple(sorted(p.items(), key=lambda mc: key(mc[0]), reverse=True))


def _normalize(p: dict) -> tuple[Fraction, dict]:
    """Write ``p = content * pn`` with ``pn`` primitive, integral, positive lead."""
    den = 1
    for c in p.values():
        den = den * c.denominator // gcd(den, c.denominator)
    g = 0
    for c in p.values():
        g = gcd(g, (c * den).numerator)
    key = _lexkey_fn(_gens_of(p))
    lead = max(p, key=key)
    scale = Fraction(den, g)
    if p[lead] < 0:
        scale = -scale
    return 1 / scale, {m: c * scale for m, c in p.items()}


def _divide(G: dict, F: dict) -> dict | None:
    """Exact quotient G / F, or None when F does not divide G."""
    gens = _gens_of(G, F)
    # cheap degree rejection
    for g in gens:
        dg = max((dict(m).get(g, 0) for m in G), default=0)
        df = max((dict(m).get(g, 0) for m in F), default=0)
        if df > dg:
            return None
    key = _lexkey_fn(gens)
    f_lead = max(F, key=key)
    f_lc = F[f_lead]
    r = dict(G)
    q: dict = {}
    steps = 0
    while r:
        steps += 1
        if steps > _DIV_STEP_LIMIT:
            return None
        m = max(r, key=key)
        mq = mono_mul(m, f_lead, -1)
        if any(e < 0 for _, e in mq):
            return None
        c = r[m] / f_lc
        q[mq] = q.get(mq, 0) + c
        for mf, cf in F.items():
            mm = mono_mul(mq, mf)
            v = r.get(mm, 0) - c * cf
            if v:
                r[mm] = v
            else:
                r.pop(mm, None)
    return q


@lru_cache(maxsize=65536)
def _divide_keys(gkey: tuple, fkey: tuple):
    """Quotient of two normalized factors as ``(coef, mono, key or None)``."""
    if gkey == fkey:
        return None
    q = _divide(dict(gkey), dict(fkey))
    if q is None:
        return None
    if len(q) == 1:
        (m, c), = q.items()
        return c, m, None
    content_m = _monomial_content(q)
    if content_m:
        q = {mono_mul(m, content_m, -1): c for m, c in q.items()}
    c, qn = _normalize(q)
    return c, content_m, _poly_key(qn)


@lru_cache(maxsize=16384)
def _factor_pow(key: tuple, e: int) -> tuple:
    p = dict(key)
    out = {(): Fraction(1)}
    for _ in range(e):
        out = poly_mul(out, p)
    return tuple(out.items())


def _monomial_content(p: dict) -> tuple:
    gens = _gens_of(p)
    mins = {}
    for g in gens:
        lo = min(dict(m).get(g, 0) for m in p)
        if lo:
            mins[g] = lo
    return _mono(mins)


# ------------------------------------------------------------ rational functions


class RF:
    """``coef * mono * prod(factor ** exp)``; see the module docstring."""

    __slots__ = ("coef", "mono", "factors", "_h")

    def __init__(self, coef, mono: tuple = (), factors: tuple = ()) -> None:
        self.coef = Fraction(coef)
        if self.coef == 0:
            mono, factors = (), ()
        self.mono = mono
        self.factors = factors
        self._h = hash((self.coef, mono, factors))

    def __hash__(self) -> int:
        return self._h

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RF)
            and self._h == other._h
            and self.coef == other.coef
            and self.mono == other.mono
            and self.factors == other.factors
        )

    @property
    def is_zero(self) -> bool:
        return self.coef == 0

    @property
    def is_const(self) -> bool:
        return not self.mono and not self.factors

    def __repr__(self) -> str:
        return f"RF({to_expr(self)})"


RF_ZERO = RF(0)
RF_ONE = RF(1)


@lru_cache(maxsize=65536)
def _factor_sort_key(key: tuple) -> str:
    return str(_poly_expr(key))


def _sorted_factors(d: dict) -> tuple:
    return tuple(sorted(((k, e) for k, e in d.items() if e), key=lambda ke: _factor_sort_key(ke[0])))


def _from_term(coef, mono: tuple, factors: tuple = ()) -> RF:
    """Build an RF, reducing radical generators whose power left [0, q)."""
    if coef == 0:
        return RF_ZERO
    if not _is_dirty(mono):
        return RF(coef, mono, factors)
    d = dict(mono)
    extra = []
    for g, e in mono:
        if gen_kind(g) == "rad":
            q = _rad_q(g)
            k, r = divmod(e, q)
            if k:
                if r:
                    d[g] = r
                else:
                    del d[g]
                extra.append(rf_pow(to_rf(g.base), k))
    out = RF(coef, _mono(d), factors)
    for x in extra:
        out = rf_mul(out, x)
    return out


def _cancel(facs: dict) -> tuple[dict, Fraction, tuple]:
    """Cancel numerator factors against denominator factors they divide."""
    coef = Fraction(1)
    mono: tuple = ()
    changed = True
    while changed:
        changed = False
        pos = [k for k, e in facs.items() if e > 0]
        neg = [k for k, e in facs.items() if e < 0]
        if not pos or not neg:
            break
        for G in pos:
            for F in neg:
                for top, bot in ((G, F), (F, G)):
                    res = _divide_keys(top, bot)
                    if res is None:
                        continue
                    c, m, H = res
                    e_top = facs.pop(top)
                    facs[bot] = facs.get(bot, 0) + e_top
                    if facs[bot] == 0:
                        del facs[bot]
                    coef *= c ** e_top
                    mono = mono_mul(mono, mono_pow(m, e_top))
                    if H is not None:
                        facs[H] = facs.get(H, 0) + e_top
                        if facs[H] == 0:
                            del facs[H]
                    changed = True
                    break
                if changed:
                    break
            if changed:
                break
    return facs, coef, mono


def rf_mul(a: RF, b: RF) -> RF:
    if a.coef == 0 or b.coef == 0:
        return RF_ZERO
    if a.is_const:
        return _from_term(a.coef * b.coef, b.mono, b.factors) if a.coef != 1 else b
    if b.is_const:
        return _from_term(a.coef * b.coef, a.mono, a.factors) if b.coef != 1 else a
    coef = a.coef * b.coef
    mono = mono_mul(a.mono, b.mono)
    facs = dict(a.factors)
    for k, e in b.factors:
        v = facs.get(k, 0) + e
        if v:
            facs[k] = v
        else:
            facs.pop(k, None)
    if a.factors and b.factors:
        facs, c2, m2 = _cancel(facs)
        coef *= c2
        mono = mono_mul(mono, m2)
    return _from_term(coef, mono, _sorted_factors(facs))


def rf_pow(a: RF, k: int) -> RF:
    if k == 0:
        return RF_ONE
    if a.coef == 0:
        if k < 0:
            raise ZeroDivisionError("division by zero in expression")
        return RF_ZERO
    if k == 1:
        return a
    facs = {f: e * k for f, e in a.factors}
    return _from_term(a.coef ** k, mono_pow(a.mono, k), _sorted_factors(facs))


def rf_inv(a: RF) -> RF:
    return rf_pow(a, -1)


def rf_neg(a: RF) -> RF:
    return RF(-a.coef, a.mono, a.factors)


def _expand(coef, mono: tuple, facs: dict) -> dict:
    p = {mono: Fraction(coef)}
    for k, e in facs.items():
        if e:
            p = poly_mul(p, dict(_factor_pow(k, e)))
    return p


def rf_add(a: RF, b: RF) -> RF:
    if a.coef == 0:
        return b
    if b.coef == 0:
        return a
    ga, gb = dict(a.mono), dict(b.mono)
    gm = {}
    for g in set(ga) | set(gb):
        v = min(ga.get(g, 0), gb.get(g, 0))
        if v:
            gm[g] = v
    fa, fb = dict(a.factors), dict(b.factors)
    gf = {}
    for k in set(fa) | set(fb):
        v = min(fa.get(k, 0), fb.get(k, 0))
        if v:
            gf[k] = v
    gmono = _mono(gm)
    pa = _expand(a.coef, mono_mul(a.mono, gmono, -1), {k: fa.get(k, 0) - gf.get(k, 0) for k in fa.keys() | gf.keys()})
    pb = _expand(b.coef, mono_mul(b.mono, gmono, -1), {k: fb.get(k, 0) - gf.get(k, 0) for k in fb.keys() | gf.keys()})
    s = poly_add(pa, pb)
    if not s:
        return RF_ZERO
    srf = poly_to_rf(s)
    common = RF(1, gmono, _sorted_factors(gf))
    return rf_mul(common, srf)


def rf_sub(a: RF, b: RF) -> RF:
    return rf_add(a, rf_neg(b))


def poly_to_rf(p: dict) -> RF:
    clean = {}
    dirty = []
    for m, c in p.items():
        if _is_dirty(m):
            dirty.append((m, c))
        else:
            clean[m] = c
    out = _content_rf(clean) if clean else RF_ZERO
    for m, c in dirty:
        out = rf_add(out, _from_term(c, m))
    return out


def _content_rf(p: dict) -> RF:
    if len(p) == 1:
        (m, c), = p.items()
        return RF(c, m)
    content_m = _monomial_content(p)
    if content_m:
        p = {mono_mul(m, content_m, -1): c for m, c in p.items()}
    c, pn = _normalize(p)
    return RF(c, content_m, ((_poly_key(pn), 1),))


def rf_terms(a: RF) -> dict | None:
    """Expanded polynomial of ``a`` when it has no denominator factors."""
    if a.coef == 0:
        return {}
    if any(e < 0 for _, e in a.factors):
        return None
    p = _expand(a.coef, a.mono, dict(a.factors))
    if any(_is_dirty(m) for m in p):
        return None
    return p


# ------------------------------------------------------------ Expr -> RF


def to_rf(e: Expr) -> RF:
    c = _node_cache(e)
    r = c.get("rf")
    if r is None:
        r = _to_rf(e)
        c["rf"] = r
    return r


def _gen_rf(g: Expr, e=1) -> RF:
    return _from_term(1, ((g, _nexp(Fraction(e))),))


def _to_rf(e: Expr) -> RF:
    if isinstance(e, Num):
        return RF(e.value)
    if isinstance(e, Dec):
        return RF(Fraction(repr(e.value)))
    if isinstance(e, Var):
        return _gen_rf(e)
    if isinstance(e, Add):
        out = RF_ZERO
        for t in e.terms:
            out = rf_add(out, to_rf(t))
        return out
    if isinstance(e, Mul):
        out = RF_ONE
        for f in e.factors:
            out = rf_mul(out, to_rf(f))
            if out.coef == 0:
                return RF_ZERO
        return out
    if isinstance(e, Neg):
        return rf_neg(to_rf(e.arg))
    if isinstance(e, Pow):
        return _pow_rf(e.base, e.exp)
    if isinstance(e, Func):
        arg = to_rf(e.arg)
        if e.name == "exp":
            return _exp_rf(arg)
        if e.name == "log":
            return _log_rf(arg)
        if e.name == "sqrt":
            return _radical(arg, Fraction(1, 2))
        return _trig_rf(e.name, arg)
    raise TypeError(type(e))


def _pow_rf(base: Expr, x: Expr) -> RF:
    xr = to_rf(x)
    if xr.is_const:
        c = xr.coef
        if c.denominator == 1:
            return rf_pow(to_rf(base), c.numerator)
        return _radical(to_rf(base), c)
    return to_rf(Func("exp", Mul((x, Func("log", base)))))


def _exact_root(v: Fraction, q: int) -> Fraction | None:
    def iroot(n: int) -> int | None:
        r = round(n ** (1.0 / q))
        for cand in (r - 1, r, r + 1):
            if cand >= 0 and cand ** q == n:
                return cand
        return None

    if v < 0:
        return None
    a, b = iroot(v.numerator), iroot(v.denominator)
    if a is None or b is None:
        return None
    return Fraction(a, b)


def _radical(b: RF, c: Fraction) -> RF:
    p, q = c.numerator, c.denominator
    if b.coef == 0:
        if c < 0:
            raise ZeroDivisionError("zero raised to a negative power")
        return RF_ZERO
    if b.is_const:
        if b.coef == 1:
            return RF_ONE
        r = _exact_root(b.coef, q)
        if r is not None:
            return RF(r ** p)
    elif b.coef == 1 and not b.factors:
        kinds = [gen_kind(g) for g, _ in b.mono]
        single = len(b.mono) == 1 and b.mono[0][1] == 1 and kinds[0] != "rad"
        if single or all(k == "exp" for k in kinds):
            return _from_term(1, mono_pow(b.mono, c))
    g = Pow(to_expr(b), Num(Fraction(1, q)))
    return _from_term(1, ((g, p),))


def _exp_rf(arg: RF) -> RF:
    if arg.coef == 0:
        return RF_ONE
    terms = rf_terms(arg)
    if terms is None:
        return _gen_rf(Func("exp", to_expr(arg)))
    out = RF_ONE
    for m, c in terms.items():
        if not m:
            out = rf_mul(out, _gen_rf(E1, c))
        elif len(m) == 1 and m[0][1] == 1 and gen_kind(m[0][0]) == "log":
            inner = to_rf(m[0][0].arg)
            if c.denominator == 1:
                out = rf_mul(out, rf_pow(inner, c.numerator))
            else:
                out = rf_mul(out, _radical(inner, c))
        else:
            out = rf_mul(out, _gen_rf(Func("exp", to_expr(RF(1, m))), c))
    return out


def _log_rf(arg: RF) -> RF:
    if arg == RF_ONE:
        return RF_ZERO
    if arg.coef == 1 and not arg.factors and arg.mono:
        kinds = [gen_kind(g) for g, _ in arg.mono]
        if all(k == "exp" for k in kinds):
            out = RF_ZERO
            for g, e in arg.mono:
                out = rf_add(out, rf_mul(RF(e), to_rf(g.arg)))
            return out
        if len(arg.mono) == 1 and kinds[0] == "var":
            g, e = arg.mono[0]
            if e != 1 and not (Fraction(e).denominator == 1 and e % 2 == 0):
                return rf_mul(RF(e), _gen_rf(Func("log", g)))
    return _gen_rf(Func("log", to_expr(arg)))


def _trig_rf(name: str, arg: RF) -> RF:
    if arg.coef == 0:
        return RF_ZERO if name == "sin" else RF_ONE
    if str(to_expr(arg)).startswith("-"):
        g = _gen_rf(Func(name, to_expr(rf_neg(arg))))
        return rf_neg(g) if name == "sin" else g
    return _gen_rf(Func(name, to_expr(arg)))


# ------------------------------------------------------------ RF -> Expr


def _gen_power_expr(g: Expr, e) -> Expr:
    if e == 1:
        return g
    return Pow(g, Num(e))


def _exp_is_whole(g: Expr) -> bool:
    return rf_terms(to_rf(g.arg)) is None


def _term_expr(coef: Fraction, mono: tuple) -> Expr:
    num: list[Expr] = []
    den: list[Expr] = []
    exp_arg = RF_ZERO
    exp_pos = None
    for g, e in mono:
        if gen_kind(g) == "exp" and not _exp_is_whole(g):
            exp_arg = rf_add(exp_arg, rf_mul(RF(e), to_rf(g.arg)))
            if exp_pos is None:
                exp_pos = len(num)
            continue
        if e > 0:
            num.append(_gen_power_expr(g, e))
        else:
            den.append(Pow(g, Num(e)))
    if exp_pos is not None and exp_arg.coef != 0:
        num.insert(exp_pos, Func("exp", to_expr(exp_arg)))
    if not num and not den:
        return Num(coef)
    factors: list[Expr] = []
    if coef != 1 or not num:
        factors.append(Num(coef))
    factors.extend(num)
    factors.extend(den)
    return factors[0] if len(factors) == 1 else Mul(factors)


def _poly_expr(key: tuple) -> Expr:
    return Add(tuple(_term_expr(c, m) for m, c in key))


@lru_cache(maxsize=65536)
def to_expr(rf: RF) -> Expr:
    if rf.coef == 0:
        return ZERO
    pos = [(k, e) for k, e in rf.factors if e > 0]
    neg = [(k, e) for k, e in rf.factors if e < 0]
    if len(pos) == 1 and pos[0][1] == 1:
        key = pos[0][0]
        spread = [(rf.coef * c, mono_mul(rf.mono, m)) for m, c in key]
        if not any(_is_dirty(m) for _, m in spread):
            numer: Expr = Add(tuple(_term_expr(c, m) for c, m in spread))
            if not neg:
                return numer
            return Mul((numer,) + tuple(Pow(_poly_expr(k), Num(e)) for k, e in neg))
    head = _term_expr(rf.coef, rf.mono)
    parts: list[Expr] = list(head.factors) if isinstance(head, Mul) else [head]
    parts.extend(_gen_power_expr(_poly_expr(k), e) for k, e in pos)
    parts.extend(Pow(_poly_expr(k), Num(e)) for k, e in neg)
    if len(parts) > 1 and parts[0] == ONE and not _is_denominator(parts[1]):
        parts.pop(0)
    return parts[0] if len(parts) == 1 else Mul(parts)


def _is_denominator(f: Expr) -> bool:
    return isinstance(f, Pow) and isinstance(f.exp, Num) and f.exp.value < 0


def simplify(e: Expr) -> Expr:
    """Canonical, evaluation-equivalent form of ``e`` (idempotent)."""
    c = _node_cache(e)
    s = c.get("simp")
    if s is None:
        s = to_expr(to_rf(e))
        c["simp"] = s
        _node_cache(s)["simp"] = s
    return s

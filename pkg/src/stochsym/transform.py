"""Simple changes of coordinates for SDEs and vector fields."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    CompositionError,
    DimensionMismatch,
    DomainIncompatible,
    EliminationError,
    SymmetryNotPreserved,
    SymmetryPreconditionError,
    ValidationError,
)
from .expr import (
    DEFAULT_DOMAINS,
    Add,
    Domains,
    Expr,
    Func,
    Mul,
    Neg,
    Num,
    Pow,
    SamplingExhausted,
    Var,
    VarSpace,
    ZeroTestConfig,
    differentiate,
    eval_array,
    is_zero,
    parse,
    simplify,
    substitute,
)
from .expr.nodes import HALF, MINUS_ONE
from .sde_model import ItoSDE, StratSDE, _SDE
from .symmetry import DETERMINISTIC, SymmetryReport, VectorField, check_symmetry

_IMAGE_SAMPLES = 512


def _sum(terms: list[Expr]) -> Expr:
    terms = [t for t in terms if t != Num(0)]
    if not terms:
        return Num(0)
    return terms[0] if len(terms) == 1 else Add(terms)


def _parse_all(items, names) -> tuple[Expr, ...]:
    return tuple(e if isinstance(e, Expr) else parse(str(e), names) for e in items)


@dataclass(frozen=True)
class CoordinateChange:
    """``new^i = forward^i(old, t)`` with ``old^i = inverse^i(new, t)``.

    ``domain`` holds intervals for the old chart; ``new_domain`` optionally
    pins the new chart.  Missing intervals are derived from the image of the
    other chart's box.
    """

    space: VarSpace
    new_state: tuple
    forward: tuple
    inverse: tuple
    domain: Domains = DEFAULT_DOMAINS
    new_domain: Domains | None = None
    _checked: list = field(default_factory=list, compare=False, repr=False)

    def __post_init__(self) -> None:
        sp = self.space
        new_state = tuple(self.new_state)
        object.__setattr__(self, "new_state", new_state)
        if len(new_state) != sp.n:
            raise DimensionMismatch("new chart must have as many states as the old one")
        new_sp = self.new_space
        old_names = set(sp.state) | {sp.time}
        new_names = set(new_sp.state) | {sp.time}
        known = set(sp.all_names) | set(new_state)
        fwd = _parse_all(self.forward, known)
        inv = _parse_all(self.inverse, known)
        if len(fwd) != sp.n or len(inv) != sp.n:
            raise DimensionMismatch("forward and inverse need one entry per state")
        for e in fwd:
            if not e.free_vars() <= old_names:
                raise ValidationError(f"forward entry {e} may only use {sorted(old_names)}")
        for e in inv:
            if not e.free_vars() <= new_names:
                raise ValidationError(f"inverse entry {e} may only use {sorted(new_names)}")
        object.__setattr__(self, "forward", tuple(simplify(e) for e in fwd))
        object.__setattr__(self, "inverse", tuple(simplify(e) for e in inv))

    @property
    def new_space(self) -> VarSpace:
        return self.space.with_state(self.new_state)

    @classmethod
    def identity(cls, space: VarSpace, domain: Domains = DEFAULT_DOMAINS) -> CoordinateChange:
        vs = tuple(Var(x) for x in space.state)
        return cls(space, space.state, vs, vs, domain, domain)

    def inverse_change(self) -> CoordinateChange:
        return CoordinateChange(
            self.new_space,
            self.space.state,
            self.inverse,
            self.forward,
            self.new_domains(),
            self.old_domains(),
        )

    def then(self, other: CoordinateChange) -> CoordinateChange:
        """Composite change: first ``self``, then ``other``."""
        if other.space != self.new_space:
            raise DimensionMismatch("charts of the composed changes do not match")
        fwd = tuple(substitute(f, dict(zip(other.space.state, self.forward))) for f in other.forward)
        inv = tuple(substitute(g, dict(zip(self.new_state, other.inverse))) for g in self.inverse)
        return CoordinateChange(
            self.space, other.new_state, fwd, inv, self.old_domains(), other.new_domain
        )

    # ---- domains

    def _image(self, exprs, names_from, box: Domains) -> dict:
        rng = np.random.default_rng(0)
        env = {n: rng.uniform(*box.interval(n), size=_IMAGE_SAMPLES) for n in names_from}
        env[self.space.time] = rng.uniform(*box.interval(self.space.time), size=_IMAGE_SAMPLES)
        out = {}
        for e in exprs:
            vals = np.broadcast_to(eval_array(e, env), (_IMAGE_SAMPLES,))
            vals = vals[np.isfinite(vals)]
            if len(vals) < _IMAGE_SAMPLES // 2:
                raise DomainIncompatible(f"{e} is undefined on most of the domain")
            out_lo, out_hi = float(vals.min()), float(vals.max())
            pad = 0.01 * (out_hi - out_lo)
            out[e] = (out_lo + pad, out_hi - pad) if out_hi > out_lo else (out_lo, out_lo + 1e-9)
        return out

    def old_domains(self) -> Domains:
        missing = [x for x in self.space.state if x not in self.domain.intervals]
        if not missing or self.new_domain is None:
            return self.domain
        img = self._image(self.inverse, self.new_state, self.new_domain)
        extra = {x: img[e] for x, e in zip(self.space.state, self.inverse) if x in missing}
        return self.domain.merged(extra)

    def new_domains(self) -> Domains:
        if self.new_domain is not None:
            return self.new_domain
        old = self.old_domains()
        img = self._image(self.forward, self.space.state, old)
        keep = {k: v for k, v in old.intervals.items() if k not in self.new_state}
        keep.update({x: img[e] for x, e in zip(self.new_state, self.forward)})
        return Domains(keep, old.default)

    # ---- validation

    def composition_residuals(self) -> tuple[list[Expr], list[Expr]]:
        to_old = dict(zip(self.space.state, self.inverse))
        to_new = dict(zip(self.new_state, self.forward))
        a = [simplify(Add((substitute(f, to_old), Neg(Var(x))))) for f, x in zip(self.forward, self.new_state)]
        b = [simplify(Add((substitute(g, to_new), Neg(Var(x))))) for g, x in zip(self.inverse, self.space.state)]
        return a, b

    def validate(self, config: ZeroTestConfig | None = None) -> None:
        """Check both composition identities on the validity domains."""
        if self._checked:
            return
        config = config or ZeroTestConfig()
        a, b = self.composition_residuals()
        try:
            for exprs, dom in ((a, self.new_domains()), (b, self.old_domains())):
                for e in exprs:
                    v = is_zero(e, dom, config.tol, config.samples, config.seed)
                    if not v.is_zero:
                        raise CompositionError(f"forward and inverse do not compose to the identity: {e} is {v.describe()}")
        except SamplingExhausted as exc:
            raise DomainIncompatible(f"change is undefined on its validity domain: {exc}") from exc
        self._checked.append(True)

    def describe(self) -> str:
        f = ", ".join(f"{x} = {e}" for x, e in zip(self.new_state, self.forward))
        g = ", ".join(f"{x} = {e}" for x, e in zip(self.space.state, self.inverse))
        return f"{f}  (inverse: {g})"


# ------------------------------------------------------------ helpers


def _has_radical(e: Expr) -> bool:
    for node in e.walk():
        if isinstance(node, Pow) and isinstance(node.exp, Num) and node.exp.value.denominator != 1:
            return True
        if isinstance(node, Func) and node.name == "sqrt":
            return True
    return False


def _to_new(exprs, ch: CoordinateChange) -> tuple[Expr, ...]:
    b = dict(zip(ch.space.state, ch.inverse))
    out = tuple(substitute(e, b) for e in exprs)
    allowed = set(ch.new_space.all_names)
    for e in out:
        stray = e.free_vars() - allowed
        if stray:
            raise EliminationError(f"old-chart variables {sorted(stray)} survive in {e}")
    return out


def _on_old(exprs, ch: CoordinateChange) -> tuple[Expr, ...]:
    """Old-chart expressions composed with the inverse map (no checks)."""
    b = dict(zip(ch.space.state, ch.inverse))
    return tuple(substitute(e, b) for e in exprs)


def _matrix_inverse(K: list[list[Expr]]) -> list[list[Expr]]:
    n = len(K)
    A = [[simplify(e) for e in row] + [Num(1) if i == j else Num(0) for j in range(n)] for i, row in enumerate(K)]
    for c in range(n):
        piv = next((r for r in range(c, n) if A[r][c] != Num(0)), None)
        if piv is None:
            raise ValidationError("Jacobian of the change is singular")
        A[c], A[piv] = A[piv], A[c]
        inv_p = simplify(Pow(A[c][c], MINUS_ONE))
        A[c] = [simplify(Mul((inv_p, e))) for e in A[c]]
        for r in range(n):
            if r != c and A[r][c] != Num(0):
                fac = A[r][c]
                A[r] = [simplify(Add((A[r][j], Neg(Mul((fac, A[c][j])))))) for j in range(2 * n)]
    return [row[n:] for row in A]


def _jac(exprs, names) -> list[list[Expr]]:
    return [[differentiate(e, x) for x in names] for e in exprs]


def _size(parts) -> int:
    return sum(e.size() for e in parts)


def _check_sde(sde: _SDE, ch: CoordinateChange) -> None:
    if sde.space != ch.space:
        raise DimensionMismatch(f"equation space {sde.space} differs from change space {ch.space}")


# ------------------------------------------------------------ routes


def _forward_route(sde: _SDE, ch: CoordinateChange, second_order: bool):
    sp = sde.space
    n, m = sp.n, sp.m
    J = _jac(ch.forward, sp.state)
    drift, noise = [], []
    for i in range(n):
        terms = [differentiate(ch.forward[i], sp.time)]
        terms += [Mul((J[i][j], sde.drift[j])) for j in range(n)]
        if second_order:
            for j, xj in enumerate(sp.state):
                for k, xk in enumerate(sp.state):
                    hess = differentiate(J[i][j], xk)
                    if hess == Num(0):
                        continue
                    for l in range(m):
                        terms.append(Mul((HALF, hess, sde.noise[j][l], sde.noise[k][l])))
        drift.append(simplify(_sum(terms)))
        noise.append([simplify(_sum([Mul((J[i][j], sde.noise[j][k])) for j in range(n)])) for k in range(m)])
    flat = _to_new(drift + [e for row in noise for e in row], ch)
    return flat[:n], tuple(tuple(flat[n + i * m : n + (i + 1) * m]) for i in range(n))


def _inverse_route(sde: _SDE, ch: CoordinateChange, second_order: bool):
    """Solve ``f o Phi = d_t Phi + K f~ + 1/2 d2 Phi : s~ s~`` and ``s o Phi = K s~``."""
    sp = sde.space
    nsp = ch.new_space
    n, m = sp.n, sp.m
    K = _jac(ch.inverse, nsp.state)
    Kinv = _matrix_inverse(K)
    f_old = _on_old(sde.drift, ch)
    s_old = [_on_old(row, ch) for row in sde.noise]
    noise = [
        [simplify(_sum([Mul((Kinv[i][j], s_old[j][k])) for j in range(n)])) for k in range(m)]
        for i in range(n)
    ]
    rhs = []
    for j in range(n):
        terms = [f_old[j], Neg(differentiate(ch.inverse[j], sp.time))]
        if second_order:
            for a, xa in enumerate(nsp.state):
                for b, xb in enumerate(nsp.state):
                    hess = differentiate(K[j][a], xb)
                    if hess == Num(0):
                        continue
                    for l in range(m):
                        terms.append(Neg(Mul((HALF, hess, noise[a][l], noise[b][l]))))
        rhs.append(simplify(_sum(terms)))
    drift = [simplify(_sum([Mul((Kinv[i][j], rhs[j])) for j in range(n)])) for i in range(n)]
    flat = tuple(drift) + tuple(e for row in noise for e in row)
    allowed = set(nsp.all_names)
    for e in flat:
        stray = e.free_vars() - allowed
        if stray:
            raise EliminationError(f"old-chart variables {sorted(stray)} survive in {e}")
    return tuple(drift), tuple(tuple(row) for row in noise)


def _best_route(sde: _SDE, ch: CoordinateChange, second_order: bool):
    try:
        a = _forward_route(sde, ch, second_order)
    except EliminationError:
        return _inverse_route(sde, ch, second_order)
    parts_a = list(a[0]) + [e for row in a[1] for e in row]
    if not any(_has_radical(e) for e in parts_a):
        return a
    try:
        b = _inverse_route(sde, ch, second_order)
    except EliminationError:
        return a
    parts_b = list(b[0]) + [e for row in b[1] for e in row]
    return b if _size(parts_b) < _size(parts_a) else a


def transform_ito(sde: ItoSDE, ch: CoordinateChange, config: ZeroTestConfig | None = None) -> ItoSDE:
    """Ito formula: the equation satisfied by ``new = forward(old, t)``."""
    _check_sde(sde, ch)
    ch.validate(config)
    drift, noise = _best_route(sde, ch, second_order=True)
    return ItoSDE(ch.new_space, drift, noise)


def transform_strat(sde: StratSDE, ch: CoordinateChange, config: ZeroTestConfig | None = None) -> StratSDE:
    """Chain rule: no second-order term."""
    _check_sde(sde, ch)
    ch.validate(config)
    drift, noise = _best_route(sde, ch, second_order=False)
    return StratSDE(ch.new_space, drift, noise)


def transform(sde: _SDE, ch: CoordinateChange, config: ZeroTestConfig | None = None) -> _SDE:
    if isinstance(sde, ItoSDE):
        return transform_ito(sde, ch, config)
    return transform_strat(sde, ch, config)


def pushforward(X: VectorField, ch: CoordinateChange, config: ZeroTestConfig | None = None) -> VectorField:
    """``phi~^i = (d new^i / d old^j) phi^j`` in the new chart."""
    if X.space != ch.space:
        raise DimensionMismatch("field and change live on different charts")
    ch.validate(config)
    sp = ch.space
    J = _jac(ch.forward, sp.state)
    raw = [simplify(_sum([Mul((J[i][j], X.phi[j])) for j in range(sp.n)])) for i in range(sp.n)]
    try:
        phi = _to_new(raw, ch)
        if not any(_has_radical(e) for e in phi):
            return VectorField(ch.new_space, phi, X.kind)
    except EliminationError:
        phi = None
    K = _jac(ch.inverse, ch.new_space.state)
    Kinv = _matrix_inverse(K)
    on_new = _on_old(X.phi, ch)
    alt = tuple(simplify(_sum([Mul((Kinv[i][j], on_new[j])) for j in range(sp.n)])) for i in range(sp.n))
    stray = set().union(*(e.free_vars() for e in alt)) - set(ch.new_space.all_names)
    if stray:
        if phi is None:
            raise EliminationError(f"old-chart variables {sorted(stray)} survive in the pushforward")
        return VectorField(ch.new_space, phi, X.kind)
    if phi is None or _size(alt) < _size(phi):
        phi = alt
    return VectorField(ch.new_space, phi, X.kind)


def verify_symmetry_preserved(
    sde: ItoSDE, X: VectorField, ch: CoordinateChange, config: ZeroTestConfig | None = None
) -> tuple[SymmetryReport, SymmetryReport]:
    """Check ``X`` before and its pushforward after the change."""
    config = config or ZeroTestConfig()
    before_cfg = ZeroTestConfig(config.tol, config.samples, config.seed, ch.old_domains())
    before = check_symmetry(sde, X, before_cfg)
    if not before.is_symmetry:
        raise SymmetryPreconditionError("the field is not a symmetry of the original equation", before)
    new_sde = transform(sde, ch, config)
    new_X = pushforward(X, ch, config)
    after_cfg = ZeroTestConfig(config.tol, config.samples, config.seed, ch.new_domains())
    after = check_symmetry(new_sde, new_X, after_cfg)
    if not after.is_symmetry:
        raise SymmetryNotPreserved("the pushed-forward field is not a symmetry of the transformed equation", before, after)
    return before, after


# ------------------------------------------------------------ scramble oracle

SCRAMBLE_CATALOG = ("identity", "affine", "exp", "log", "square", "mobius")

_COEFFS = {
    "affine": {"a": [-2, Fraction(-1, 2), Fraction(1, 2), 2, 3], "b": [-1, 0, Fraction(1, 2), 1]},
    "exp": {"a": [Fraction(1, 2), 1, 2, -1]},
    "log": {"a": [Fraction(1, 2), 1, 2]},
    "square": {"a": [Fraction(1, 2), 1, 2]},
    "mobius": {"a": [Fraction(1, 2), 1, 2], "b": [1, 2]},
}


def catalog_change(
    kind: str,
    space: VarSpace,
    new_name: str,
    params: dict | None = None,
    new_domain: Domains = DEFAULT_DOMAINS,
) -> CoordinateChange:
    """A closed-form invertible scalar map from ``space``'s state to ``new_name``."""
    if space.n != 1:
        raise DimensionMismatch("catalog maps are scalar")
    p = {k: Fraction(v) for k, v in (params or {}).items()}
    u, y = Var(space.state[0]), Var(new_name)

    def n(k):
        return Num(p[k])

    if kind == "identity":
        fwd, inv = u, y
    elif kind == "affine":
        fwd, inv = Add((Mul((n("a"), u)), n("b"))), Mul((Add((y, Neg(n("b")))), Pow(n("a"), MINUS_ONE)))
    elif kind == "exp":
        fwd, inv = Func("exp", Mul((n("a"), u))), Mul((Func("log", y), Pow(n("a"), MINUS_ONE)))
    elif kind == "log":
        fwd, inv = Mul((Func("log", u), Pow(n("a"), MINUS_ONE))), Func("exp", Mul((n("a"), y)))
    elif kind == "square":
        fwd, inv = Pow(Mul((u, Pow(n("a"), MINUS_ONE))), Num(2)), Mul((n("a"), Func("sqrt", y)))
    elif kind == "mobius":
        fwd = Func("sqrt", Add((Mul((n("a"), Pow(u, MINUS_ONE))), Neg(n("b")))))
        inv = Mul((n("a"), Pow(Add((n("b"), Pow(y, Num(2)))), MINUS_ONE)))
    else:
        raise ValidationError(f"unknown catalog map {kind!r}; choose from {SCRAMBLE_CATALOG}")
    nd = Domains({new_name: new_domain.interval(new_name)}, new_domain.default)
    return CoordinateChange(space, (new_name,), (fwd,), (inv,), Domains({}, nd.default), nd)


def draw_params(kind: str, seed: int) -> dict:
    rng = random.Random(seed)
    return {k: rng.choice(v) for k, v in sorted(_COEFFS.get(kind, {}).items())}


def make_scrambled_instance(
    base: ItoSDE,
    psi: str | CoordinateChange,
    seed: int = 0,
    new_name: str = "y",
    params: dict | None = None,
    config: ZeroTestConfig | None = None,
) -> tuple[ItoSDE, VectorField, CoordinateChange]:
    """Disguise a state-free scalar equation by an invertible change.

    Returns the transformed equation, the pushforward of ``d/du`` (a symmetry
    by construction) and the change from the base chart to the new one.
    """
    sp = base.space
    if sp.n != 1:
        raise DimensionMismatch("scrambling needs a scalar base equation")
    coeffs = list(base.drift) + [e for row in base.noise for e in row]
    if any(sp.state[0] in e.free_vars() for e in coeffs):
        raise ValidationError("base coefficients must depend on time only")
    if isinstance(psi, CoordinateChange):
        ch = psi
    else:
        if params is None:
            params = draw_params(psi, seed)
        ch = catalog_change(psi, sp, new_name, params)
    ch.validate(config)
    sde = transform_ito(base, ch, config)
    X = pushforward(VectorField(sp, (Num(1),), DETERMINISTIC), ch, config)
    return sde, X, ch

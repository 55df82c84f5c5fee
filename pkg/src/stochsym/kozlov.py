"""Reduction of symmetric scalar SDEs to state-free coefficients."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate as _quad

from .errors import (
    CompositionError,
    DimensionMismatch,
    DomainIncompatible,
    NoClosedFormInverse,
    NoIntegrationRule,
    ReductionError,
    SymmetryPreconditionError,
    ValidationError,
)
from .expr import (
    Add,
    Expr,
    Mul,
    Neg,
    Num,
    Pow,
    Var,
    ZeroTestConfig,
    as_expr,
    differentiate,
    eval_numeric,
    integrate_univariate,
    invert_candidates,
    is_zero,
    simplify,
    substitute,
)
from .expr.nodes import MINUS_ONE
from .sde_model import ItoSDE, as_ito
from .symmetry import VectorField, check_symmetry
from .transform import CoordinateChange, transform_ito

NEW_NAME_CHOICES = ("x", "y", "z", "u", "v")


def free_name(space, preferred: str | None = None) -> str:
    taken = set(space.all_names)
    if preferred is not None:
        if preferred in taken and preferred not in space.state:
            raise ValidationError(f"name {preferred!r} is already used by time or noise")
        return preferred
    for cand in NEW_NAME_CHOICES:
        if cand not in taken:
            return cand
    k = 1
    while f"x{k}" in taken:
        k += 1
    return f"x{k}"


@dataclass(frozen=True)
class ReducedSDE:
    """``dx = drift_t(t) dt + noise_t(t) dw`` with the change that produced it."""

    drift_t: Expr
    noise_t: Expr
    provenance: CoordinateChange | None = None
    time: str = "t"

    def __post_init__(self) -> None:
        for e in (self.drift_t, self.noise_t):
            extra = e.free_vars() - {self.time}
            if extra:
                raise ValidationError(f"reduced coefficient {e} depends on {sorted(extra)}")


def kozlov_change(
    X: VectorField,
    new_name: str | None = None,
    config: ZeroTestConfig | None = None,
) -> CoordinateChange:
    """The change ``x = int dy / phi`` that straightens ``X`` to ``d/dx``."""
    sp = X.space
    if sp.n != 1:
        raise DimensionMismatch("reduction is implemented for scalar equations only")
    if X.is_random:
        raise ValidationError("reduction needs a deterministic field")
    config = config or ZeroTestConfig()
    y = sp.state[0]
    phi = simplify(X.phi[0])
    if phi == Num(0):
        raise ValidationError("the field vanishes identically")
    F = integrate_univariate(Pow(phi, MINUS_ONE), y)
    if F is None:
        raise NoIntegrationRule(f"no rule integrates 1/({phi}) in {y}")
    name = free_name(sp, new_name)
    candidates = invert_candidates(F, y, name)
    last_err: Exception | None = None
    for inv in candidates:
        ch = CoordinateChange(sp, (name,), (F,), (inv,), config.domains)
        try:
            ch.validate(config)
            return ch
        except (CompositionError, DomainIncompatible) as exc:
            last_err = exc
    raise NoClosedFormInverse(f"no inverse candidate of {name} = {F} passes the composition check: {last_err}")


def _state_free(e: Expr, x: str, domains, config: ZeroTestConfig) -> tuple[Expr, object]:
    if x not in e.free_vars():
        return e, None
    verdict = is_zero(differentiate(e, x), domains, config.tol, config.samples, config.seed)
    if not verdict.is_zero:
        return e, verdict
    lo, hi = domains.interval(x)
    return simplify(substitute(e, {x: as_expr((lo + hi) / 2)})), verdict


def reduce_scalar(
    sde: ItoSDE,
    X: VectorField,
    config: ZeroTestConfig | None = None,
    new_name: str | None = None,
) -> ReducedSDE:
    """Map a scalar equation with symmetry ``X`` to state-free coefficients."""
    config = config or ZeroTestConfig()
    sde = as_ito(sde)
    if sde.space.n != 1:
        raise DimensionMismatch("reduction is implemented for scalar equations only")
    if sde.space.m != 1:
        raise DimensionMismatch("reduction is implemented for a single Wiener process")
    report = check_symmetry(sde, X, config)
    if not report.is_symmetry:
        raise SymmetryPreconditionError("the field is not a symmetry of the equation", report)
    ch = kozlov_change(X, new_name, config)
    red = transform_ito(sde, ch, config)
    x = ch.new_state[0]
    dom = ch.new_domains()
    drift, vd = _state_free(red.drift[0], x, dom, config)
    noise, vn = _state_free(red.noise[0][0], x, dom, config)
    for label, e, v in (("drift", drift, vd), ("noise", noise, vn)):
        if v is not None and not v.is_zero:
            raise ReductionError(f"reduced {label} {e} still depends on {x}: {v.describe()}", v)
    return ReducedSDE(drift, noise, ch, sde.space.time)


# ------------------------------------------------------------ explicit solution


def _antiderivative(e: Expr, t: str, t0: float) -> tuple[Expr | None, Callable[[float], float]]:
    """Symbolic ``int_{t0}^t e`` when a rule applies, plus a numeric evaluator."""
    F = integrate_univariate(e, t)
    if F is not None:
        G = simplify(Add((F, Neg(substitute(F, {t: as_expr(float(t0))})))))
        return G, lambda T: eval_numeric(G, {t: T})

    def quad(T: float) -> float:
        f = lambda s: eval_numeric(e, {t: s})  # noqa: E731
        return float(_quad.quad(f, t0, T, limit=200)[0])

    return None, quad


@dataclass(frozen=True)
class ExplicitSolution:
    """``x(t) = x0 + F(t) + int_{t0}^t sigma(s) dw(s)``.

    ``F`` and the variance ``V(t) = int_{t0}^t sigma^2`` are symbolic when an
    integration rule applies and numeric (quadrature) otherwise.
    """

    reduced: ReducedSDE
    x0: float
    t0: float
    drift_integral: Expr | None
    variance: Expr | None
    _F: Callable = field(default=None, repr=False, compare=False)
    _V: Callable = field(default=None, repr=False, compare=False)

    def mean(self, t: float) -> float:
        return self.x0 + self._F(t)

    def var(self, t: float) -> float:
        return self._V(t)

    def deterministic_part(self) -> Expr | None:
        if self.drift_integral is None:
            return None
        return simplify(Add((as_expr(self.x0), self.drift_integral)))

    def formula(self, wiener: str = "w") -> str:
        t = self.reduced.time
        det = self.deterministic_part()
        det_s = str(det) if det is not None else f"{self.x0} + int({self.reduced.drift_t}, {t})"
        s = simplify(self.reduced.noise_t)
        if s == Num(0):
            return det_s
        if t not in s.free_vars():
            w = Var(wiener) if self.t0 == 0 else Add((Var(wiener), Neg(Var(f"{wiener}0"))))
            stoch = str(simplify(Mul((s, w))))
        else:
            stoch = f"int({s} d{wiener})"
        return stoch if det == Num(0) else f"{det_s} + {stoch}"

    def sample(self, times: np.ndarray, dw: np.ndarray) -> np.ndarray:
        """Exact-law sample path on ``times`` from Wiener increments ``dw``.

        The stochastic integral uses the left-point sum ``sum sigma(t_k) dw_k``.
        """
        times = np.asarray(times, dtype=float)
        dw = np.asarray(dw, dtype=float)
        t = self.reduced.time
        sig = np.array([eval_numeric(self.reduced.noise_t, {t: s}) for s in times[:-1]])
        stoch = np.concatenate([[0.0], np.cumsum(sig * dw)])
        det = np.array([self.mean(s) for s in times])
        return det + stoch


def explicit_solution(r: ReducedSDE, x0: float, t0: float = 0.0) -> ExplicitSolution:
    t = r.time
    F, Fn = _antiderivative(r.drift_t, t, t0)
    V, Vn = _antiderivative(simplify(Mul((r.noise_t, r.noise_t))), t, t0)
    return ExplicitSolution(r, float(x0), float(t0), F, V, Fn, Vn)

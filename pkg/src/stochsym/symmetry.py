"""Determining equations, symmetry checks and the identities around them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from .errors import ConstraintNotSatisfied, DimensionMismatch, ValidationError
from .expr import (
    Add,
    Expr,
    Mul,
    Neg,
    Num,
    SamplingExhausted,
    SymbolicZero,
    VarSpace,
    ZeroTestConfig,
    differentiate,
    is_zero,
    parse,
    simplify,
)
from .expr.nodes import HALF
from .forms import Coordinates
from .sde_model import ItoSDE, ItoStratBridge, StratSDE, _SDE, as_ito, ito_laplacian, rho

DETERMINISTIC = "deterministic"
RANDOM = "random"


def _sum(terms: list[Expr]) -> Expr:
    terms = [t for t in terms if t != Num(0)]
    if not terms:
        return Num(0)
    return terms[0] if len(terms) == 1 else Add(terms)


@dataclass(frozen=True)
class VectorField:
    """Simple symmetry generator ``phi^i d/dx^i``."""

    space: VarSpace
    phi: tuple
    kind: str = DETERMINISTIC

    def __post_init__(self) -> None:
        sp = self.space
        phi = tuple(e if isinstance(e, Expr) else parse(str(e), sp) for e in self.phi)
        if len(phi) != sp.n:
            raise DimensionMismatch(f"field has {len(phi)} components, expected {sp.n}")
        if self.kind not in (DETERMINISTIC, RANDOM):
            raise ValidationError(f"unknown field kind {self.kind!r}")
        allowed = set(sp.state) | {sp.time}
        if self.kind == RANDOM:
            allowed |= set(sp.wiener)
        for e in phi:
            extra = e.free_vars() - allowed
            if extra:
                raise ValidationError(f"field component {e} references {sorted(extra)}")
        object.__setattr__(self, "phi", phi)

    @property
    def is_random(self) -> bool:
        return self.kind == RANDOM

    def as_random(self) -> VectorField:
        return VectorField(self.space, self.phi, RANDOM)

    def describe(self) -> str:
        return " + ".join(f"({simplify(p)}) d/d{x}" for p, x in zip(self.phi, self.space.state))


@dataclass(frozen=True)
class DeterminingSystem:
    space: VarSpace
    drift_residuals: tuple
    noise_residuals: tuple
    calculus: str

    def __post_init__(self) -> None:
        n, m = self.space.n, self.space.m
        if len(self.drift_residuals) != n or len(self.noise_residuals) != n or any(
            len(r) != m for r in self.noise_residuals
        ):
            raise DimensionMismatch("determining system must have n + n*m residuals")

    def items(self) -> Iterator[tuple[str, Expr]]:
        sp = self.space
        for i, x in enumerate(sp.state):
            yield f"drift[{x}]", self.drift_residuals[i]
        for i, x in enumerate(sp.state):
            for k, w in enumerate(sp.wiener):
                yield f"noise[{x},{w}]", self.noise_residuals[i][k]

    def __len__(self) -> int:
        return self.space.n * (1 + self.space.m)


@dataclass(frozen=True)
class Inconclusive:
    reason: str
    method = "none"
    is_zero = False

    def describe(self) -> str:
        return f"inconclusive ({self.reason})"


@dataclass(frozen=True)
class SymmetryReport:
    system: DeterminingSystem
    verdicts: dict
    overall: str = field(init=False)

    def __post_init__(self) -> None:
        vs = list(self.verdicts.values())
        if all(v.is_zero for v in vs):
            overall = "symmetry"
        elif any(isinstance(v, Inconclusive) for v in vs) and not any(
            not v.is_zero and not isinstance(v, Inconclusive) for v in vs
        ):
            overall = "inconclusive"
        else:
            overall = "not symmetry"
        object.__setattr__(self, "overall", overall)

    @property
    def is_symmetry(self) -> bool:
        return self.overall == "symmetry"

    @property
    def methods(self) -> dict:
        return {k: v.method for k, v in self.verdicts.items()}

    @property
    def all_symbolic(self) -> bool:
        return all(isinstance(v, SymbolicZero) for v in self.verdicts.values())

    def first_failure(self):
        for k, v in self.verdicts.items():
            if not v.is_zero:
                return k, v
        return None


@dataclass(frozen=True)
class TauCandidate:
    tau: Expr


def _check_spaces(sde: _SDE, X: VectorField) -> None:
    if sde.space != X.space:
        raise DimensionMismatch(f"equation space {sde.space} differs from field space {X.space}")


def _noise_residuals(sde: _SDE, X: VectorField) -> tuple:
    sp = sde.space
    rows = []
    for i in range(sp.n):
        row = []
        for k, w in enumerate(sp.wiener):
            terms = [differentiate(X.phi[i], w)] if X.is_random else []
            for j, xj in enumerate(sp.state):
                terms.append(Mul((sde.noise[j][k], differentiate(X.phi[i], xj))))
                terms.append(Neg(Mul((X.phi[j], differentiate(sde.noise[i][k], xj)))))
            row.append(simplify(_sum(terms)))
        rows.append(tuple(row))
    return tuple(rows)


def _first_order_drift(drift: tuple, sp: VarSpace, X: VectorField, i: int) -> list[Expr]:
    terms = [differentiate(X.phi[i], sp.time)]
    for j, xj in enumerate(sp.state):
        terms.append(Mul((drift[j], differentiate(X.phi[i], xj))))
        terms.append(Neg(Mul((X.phi[j], differentiate(drift[i], xj)))))
    return terms


def determining_system_ito(sde: ItoSDE, X: VectorField) -> DeterminingSystem:
    _check_spaces(sde, X)
    sp = sde.space
    drift = []
    for i in range(sp.n):
        terms = _first_order_drift(sde.drift, sp, X, i)
        terms.append(Mul((HALF, ito_laplacian(X.phi[i], sde))))
        drift.append(simplify(_sum(terms)))
    return DeterminingSystem(sp, tuple(drift), _noise_residuals(sde, X), "ito")


def determining_system_strat(sde: StratSDE, X: VectorField) -> DeterminingSystem:
    _check_spaces(sde, X)
    sp = sde.space
    drift = tuple(simplify(_sum(_first_order_drift(sde.drift, sp, X, i))) for i in range(sp.n))
    return DeterminingSystem(sp, drift, _noise_residuals(sde, X), "stratonovich")


def determining_system(sde: _SDE, X: VectorField) -> DeterminingSystem:
    if isinstance(sde, ItoSDE):
        return determining_system_ito(sde, X)
    return determining_system_strat(sde, X)


def _test(e: Expr, config: ZeroTestConfig, names=()):
    return is_zero(e, config.domains, config.tol, config.samples, config.seed, names)


def test_system(
    system: DeterminingSystem, config: ZeroTestConfig | None = None, allow_inconclusive: bool = False
) -> SymmetryReport:
    config = config or ZeroTestConfig()
    verdicts = {}
    for label, e in system.items():
        try:
            verdicts[label] = _test(e, config, system.space.state + (system.space.time,))
        except SamplingExhausted as exc:
            if not allow_inconclusive:
                raise
            verdicts[label] = Inconclusive(str(exc))
    return SymmetryReport(system, verdicts)


def check_symmetry(
    sde: _SDE, X: VectorField, config: ZeroTestConfig | None = None, allow_inconclusive: bool = False
) -> SymmetryReport:
    """Build the determining system for the equation's calculus and zero-test it."""
    return test_system(determining_system(sde, X), config, allow_inconclusive)


def lie_derivative_residuals(sde: StratSDE, X: VectorField) -> DeterminingSystem:
    """Coefficients of ``L_X omega^i`` restricted to ``omega = 0``.

    ``omega^i = dx^i - b^i dt - sigma^i_k dw^k``; after the Cartan expansion
    each ``dx^j`` is replaced by ``b^j dt + sigma^j_k dw^k``.
    """
    _check_spaces(sde, X)
    sp = sde.space
    coords = Coordinates(sp.state + (sp.time,) + sp.wiener)
    field_ = dict(zip(sp.state, X.phi))
    drift, noise = [], []
    for i, xi in enumerate(sp.state):
        omega = {xi: Num(1), sp.time: Neg(sde.drift[i])}
        for k, w in enumerate(sp.wiener):
            omega[w] = Neg(sde.noise[i][k])
        L = coords.lie_derivative1(field_, omega)
        zero = Num(0)
        dt_terms = [L.get(sp.time, zero)]
        dt_terms += [Mul((L.get(xj, zero), sde.drift[j])) for j, xj in enumerate(sp.state)]
        drift.append(simplify(_sum(dt_terms)))
        row = []
        for k, w in enumerate(sp.wiener):
            dw_terms = [L.get(w, zero)]
            dw_terms += [Mul((L.get(xj, zero), sde.noise[j][k])) for j, xj in enumerate(sp.state)]
            row.append(simplify(_sum(dw_terms)))
        noise.append(tuple(row))
    return DeterminingSystem(sp, tuple(drift), tuple(noise), "stratonovich")


def sigma_operator(X: VectorField, bridge: ItoStratBridge) -> tuple[Expr, ...]:
    """``Sigma(phi)^i = 2 [phi^j d_j rho^i - rho^j d_j phi^i]``."""
    sp = X.space
    out = []
    for i in range(sp.n):
        terms = []
        for j, xj in enumerate(sp.state):
            terms.append(Mul((X.phi[j], differentiate(bridge.rho[i], xj))))
            terms.append(Neg(Mul((bridge.rho[j], differentiate(X.phi[i], xj)))))
        out.append(simplify(Mul((Num(2), _sum(terms)))))
    return tuple(out)


def constrained_laplacian(sde: ItoSDE, X: VectorField) -> tuple[Expr, ...]:
    """Ito Laplacian of each ``phi^i`` with every w-derivative eliminated.

    On the constraint set ``dw_k phi^i = G^i_k`` with
    ``G^i_k = phi^p d_p sigma^i_k - sigma^p_k d_p phi^i``, so
    ``d_j dw_k phi^i = d_j G^i_k`` and
    ``dw_m dw_k phi^i = G^p_m d_p sigma^i_k - sigma^p_k d_p G^i_m``.
    """
    sp = sde.space
    n, m = sp.n, sp.m
    G = [[None] * m for _ in range(n)]
    for i in range(n):
        for k in range(m):
            terms = []
            for p, xp in enumerate(sp.state):
                terms.append(Mul((X.phi[p], differentiate(sde.noise[i][k], xp))))
                terms.append(Neg(Mul((sde.noise[p][k], differentiate(X.phi[i], xp)))))
            G[i][k] = simplify(_sum(terms))
    out = []
    for i in range(n):
        terms = []
        for k in range(m):
            for p, xp in enumerate(sp.state):
                terms.append(Mul((G[p][k], differentiate(sde.noise[i][k], xp))))
                terms.append(Neg(Mul((sde.noise[p][k], differentiate(G[i][k], xp)))))
            for j, xj in enumerate(sp.state):
                dj = differentiate(X.phi[i], xj)
                for l, xl in enumerate(sp.state):
                    terms.append(Mul((sde.noise[j][k], sde.noise[l][k], differentiate(dj, xl))))
                terms.append(Mul((Num(2), sde.noise[j][k], differentiate(G[i][k], xj))))
        out.append(simplify(_sum(terms)))
    return tuple(out)


def combine_verdicts(verdicts) -> object:
    """First nonzero verdict, else the weakest zero verdict."""
    verdicts = list(verdicts)
    for v in verdicts:
        if not v.is_zero:
            return v
    for v in verdicts:
        if not isinstance(v, SymbolicZero):
            return v
    return SymbolicZero()


def unal_differences(sde: ItoSDE, X: VectorField) -> tuple[Expr, ...]:
    lap = constrained_laplacian(sde, X)
    sig = sigma_operator(X, rho(sde))
    return tuple(simplify(Add((a, Neg(b)))) for a, b in zip(lap, sig))


def verify_unal_identity(sde: ItoSDE, X: VectorField, config: ZeroTestConfig | None = None):
    """Zero verdict of ``Delta phi - Sigma phi`` on the constraint set."""
    _check_spaces(sde, X)
    config = config or ZeroTestConfig()
    sde = as_ito(sde)
    noise = _noise_residuals(sde, X)
    bad = [(i, k, e) for i, row in enumerate(noise) for k, e in enumerate(row) if not _test(e, config).is_zero]
    if bad:
        i, k, e = bad[0]
        raise ConstraintNotSatisfied(
            f"noise residual ({sde.space.state[i]}, {sde.space.wiener[k]}) = {e} does not vanish"
        )
    return combine_verdicts(_test(d, config) for d in unal_differences(sde, X))


def tau_condition_expressions(sde: ItoSDE, tau: TauCandidate | Expr) -> tuple[Expr, ...]:
    """``sigma^k_p sigma^i_p d_k (d_t tau + f^j d_j tau + 1/2 sigma^m_q sigma^j_q d_m d_j tau)``."""
    t = tau.tau if isinstance(tau, TauCandidate) else tau
    sde = as_ito(sde)
    sp = sde.space
    inner = [differentiate(t, sp.time)]
    for j, xj in enumerate(sp.state):
        dj = differentiate(t, xj)
        inner.append(Mul((sde.drift[j], dj)))
        for mm, xm in enumerate(sp.state):
            for q in range(sp.m):
                inner.append(Mul((HALF, sde.noise[mm][q], sde.noise[j][q], differentiate(dj, xm))))
    B = simplify(_sum(inner))
    out = []
    for i in range(sp.n):
        terms = []
        for k, xk in enumerate(sp.state):
            dB = differentiate(B, xk)
            for p in range(sp.m):
                terms.append(Mul((sde.noise[k][p], sde.noise[i][p], dB)))
        out.append(simplify(_sum(terms)))
    return tuple(out)


def check_tau_condition(sde: ItoSDE, tau: TauCandidate | Expr, config: ZeroTestConfig | None = None):
    config = config or ZeroTestConfig()
    return combine_verdicts(_test(e, config) for e in tau_condition_expressions(sde, tau))

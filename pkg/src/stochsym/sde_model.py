"""Ito and Stratonovich SDE types, the drift correction and the Ito Laplacian."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .errors import DimensionMismatch, ValidationError
from .expr import Add, Expr, Mul, Neg, Num, VarSpace, differentiate, parse, simplify
from .expr.nodes import HALF


def _as_entry(e, space: VarSpace) -> Expr:
    if isinstance(e, Expr):
        return e
    if isinstance(e, (int, float)):
        return parse(repr(e), space)
    return parse(str(e), space)


def _sum(terms: list[Expr]) -> Expr:
    if not terms:
        return Num(0)
    return terms[0] if len(terms) == 1 else Add(terms)


@dataclass(frozen=True)
class _SDE:
    space: VarSpace
    drift: tuple
    noise: tuple
    calculus = "?"

    def __post_init__(self) -> None:
        sp = self.space
        drift = tuple(_as_entry(e, sp) for e in self.drift)
        noise = tuple(tuple(_as_entry(e, sp) for e in row) for row in self.noise)
        if len(drift) != sp.n:
            raise DimensionMismatch(f"drift has {len(drift)} entries, expected {sp.n}")
        if len(noise) != sp.n or any(len(row) != sp.m for row in noise):
            raise DimensionMismatch(f"noise must be a {sp.n}x{sp.m} matrix")
        allowed = set(sp.state) | {sp.time}
        for e in drift + tuple(x for row in noise for x in row):
            extra = e.free_vars() - allowed
            if extra:
                raise ValidationError(
                    f"coefficient {e} references {sorted(extra)}; only state and time are allowed"
                )
        object.__setattr__(self, "drift", drift)
        object.__setattr__(self, "noise", noise)

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def m(self) -> int:
        return self.space.m

    def column(self, k: int) -> tuple[Expr, ...]:
        return tuple(row[k] for row in self.noise)

    def simplified(self):
        return type(self)(
            self.space,
            tuple(simplify(e) for e in self.drift),
            tuple(tuple(simplify(e) for e in row) for row in self.noise),
        )

    def describe(self) -> str:
        sp = self.space
        sym = " dw" if self.calculus == "ito" else " o dw"
        lines = []
        for i, x in enumerate(sp.state):
            noise = " + ".join(
                f"({simplify(self.noise[i][k])})" + sym.replace("dw", "d" + w)
                for k, w in enumerate(sp.wiener)
            )
            lines.append(f"d{x} = ({simplify(self.drift[i])}) d{sp.time} + {noise}")
        return "\n".join(lines)


@dataclass(frozen=True)
class ItoSDE(_SDE):
    """``dx^i = f^i(x,t) dt + sigma^i_k(x,t) dw^k``."""

    calculus = "ito"


@dataclass(frozen=True)
class StratSDE(_SDE):
    """``dx^i = b^i(x,t) dt + sigma^i_k(x,t) o dw^k``."""

    calculus = "stratonovich"


@dataclass(frozen=True)
class ItoStratBridge:
    rho: tuple[Expr, ...] = field(default_factory=tuple)


def rho(sde: _SDE) -> ItoStratBridge:
    """Drift correction ``rho^i = 1/2 sum_{j,k} sigma^j_k d_j sigma^i_k``."""
    sp = sde.space
    out = []
    for i in range(sp.n):
        terms = []
        for k in range(sp.m):
            for j, xj in enumerate(sp.state):
                terms.append(Mul((sde.noise[j][k], differentiate(sde.noise[i][k], xj))))
        out.append(simplify(Mul((HALF, _sum(terms)))))
    return ItoStratBridge(tuple(out))


def ito_to_stratonovich(sde: ItoSDE) -> StratSDE:
    r = rho(sde).rho
    drift = tuple(simplify(Add((f, Neg(c)))) for f, c in zip(sde.drift, r))
    return StratSDE(sde.space, drift, sde.noise)


def stratonovich_to_ito(sde: StratSDE) -> ItoSDE:
    r = rho(sde).rho
    drift = tuple(simplify(Add((b, c))) for b, c in zip(sde.drift, r))
    return ItoSDE(sde.space, drift, sde.noise)


def as_ito(sde: _SDE) -> ItoSDE:
    return sde if isinstance(sde, ItoSDE) else stratonovich_to_ito(sde)


def ito_laplacian(phi: Expr, sde: _SDE) -> Expr:
    """``sum_k [dw_k dw_k phi + sigma^j_k sigma^l_k d_j d_l phi + 2 sigma^j_k d_j dw_k phi]``."""
    sp = sde.space
    terms: list[Expr] = []
    for k, w in enumerate(sp.wiener):
        dw = differentiate(phi, w)
        terms.append(differentiate(dw, w))
        for j, xj in enumerate(sp.state):
            dj = differentiate(phi, xj)
            for l, xl in enumerate(sp.state):
                terms.append(Mul((sde.noise[j][k], sde.noise[l][k], differentiate(dj, xl))))
            terms.append(Mul((Num(2), sde.noise[j][k], differentiate(dw, xj))))
    return simplify(_sum(terms))


def make_sde(space: VarSpace, drift: Sequence, noise: Sequence, calculus: str = "ito") -> _SDE:
    if calculus == "ito":
        return ItoSDE(space, tuple(drift), tuple(tuple(r) for r in noise))
    if calculus in ("stratonovich", "strat"):
        return StratSDE(space, tuple(drift), tuple(tuple(r) for r in noise))
    raise ValidationError(f"unknown calculus {calculus!r}")

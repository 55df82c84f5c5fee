"""Seeded generators for test corpora and the two worked examples.

Everything here is deterministic in ``seed``.  Coefficients are drawn from
small template tables that stay finite on the default sampling box.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .expr import VarSpace
from .sde_model import ItoSDE, StratSDE, _SDE, make_sde
from .symmetry import VectorField

_ATOMS_1 = ("{x}", "{x}^2", "1/{x}", "exp(-{x})", "exp({x}/2)", "log({x})", "sqrt({x})",
            "sin({x})", "cos({x})", "1/(1+{x}^2)", "{x}*t", "exp(-t)", "t", "cos(t)")
_TIME_ONLY = ("1", "2", "1/2", "-1", "3/2", "exp(-t)", "1+t", "cos(t)", "t^2 + 1")
_RATS = (Fraction(-2), Fraction(-1), Fraction(-1, 2), Fraction(1, 3), Fraction(1, 2), Fraction(1), Fraction(2))
_WIENER_ATOMS = ("{w}", "exp({w})", "sin({w})", "{x}*{w}", "{w}^2")


@dataclass(frozen=True)
class Instance:
    name: str
    sde: _SDE
    field: VectorField | None = None


def _rat(rng: random.Random) -> str:
    c = rng.choice(_RATS)
    return f"({c.numerator}/{c.denominator})" if c.denominator != 1 else f"({c.numerator})"


def _term(rng: random.Random, states, k: int) -> str:
    atoms = [rng.choice(_ATOMS_1).format(x=rng.choice(states)) for _ in range(k)]
    return "*".join([_rat(rng), *atoms])


def random_coefficient(rng: random.Random, states, terms: int = 2) -> str:
    return " + ".join(_term(rng, states, rng.randint(1, 2)) for _ in range(rng.randint(1, terms)))


def space_for(n: int, m: int) -> VarSpace:
    state = ("x",) if n == 1 else tuple(f"x{i + 1}" for i in range(n))
    wiener = ("w",) if m == 1 else tuple(f"w{k + 1}" for k in range(m))
    return VarSpace(state, "t", wiener)


def random_sde(rng: random.Random, n: int = 1, m: int = 1, calculus: str = "ito", constant_noise: bool = False) -> _SDE:
    sp = space_for(n, m)
    drift = [random_coefficient(rng, sp.state) for _ in range(n)]
    if constant_noise:
        noise = [[rng.choice(_TIME_ONLY) for _ in range(m)] for _ in range(n)]
    else:
        noise = [[random_coefficient(rng, sp.state, 1) for _ in range(m)] for _ in range(n)]
    return make_sde(sp, drift, noise, calculus)


def ito_strat_corpus(count: int = 50, seed: int = 0, constant_every: int = 5) -> list[ItoSDE]:
    """Random Ito equations; every ``constant_every``-th has state-free noise."""
    rng = random.Random(seed)
    out = []
    for i in range(count):
        n, m = rng.choice([(1, 1), (1, 1), (1, 2), (2, 1), (2, 2)])
        out.append(random_sde(rng, n, m, "ito", constant_noise=(i % constant_every == 0)))
    return out


def random_field(rng: random.Random, sp: VarSpace, random_kind: bool) -> VectorField:
    phi = []
    for _ in sp.state:
        e = random_coefficient(rng, sp.state)
        if random_kind:
            w = rng.choice(sp.wiener)
            e += " + " + _rat(rng) + "*" + rng.choice(_WIENER_ATOMS).format(x=rng.choice(sp.state), w=w)
        phi.append(e)
    return VectorField(sp, tuple(phi), "random" if random_kind else "deterministic")


def strat_field_pairs(count: int = 50, seed: int = 0) -> list[tuple[StratSDE, VectorField]]:
    """Random Stratonovich equations with fields; odd entries are random fields."""
    rng = random.Random(seed)
    out = []
    for i in range(count):
        n, m = rng.choice([(1, 1), (1, 2), (2, 1)])
        sde = random_sde(rng, n, m, "stratonovich")
        out.append((sde, random_field(rng, sde.space, random_kind=bool(i % 2))))
    return out


# ------------------------------------------------------------ examples


def example1() -> Instance:
    sp = VarSpace(("y",))
    sde = make_sde(sp, ["exp(-y) - 1/2*exp(-2*y)"], [["exp(-y)"]])
    return Instance("example 1", sde, VectorField(sp, ("exp(-y)",)))


def example2() -> Instance:
    sp = VarSpace(("y",))
    drift = "exp(-t)*(1+y^2)^2/(8*y^3)*(-4*y^2 + exp(t)*(3*y^4 + 2*y^2 - 1))"
    sde = make_sde(sp, [drift], [["-(1+y^2)^2/(2*y)"]])
    return Instance("example 2", sde, VectorField(sp, ("-(1+y^2)^2/(2*y)",)))


def non_symmetry() -> Instance:
    """``dx = dw`` with the scaling field ``x d/dx``."""
    sp = VarSpace(("x",))
    return Instance("dx = dw, phi = x", make_sde(sp, ["0"], [["1"]]), VectorField(sp, ("x",)))


# ------------------------------------------------------------ fields with vanishing noise residuals


def _g(rng: random.Random) -> str:
    return rng.choice(("1", "t", "exp(-t)", "1+t^2", "cos(t)", "2"))


def _h(rng: random.Random, arg: str) -> str:
    return rng.choice(("{a}", "({a})^2", "exp({a})", "sin({a})", "({a})^3 - ({a})")).format(a=arg)


def unal_corpus(count: int = 30, seed: int = 0) -> list[Instance]:
    """Equation/field pairs whose noise residuals vanish identically.

    Families: ``phi = g(t) sigma`` for scalar sigma; ``phi = h(x - c w)`` and
    ``phi = g(t)`` for constant sigma; ``phi = x h(log x - w)`` for
    ``sigma = x``; and a two-state constant-noise family.  The worked
    examples and the ``sigma = x^2`` case lead the list.
    """
    rng = random.Random(seed)
    sx = VarSpace(("x",))
    out = [example1(), example2()]
    out.append(Instance("sigma = x^2, phi = x^2", make_sde(sx, ["x"], [["x^2"]]), VectorField(sx, ("x^2",))))
    out.append(Instance("sigma = x, phi = x", make_sde(sx, ["x"], [["x"]]), VectorField(sx, ("x",))))
    out.append(
        Instance("sigma = 1, phi = x - w", make_sde(sx, ["0"], [["1"]]), VectorField(sx, ("x - w",), "random"))
    )
    s2 = space_for(2, 1)
    while len(out) < count:
        fam = len(out) % 5
        f = random_coefficient(rng, sx.state)
        if fam == 0:
            sig = random_coefficient(rng, sx.state, 1)
            phi = f"({_g(rng)})*({sig})"
            out.append(Instance("phi = g(t) sigma", make_sde(sx, [f], [[sig]]), VectorField(sx, (phi,))))
        elif fam == 1:
            c = _rat(rng)
            phi = _h(rng, f"x - {c}*w")
            out.append(Instance("constant sigma, random phi", make_sde(sx, [f], [[c]]), VectorField(sx, (phi,), "random")))
        elif fam == 2:
            c = rng.choice(_TIME_ONLY[:5])
            out.append(Instance("constant sigma, phi = g(t)", make_sde(sx, [f], [[c]]), VectorField(sx, (_g(rng),))))
        elif fam == 3:
            phi = f"x*({_h(rng, 'log(x) - w')})"
            out.append(Instance("sigma = x, random phi", make_sde(sx, [f], [["x"]]), VectorField(sx, (phi,), "random")))
        else:
            a, b = _rat(rng), _rat(rng)
            drift = [random_coefficient(rng, s2.state) for _ in range(2)]
            arg = f"{b}*x1 - {a}*x2"
            phi = (_h(rng, arg), _h(rng, arg))
            out.append(Instance("two states, constant sigma", make_sde(s2, drift, [[a], [b]]), VectorField(s2, phi)))
    return out


def tau_corpus(count: int = 50, seed: int = 0) -> list[ItoSDE]:
    """Equations on which a time-only ``tau`` must pass the acceptability condition."""
    return [example1().sde, example2().sde, *ito_strat_corpus(count - 2, seed)]


__all__ = [
    "Instance",
    "example1",
    "example2",
    "ito_strat_corpus",
    "non_symmetry",
    "random_coefficient",
    "random_field",
    "random_sde",
    "space_for",
    "strat_field_pairs",
    "tau_corpus",
    "unal_corpus",
]

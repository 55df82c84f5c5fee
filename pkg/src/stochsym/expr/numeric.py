"""Numeric evaluation and probabilistic zero testing."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .canonical import _node_cache, simplify
from .nodes import Add, Dec, Expr, Func, Mul, Neg, Num, Pow, Var
from .space import DEFAULT_DOMAINS, Domains

MIN_SAMPLES = 32


class DomainError(ArithmeticError):
    """Evaluation left the domain of an operation (log of x <= 0, 1/0, ...)."""


class SamplingExhausted(RuntimeError):
    """Too few sample points inside the expression's domain."""

    def __init__(self, found: int, wanted: int, tried: int) -> None:
        self.found, self.wanted, self.tried = found, wanted, tried
        super().__init__(f"only {found} of {wanted} sample points valid after {tried} draws")


_FUNCS = {"exp": np.exp, "log": np.log, "sqrt": np.sqrt, "sin": np.sin, "cos": np.cos}


def _compile(e: Expr) -> Callable[[Mapping[str, np.ndarray]], np.ndarray]:
    if isinstance(e, (Num, Dec)):
        val = float(e.value)
        return lambda env: val
    if isinstance(e, Var):
        name = e.name
        return lambda env: env[name]
    if isinstance(e, Add):
        parts = [compile_expr(t) for t in e.terms]

        def f_add(env):
            acc = parts[0](env)
            for p in parts[1:]:
                acc = acc + p(env)
            return acc

        return f_add
    if isinstance(e, Mul):
        parts = [compile_expr(t) for t in e.factors]

        def f_mul(env):
            acc = parts[0](env)
            for p in parts[1:]:
                acc = acc * p(env)
            return acc

        return f_mul
    if isinstance(e, Neg):
        inner = compile_expr(e.arg)
        return lambda env: -inner(env)
    if isinstance(e, Pow):
        base = compile_expr(e.base)
        if isinstance(e.exp, Num) and e.exp.value.denominator == 1:
            k = e.exp.value.numerator
            if k >= 0:
                return lambda env: np.power(base(env), k)
            return lambda env: 1.0 / np.power(base(env), -k)
        ex = compile_expr(e.exp)
        return lambda env: np.power(np.asarray(base(env), dtype=float), ex(env))
    if isinstance(e, Func):
        fn = _FUNCS[e.name]
        inner = compile_expr(e.arg)
        return lambda env: fn(inner(env))
    raise TypeError(type(e))


def compile_expr(e: Expr) -> Callable[[Mapping[str, np.ndarray]], np.ndarray]:
    """Vectorized numpy evaluator taking a name -> array mapping."""
    c = _node_cache(e)
    fn = c.get("np")
    if fn is None:
        fn = _compile(e)
        c["np"] = fn
    return fn


def eval_array(e: Expr, env: Mapping[str, np.ndarray]) -> np.ndarray:
    """Evaluate on arrays; non-finite entries mark domain violations."""
    missing = e.free_vars() - env.keys()
    if missing:
        raise KeyError(f"unbound variables: {sorted(missing)}")
    with np.errstate(all="ignore"):
        out = compile_expr(e)(env)
    return np.asarray(out, dtype=float)


def eval_numeric(e: Expr, point: Mapping[str, float]) -> float:
    """Double-precision value of ``e`` at ``point``.

    Raises :class:`DomainError` when the value is not finite.
    """
    env = {k: np.float64(v) for k, v in point.items()}
    val = float(eval_array(e, env))
    if not np.isfinite(val):
        raise DomainError(f"{e} is undefined at {dict(point)}")
    return val


# ------------------------------------------------------------ verdicts


@dataclass(frozen=True)
class SymbolicZero:
    method = "symbolic"
    is_zero = True

    def describe(self) -> str:
        return "zero (symbolic)"


@dataclass(frozen=True)
class NumericZero:
    samples: int
    tol: float
    max_abs: float
    method = "numeric"
    is_zero = True

    def __post_init__(self) -> None:
        if self.samples < MIN_SAMPLES:
            raise ValueError(f"NumericZero needs at least {MIN_SAMPLES} samples")

    def describe(self) -> str:
        return f"zero (numeric, {self.samples} samples, max |r| = {self.max_abs:.3g})"


@dataclass(frozen=True)
class NonZero:
    witness: dict
    value: float
    tol: float = 1e-9
    method = "numeric"
    is_zero = False

    def describe(self) -> str:
        pt = ", ".join(f"{k}={v:.6g}" for k, v in self.witness.items())
        return f"nonzero (value {self.value:.6g} at {pt or 'constant'})"


@dataclass(frozen=True)
class ZeroTestConfig:
    tol: float = 1e-9
    samples: int = MIN_SAMPLES
    seed: int = 0
    domains: Domains = field(default_factory=lambda: DEFAULT_DOMAINS)

    def __post_init__(self) -> None:
        if self.samples < MIN_SAMPLES:
            raise ValueError(f"samples must be >= {MIN_SAMPLES}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


def _scale_terms(s: Expr) -> list[Expr]:
    return list(s.terms) if isinstance(s, Add) else [s]


def is_zero(
    e: Expr,
    domains: Domains | Mapping | None = None,
    tol: float = 1e-9,
    samples: int = MIN_SAMPLES,
    seed: int = 0,
    names=(),
):
    """Three-valued zero test: symbolic first, then seeded random sampling.

    A point counts as zero when ``|e| <= tol * max(1, sum |terms|)`` over
    the top-level terms of the simplified expression.  ``names`` adds
    variables to the sampled point (useful for witnesses of constants).
    """
    if samples < MIN_SAMPLES:
        raise ValueError(f"samples must be >= {MIN_SAMPLES}")
    if isinstance(domains, Mapping):
        domains = DEFAULT_DOMAINS.merged(domains)
    domains = domains or DEFAULT_DOMAINS
    s = simplify(e)
    if s == Num(0):
        return SymbolicZero()
    names = sorted(s.free_vars() | set(names))
    terms = _scale_terms(s)
    rng = np.random.default_rng(seed)
    budget = 10 * samples
    drawn = 0
    got_vals: list[np.ndarray] = []
    got_scale: list[np.ndarray] = []
    got_pts: list[dict] = []
    found = 0
    while found < samples and drawn < budget:
        batch = min(samples, budget - drawn)
        env = {}
        for n in names:
            lo, hi = domains.interval(n)
            env[n] = rng.uniform(lo, hi, size=batch)
        drawn += batch
        vals = np.broadcast_to(eval_array(s, env), (batch,))
        scale = np.ones(batch)
        for t in terms:
            scale = scale + np.abs(np.broadcast_to(eval_array(t, env), (batch,)))
        ok = np.isfinite(vals) & np.isfinite(scale)
        idx = np.nonzero(ok)[0][: samples - found]
        found += len(idx)
        got_vals.append(vals[idx])
        got_scale.append(np.maximum(1.0, scale[idx] - 1.0))
        got_pts.extend({n: float(env[n][i]) for n in names} for i in idx)
    if found < samples:
        raise SamplingExhausted(found, samples, drawn)
    vals = np.concatenate(got_vals)
    scale = np.concatenate(got_scale)
    bad = np.nonzero(np.abs(vals) > tol * scale)[0]
    if len(bad):
        i = int(bad[0])
        return NonZero(got_pts[i], float(vals[i]), tol)
    return NumericZero(found, tol, float(np.max(np.abs(vals))))

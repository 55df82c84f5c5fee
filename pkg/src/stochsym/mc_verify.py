"""Euler-Maruyama simulation and pathwise consistency checks.

Noise for path ``i`` comes from ``SeedSequence([seed, i])``, so every path is
reproducible on its own.  Increments are drawn once at the finest step of a
study; coarser levels sum consecutive fine increments, which makes the
levels consistent by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ValidationError
from .expr import Add, Mul, Var, as_expr, compile_expr, simplify
from .sde_model import ItoSDE, _SDE, as_ito
from .symmetry import VectorField
from .transform import CoordinateChange, transform_ito

MIN_LEVELS = 4
MIN_PATHS = 200
MAX_EXCLUDED = 0.10
SLOPE_BAND = (0.3, 0.7)


@dataclass(frozen=True)
class TimeGrid:
    dt: float
    horizon: float

    def __post_init__(self) -> None:
        if not (self.dt > 0 and self.horizon > 0):
            raise ValidationError("dt and horizon must be positive")
        ratio = self.horizon / self.dt
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ValidationError(f"horizon {self.horizon} is not a multiple of dt {self.dt}")

    @property
    def steps(self) -> int:
        return int(round(self.horizon / self.dt))

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.steps + 1) * self.dt


def _ratio(coarse: float, fine: float) -> int:
    r = coarse / fine
    k = int(round(r))
    if abs(r - k) > 1e-9 * r or k < 1 or k & (k - 1):
        raise ValidationError(f"step {coarse} is not a power-of-two multiple of {fine}")
    return k


def path_rng(seed: int, path_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(path_index)]))


@dataclass(frozen=True, eq=False)
class WienerIncrements:
    """Increments ``dw[j, k]`` on a grid, tagged with their generation key."""

    m: int
    grid: TimeGrid
    seed: int
    path_index: int
    increments: np.ndarray
    resolution: float

    def coarsen(self, factor: int) -> WienerIncrements:
        if factor < 1 or self.grid.steps % factor:
            raise ValidationError(f"cannot coarsen {self.grid.steps} steps by {factor}")
        inc = self.increments.reshape(self.grid.steps // factor, factor, self.m).sum(axis=1)
        return WienerIncrements(
            self.m, TimeGrid(self.grid.dt * factor, self.grid.horizon), self.seed, self.path_index, inc, self.resolution
        )

    def values(self) -> np.ndarray:
        """Wiener path ``w(t_j)`` starting at 0."""
        return np.vstack([np.zeros((1, self.m)), np.cumsum(self.increments, axis=0)])


def _fine_draw(m: int, steps_fine: int, resolution: float, seed: int, index: int) -> np.ndarray:
    return path_rng(seed, index).standard_normal((steps_fine, m)) * math.sqrt(resolution)


def generate_wiener(
    m: int, grid: TimeGrid, seed: int, path_index: int, resolution: float | None = None
) -> WienerIncrements:
    """Increments on ``grid`` obtained by summing N(0, resolution) draws.

    ``resolution`` (default ``grid.dt``) is the finest step of the study; it
    must divide ``grid.dt`` by a power of two.
    """
    resolution = grid.dt if resolution is None else resolution
    r = _ratio(grid.dt, resolution)
    fine = _fine_draw(m, grid.steps * r, resolution, seed, path_index)
    inc = fine.reshape(grid.steps, r, m).sum(axis=1)
    return WienerIncrements(m, grid, seed, path_index, inc, resolution)


def wiener_batch(m: int, grid: TimeGrid, seed: int, paths: int | Sequence[int], resolution: float | None = None) -> np.ndarray:
    """Array ``(paths, steps, m)`` of increments, one independent stream per path."""
    idx = range(paths) if isinstance(paths, int) else paths
    return np.stack([generate_wiener(m, grid, seed, i, resolution).increments for i in idx])


# ------------------------------------------------------------ simulation


@dataclass(frozen=True, eq=False)
class Path:
    times: np.ndarray
    states: np.ndarray
    sde: ItoSDE
    noise: WienerIncrements
    first_bad: int | None = None

    @property
    def diverged(self) -> bool:
        return self.first_bad is not None


def _broadcast(v, P: int) -> np.ndarray:
    return np.broadcast_to(np.asarray(v, dtype=float), (P,))


def _box_mask(X: np.ndarray, names: Sequence[str], box: Mapping | None) -> np.ndarray:
    bad = ~np.all(np.isfinite(X), axis=-1)
    if box:
        for i, n in enumerate(names):
            if n in box:
                lo, hi = box[n]
                with np.errstate(invalid="ignore"):
                    bad |= ~((X[..., i] > lo) & (X[..., i] < hi))
    return bad


def em_batch(
    sde: _SDE,
    x0: np.ndarray,
    dW: np.ndarray,
    dt: float,
    t0: float = 0.0,
    box: Mapping | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized Euler-Maruyama over paths.

    Returns states ``(P, N+1, n)`` and the first index at which each path left
    the box or stopped being finite (``-1`` if never).
    """
    sde = as_ito(sde)
    sp = sde.space
    P, N, m = dW.shape
    n = sp.n
    f = [compile_expr(simplify(e)) for e in sde.drift]
    s = [[compile_expr(simplify(e)) for e in row] for row in sde.noise]
    X = np.empty((P, N + 1, n))
    X[:, 0, :] = np.broadcast_to(np.asarray(x0, dtype=float), (P, n))
    first_bad = np.full(P, -1)
    bad0 = _box_mask(X[:, 0, :], sp.state, box)
    first_bad[bad0] = 0
    with np.errstate(all="ignore"):
        for j in range(N):
            env = {x: X[:, j, i] for i, x in enumerate(sp.state)}
            env[sp.time] = t0 + j * dt
            for i in range(n):
                acc = X[:, j, i] + _broadcast(f[i](env), P) * dt
                for k in range(m):
                    acc = acc + _broadcast(s[i][k](env), P) * dW[:, j, k]
                X[:, j + 1, i] = acc
            bad = _box_mask(X[:, j + 1, :], sp.state, box) & (first_bad < 0)
            first_bad[bad] = j + 1
    return X, first_bad


def simulate_euler_maruyama(sde: _SDE, x0, noise: WienerIncrements, box: Mapping | None = None) -> Path:
    """``x_{j+1} = x_j + f(x_j, t_j) dt + sigma(x_j, t_j) dw_j`` on one path."""
    sde = as_ito(sde)
    if noise.m != sde.space.m:
        raise ValidationError("increment dimension does not match the equation")
    X, fb = em_batch(sde, np.atleast_1d(np.asarray(x0, dtype=float)), noise.increments[None], noise.grid.dt, 0.0, box)
    first = int(fb[0]) if fb[0] >= 0 else None
    return Path(noise.grid.times, X[0], sde, noise, first)


# ------------------------------------------------------------ reports


@dataclass(frozen=True)
class ConvergenceReport:
    kind: str
    dts: tuple
    discrepancies: tuple
    slope: float | None
    monotone: bool
    paths: int
    excluded: int
    passed: bool
    threshold: float | None = None
    notes: tuple = field(default_factory=tuple)

    @property
    def excluded_fraction(self) -> float:
        return self.excluded / self.paths if self.paths else 0.0

    def table(self) -> str:
        rows = [f"{'dt':>12} {'mean max |discrepancy|':>24}"]
        rows += [f"{dt:>12.6g} {d:>24.6e}" for dt, d in zip(self.dts, self.discrepancies)]
        return "\n".join(rows)

    def summary(self) -> str:
        slope = "n/a" if self.slope is None else f"{self.slope:.3f}"
        head = f"{self.kind}: {'PASS' if self.passed else 'FAIL'} (slope {slope}, monotone {self.monotone}, excluded {self.excluded}/{self.paths})"
        if self.threshold is not None:
            head += f", finest {self.discrepancies[-1]:.3e} vs bound {self.threshold:.3e}"
        return head


def _check_study(dt_levels: Sequence[float], paths: int) -> list[float]:
    levels = sorted({float(d) for d in dt_levels}, reverse=True)
    if len(levels) < MIN_LEVELS:
        raise ValidationError(f"need at least {MIN_LEVELS} dt levels")
    if paths < MIN_PATHS:
        raise ValidationError(f"need at least {MIN_PATHS} paths per level")
    for d in levels:
        _ratio(d, levels[-1])
    return levels


def _eval_map(exprs, names, time: str, X: np.ndarray, times: np.ndarray, extra: Mapping | None = None) -> np.ndarray:
    P, N1, _ = X.shape
    env = {x: X[:, :, i] for i, x in enumerate(names)}
    env[time] = np.broadcast_to(times[None, :], (P, N1))
    if extra:
        env.update(extra)
    out = np.empty((P, N1, len(exprs)))
    with np.errstate(all="ignore"):
        for i, e in enumerate(exprs):
            out[:, :, i] = np.broadcast_to(np.asarray(compile_expr(e)(env), dtype=float), (P, N1))
    return out


def _fit(levels: list[float], means: list[float]) -> tuple[float | None, bool]:
    monotone = all(b < a for a, b in zip(means, means[1:]))
    if any(not (v > 0) or not math.isfinite(v) for v in means):
        return None, monotone
    slope = float(np.polyfit(np.log(levels), np.log(means), 1)[0])
    return slope, monotone


def _run_study(
    kind: str,
    levels: list[float],
    paths: int,
    seed: int,
    horizon: float,
    m: int,
    one_level: Callable[[np.ndarray, TimeGrid], tuple[np.ndarray, np.ndarray]],
) -> tuple[list[float], int, list[str]]:
    finest = levels[-1]
    fine_grid = TimeGrid(finest, horizon)
    dW_fine = wiener_batch(m, fine_grid, seed, paths)
    per_level = []
    excluded = np.zeros(paths, dtype=bool)
    for dt in levels:
        r = _ratio(dt, finest)
        grid = TimeGrid(dt, horizon)
        dW = dW_fine.reshape(paths, grid.steps, r, m).sum(axis=2)
        disc, bad = one_level(dW, grid)
        per_level.append(disc)
        excluded |= bad
    keep = ~excluded
    means = [math.fsum(d[keep]) / max(1, int(keep.sum())) for d in per_level]
    notes = [f"{int(excluded.sum())} of {paths} paths excluded (diverged or left the domain)"]
    return means, int(excluded.sum()), notes


def change_consistency_test(
    sde: _SDE,
    ch: CoordinateChange,
    dt_levels: Sequence[float],
    paths: int = MIN_PATHS,
    seed: int = 0,
    x0=None,
    horizon: float = 1.0,
    domain: Mapping | None = None,
) -> ConvergenceReport:
    """Simulate the equation and its transform under the same noise.

    The discrepancy is ``max_j |forward(x_j, t_j) - x~_j|`` per path,
    averaged over paths for each step size.
    """
    sde = as_ito(sde)
    levels = _check_study(dt_levels, paths)
    tsde = transform_ito(sde, ch)
    sp, nsp = sde.space, tsde.space
    if x0 is None:
        x0 = [sum(ch.old_domains().interval(x)) / 2 for x in sp.state]
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    y0 = _eval_map(ch.forward, sp.state, sp.time, x0[None, None, :], np.zeros(1))[0, 0]
    old_box = {x: domain[x] for x in sp.state if domain and x in domain}
    new_box = {x: domain[x] for x in nsp.state if domain and x in domain}

    def one_level(dW, grid):
        X, fb_x = em_batch(sde, x0, dW, grid.dt, 0.0, old_box)
        Y, fb_y = em_batch(tsde, y0, dW, grid.dt, 0.0, new_box)
        mapped = _eval_map(ch.forward, sp.state, sp.time, X, grid.times)
        with np.errstate(invalid="ignore"):
            disc = np.max(np.abs(mapped - Y), axis=(1, 2))
        bad = (fb_x >= 0) | (fb_y >= 0) | ~np.isfinite(disc)
        return np.where(bad, 0.0, disc), bad

    means, excluded, notes = _run_study("change consistency", levels, paths, seed, horizon, sp.m, one_level)
    slope, monotone = _fit(levels, means)
    ok_excl = excluded <= MAX_EXCLUDED * paths
    if all(v == 0 for v in means):
        passed = ok_excl
        notes.append("discrepancy is exactly zero at every step size")
    else:
        passed = ok_excl and monotone and slope is not None and SLOPE_BAND[0] <= slope <= SLOPE_BAND[1]
    return ConvergenceReport(
        "change consistency", tuple(levels), tuple(means), slope, monotone, paths, excluded, passed, None, tuple(notes)
    )


def flow_invariance_test(
    sde: _SDE,
    X: VectorField,
    epsilon: float = 1e-2,
    dt_levels: Sequence[float] = tuple(2.0 ** -k for k in range(6, 13)),
    paths: int = MIN_PATHS,
    seed: int = 0,
    x0=None,
    horizon: float = 1.0,
    domain: Mapping | None = None,
    factor: float = 10.0,
) -> ConvergenceReport:
    """Compare ``x + eps phi`` along solutions with the solution from the shifted start.

    For a symmetry the two agree up to ``O(eps^2)`` plus discretization error;
    the test passes when the finest-step discrepancy is at most
    ``factor * eps^2``.
    """
    sde = as_ito(sde)
    levels = _check_study(dt_levels, paths)
    sp = sde.space
    if X.space != sp:
        raise ValidationError("field and equation live on different spaces")
    eps = as_expr(float(epsilon))
    G = tuple(simplify(Add((Var(x), Mul((eps, p))))) for x, p in zip(sp.state, X.phi))
    if x0 is None:
        x0 = [1.0] * sp.n
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    w0 = {w: np.zeros((1, 1)) for w in sp.wiener}
    g0 = _eval_map(G, sp.state, sp.time, x0[None, None, :], np.zeros(1), w0)[0, 0]
    box = {x: domain[x] for x in sp.state if domain and x in domain}

    def one_level(dW, grid):
        Xp, fb_x = em_batch(sde, x0, dW, grid.dt, 0.0, box)
        Yp, fb_y = em_batch(sde, g0, dW, grid.dt, 0.0, box)
        wv = np.concatenate([np.zeros((dW.shape[0], 1, dW.shape[2])), np.cumsum(dW, axis=1)], axis=1)
        extra = {w: wv[:, :, k] for k, w in enumerate(sp.wiener)}
        mapped = _eval_map(G, sp.state, sp.time, Xp, grid.times, extra)
        with np.errstate(invalid="ignore"):
            disc = np.max(np.abs(mapped - Yp), axis=(1, 2))
        bad = (fb_x >= 0) | (fb_y >= 0) | ~np.isfinite(disc)
        return np.where(bad, 0.0, disc), bad

    means, excluded, notes = _run_study("flow invariance", levels, paths, seed, horizon, sp.m, one_level)
    slope, monotone = _fit(levels, means)
    bound = factor * epsilon**2
    passed = excluded <= MAX_EXCLUDED * paths and means[-1] <= bound
    return ConvergenceReport(
        "flow invariance", tuple(levels), tuple(means), slope, monotone, paths, excluded, passed, bound, tuple(notes)
    )


def invert_monotone(
    f: Callable[[np.ndarray], np.ndarray],
    target: np.ndarray,
    lo: float,
    hi: float,
    tol: float = 1e-12,
    max_iter: int = 200,
) -> np.ndarray:
    """Solve ``f(x) = target`` for monotone ``f`` on ``[lo, hi]`` by bisection."""
    target = np.asarray(target, dtype=float)
    a = np.full(target.shape, float(lo))
    b = np.full(target.shape, float(hi))
    fa = np.asarray(f(a), dtype=float) - target
    fb = np.asarray(f(b), dtype=float) - target
    if np.any(fa * fb > 0):
        raise ValidationError("target outside the bracket of the monotone map")
    increasing = fb >= fa
    for _ in range(max_iter):
        if np.all(b - a <= tol):
            break
        mid = 0.5 * (a + b)
        fm = np.asarray(f(mid), dtype=float) - target
        go_right = (fm < 0) == increasing
        a = np.where(go_right, mid, a)
        b = np.where(go_right, b, mid)
    return 0.5 * (a + b)

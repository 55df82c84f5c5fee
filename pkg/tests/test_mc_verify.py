import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stochsym.corpus import example1, non_symmetry
from stochsym.errors import ValidationError
from stochsym.expr import VarSpace
from stochsym.mc_verify import (
    TimeGrid,
    change_consistency_test,
    em_batch,
    flow_invariance_test,
    generate_wiener,
    invert_monotone,
    simulate_euler_maruyama,
    wiener_batch,
)
from stochsym.sde_model import make_sde
from stochsym.symmetry import VectorField
from stochsym.transform import CoordinateChange

X = VarSpace(("x",))
LEVELS = tuple(2.0**-k for k in range(6, 10))


def test_grid_rejects_non_multiples():
    with pytest.raises(ValidationError):
        TimeGrid(0.3, 1.0)
    assert TimeGrid(0.25, 1.0).steps == 4


@given(st.integers(0, 10**6), st.integers(0, 10**4))
def test_increments_are_deterministic(seed, i):
    g = TimeGrid(0.125, 1.0)
    a = generate_wiener(2, g, seed, i).increments
    b = generate_wiener(2, g, seed, i).increments
    assert np.array_equal(a, b)


def test_paths_use_distinct_streams():
    g = TimeGrid(0.125, 1.0)
    assert not np.array_equal(generate_wiener(1, g, 0, 0).increments, generate_wiener(1, g, 0, 1).increments)


@given(st.integers(0, 3))
def test_coarsening_sums_fine_increments(k):
    fine = generate_wiener(1, TimeGrid(2.0**-6, 1.0), 5, 3)
    f = 2**k
    coarse = fine.coarsen(f)
    assert np.allclose(coarse.increments, fine.increments.reshape(-1, f, 1).sum(axis=1), atol=1e-15)
    direct = generate_wiener(1, TimeGrid(2.0**-6 * f, 1.0), 5, 3, resolution=2.0**-6)
    assert np.allclose(direct.increments, coarse.increments, atol=1e-14)


def test_increment_moments_within_clt_bound():
    dt = 0.01
    dW = wiener_batch(1, TimeGrid(dt, 1.0), 7, 1000).ravel()  # 1e5 draws
    assert abs(dW.mean()) < 4 * math.sqrt(dt) / math.sqrt(dW.size)
    se_var = dt * math.sqrt(2 / (dW.size - 1))
    assert abs(dW.var(ddof=1) - dt) < 4 * se_var


def test_values_start_at_zero():
    v = generate_wiener(1, TimeGrid(0.25, 1.0), 0, 0).values()
    assert v.shape == (5, 1) and v[0, 0] == 0


def test_euler_maruyama_exact_for_constant_coefficients():
    sde = make_sde(X, ["2"], [["3"]])
    noise = generate_wiener(1, TimeGrid(2.0**-8, 1.0), 1, 0)
    p = simulate_euler_maruyama(sde, 0.5, noise)
    exact = 0.5 + 2 * p.times + 3 * noise.values()[:, 0]
    assert np.max(np.abs(p.states[:, 0] - exact)) < 1e-12
    assert not p.diverged


def test_geometric_martingale_mean():
    sde = make_sde(X, ["0"], [["x"]])
    dW = wiener_batch(1, TimeGrid(2.0**-6, 1.0), 2, 4000)
    Xs, _ = em_batch(sde, np.array([1.0]), dW, 2.0**-6)
    end = Xs[:, -1, 0]
    assert abs(end.mean() - 1) < 4 * end.std(ddof=1) / math.sqrt(end.size)


def test_drifted_brownian_terminal_law():
    sde = make_sde(X, ["1"], [["1"]])
    dW = wiener_batch(1, TimeGrid(0.125, 1.0), 3, 5000)
    Xs, _ = em_batch(sde, np.array([0.0]), dW, 0.125)
    end = Xs[:, -1, 0]
    assert abs(end.mean() - 1) < 4 / math.sqrt(end.size)
    assert abs(end.var(ddof=1) - 1) < 4 * math.sqrt(2 / (end.size - 1))


def test_box_exit_is_recorded():
    sde = make_sde(X, ["1"], [["0"]])
    dW = np.zeros((1, 8, 1))
    _, fb = em_batch(sde, np.array([0.0]), dW, 0.125, box={"x": (-1.0, 0.5)})
    assert fb[0] == 4  # the box is open: x = 0.5 is already outside


def test_identity_change_has_zero_discrepancy():
    sde = make_sde(X, ["-x"], [["1"]])
    ch = CoordinateChange(X, ("y",), ("x",), ("y",))
    r = change_consistency_test(sde, ch, LEVELS, x0=[1.0])
    assert r.passed and all(d == 0 for d in r.discrepancies)


def test_exclusions_are_counted():
    sde = make_sde(X, ["0"], [["1"]])
    ch = CoordinateChange(X, ("y",), ("x",), ("y",))
    r = change_consistency_test(sde, ch, LEVELS, x0=[0.0], domain={"x": (-0.05, 0.05)})
    assert r.excluded > 0.9 * r.paths and not r.passed


def test_study_minimums():
    sde, ch = example1().sde, CoordinateChange(VarSpace(("y",)), ("x",), ("exp(y)",), ("log(x)",))
    with pytest.raises(ValidationError):
        change_consistency_test(sde, ch, LEVELS[:3])
    with pytest.raises(ValidationError):
        change_consistency_test(sde, ch, LEVELS, paths=199)


def test_example_one_change_converges_at_half_order():
    e = example1()
    ch = CoordinateChange(e.sde.space, ("x",), ("exp(y)",), ("log(x)",))
    r = change_consistency_test(e.sde, ch, tuple(2.0**-k for k in range(6, 11)), x0=[1.0])
    assert r.passed and 0.3 <= r.slope <= 0.7 and r.monotone


def test_flow_of_symmetry_stays_close():
    e = example1()
    r = flow_invariance_test(e.sde, e.field, 1e-2, LEVELS, x0=[1.0])
    assert r.passed and r.discrepancies[-1] <= r.threshold


def test_flow_of_non_symmetry_drifts_apart():
    e = non_symmetry()
    r = flow_invariance_test(e.sde, e.field, 1e-2, LEVELS, x0=[1.0])
    assert not r.passed


def test_zero_field_flow_is_trivial():
    sde = make_sde(X, ["-x"], [["1"]])
    r = flow_invariance_test(sde, VectorField(X, ("0",)), 1e-2, LEVELS)
    assert r.passed and r.discrepancies[-1] == 0


def test_random_field_flow():
    sde = make_sde(X, ["0"], [["1"]])
    r = flow_invariance_test(sde, VectorField(X, ("x - w",), "random"), 1e-2, LEVELS)
    assert r.passed


@given(st.floats(-5, 5))
def test_invert_monotone(target):
    x = invert_monotone(lambda v: v**3 + v, np.array([target]), -3, 3)
    assert abs(x[0] ** 3 + x[0] - target) < 1e-9


def test_invert_monotone_decreasing_and_out_of_bracket():
    assert invert_monotone(lambda v: -v, np.array([0.5]), -1, 1)[0] == pytest.approx(-0.5)
    with pytest.raises(ValidationError):
        invert_monotone(lambda v: v, np.array([5.0]), 0, 1)

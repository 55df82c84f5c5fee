import pytest
from hypothesis import given
from hypothesis import strategies as st

from stochsym.corpus import ito_strat_corpus, random_sde, space_for
from stochsym.errors import DimensionMismatch, ValidationError
from stochsym.expr import Num, VarSpace, parse, simplify
from stochsym.sde_model import (
    ItoSDE,
    StratSDE,
    as_ito,
    ito_laplacian,
    ito_to_stratonovich,
    make_sde,
    rho,
    stratonovich_to_ito,
)

Y, X = VarSpace(("y",)), VarSpace(("x",))


def eq(a, b):
    return simplify(a) == simplify(parse(b) if isinstance(b, str) else b)


@pytest.mark.parametrize(
    "sigma, expected",
    [("exp(-y)", "-1/2*exp(-2*y)"), ("3", "0"), ("y^2", "y^3")],
)
def test_rho_scalar_oracles(sigma, expected):
    sde = make_sde(Y, ["0"], [[sigma]])
    assert eq(rho(sde).rho[0], expected)


def test_rho_vanishes_for_constant_matrix():
    sde = make_sde(space_for(2, 2), ["x1", "x2"], [["1", "2"], ["-1", "exp(-t)"]])
    assert all(r == Num(0) for r in rho(sde).rho)


def test_example_one_to_stratonovich():
    s = ito_to_stratonovich(make_sde(Y, ["exp(-y) - 1/2*exp(-2*y)"], [["exp(-y)"]]))
    assert isinstance(s, StratSDE)
    assert eq(s.drift[0], "exp(-y)")
    assert eq(s.noise[0][0], "exp(-y)")


def test_constant_noise_keeps_drift():
    s = make_sde(X, ["x^3 - sin(x)"], [["2"]])
    assert eq(ito_to_stratonovich(s).drift[0], s.drift[0])


def test_linear_noise_drift_shift():
    assert eq(ito_to_stratonovich(make_sde(X, ["0"], [["x"]])).drift[0], "-x/2")
    assert eq(stratonovich_to_ito(make_sde(X, ["-x/2"], [["x"]], "stratonovich")).drift[0], "0")


def test_stratonovich_twin_reproduces_example_one():
    f = stratonovich_to_ito(make_sde(Y, ["exp(-y)"], [["exp(-y)"]], "stratonovich")).drift[0]
    assert eq(f, "exp(-y) - 1/2*exp(-2*y)")


def test_noise_copied_verbatim():
    s = make_sde(X, ["x"], [["x^2 + 1"]])
    assert ito_to_stratonovich(s).noise == s.noise


@given(st.integers(0, 10_000))
def test_round_trip_is_symbolically_exact(seed):
    import random

    s = random_sde(random.Random(seed), n=2, m=2)
    back = stratonovich_to_ito(ito_to_stratonovich(s))
    assert all(simplify(a) == simplify(b) for a, b in zip(back.drift, s.drift))
    strat = ito_to_stratonovich(s)
    again = ito_to_stratonovich(stratonovich_to_ito(strat))
    assert all(simplify(a) == simplify(b) for a, b in zip(again.drift, strat.drift))


def test_rho_vanishes_whenever_noise_is_state_free():
    for s in ito_strat_corpus(30, seed=4):
        free = all(not (e.free_vars() & set(s.space.state)) for row in s.noise for e in row)
        if free:
            assert all(r == Num(0) for r in rho(s).rho)


@pytest.mark.parametrize(
    "phi, sigma, space, expected",
    [("exp(-y)", "exp(-y)", Y, "exp(-3*y)"), ("w^2", "exp(-y)", Y, "2"), ("x - w", "1", X, "0")],
)
def test_ito_laplacian_oracles(phi, sigma, space, expected):
    sde = make_sde(space, ["0"], [[sigma]])
    assert eq(ito_laplacian(parse(phi), sde), expected)


@given(st.integers(0, 10_000))
def test_laplacian_of_deterministic_field_is_second_order_part(seed):
    import random

    from stochsym.corpus import random_coefficient
    from stochsym.expr import Add, Mul, differentiate

    rng = random.Random(seed)
    s = random_sde(rng, n=2, m=2)
    phi = parse(random_coefficient(rng, s.space.state))
    terms = []
    for k in range(s.space.m):
        for j, xj in enumerate(s.space.state):
            for l, xl in enumerate(s.space.state):
                terms.append(Mul((s.noise[j][k], s.noise[l][k], differentiate(differentiate(phi, xj), xl))))
    assert simplify(ito_laplacian(phi, s)) == simplify(Add(tuple(terms)))


def test_wiener_dependence_rejected():
    with pytest.raises(ValidationError):
        make_sde(X, ["w"], [["1"]])


def test_dimension_checks():
    with pytest.raises(DimensionMismatch):
        make_sde(X, ["x", "1"], [["1"]])
    with pytest.raises(DimensionMismatch):
        make_sde(X, ["x"], [["1", "2"]])


def test_unknown_calculus():
    with pytest.raises(ValidationError):
        make_sde(X, ["x"], [["1"]], "heun")


def test_as_ito_converts_only_stratonovich():
    s = make_sde(X, ["x"], [["x"]])
    assert as_ito(s) is s
    assert isinstance(as_ito(ito_to_stratonovich(s)), ItoSDE)

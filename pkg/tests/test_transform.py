import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from stochsym.corpus import example1, example2
from stochsym.errors import CompositionError, DimensionMismatch, DomainIncompatible, SymmetryPreconditionError, ValidationError
from stochsym.expr import Add, Domains, Neg, Num, VarSpace, is_zero, parse, simplify
from stochsym.sde_model import ito_to_stratonovich, make_sde
from stochsym.symmetry import VectorField, check_symmetry
from stochsym.transform import (
    SCRAMBLE_CATALOG,
    CoordinateChange,
    catalog_change,
    draw_params,
    make_scrambled_instance,
    pushforward,
    transform,
    transform_ito,
    transform_strat,
    verify_symmetry_preserved,
)

U, X, Y = VarSpace(("u",)), VarSpace(("x",)), VarSpace(("y",))
EXP = CoordinateChange(Y, ("x",), ("exp(y)",), ("log(x)",))
EX2 = CoordinateChange(Y, ("x",), ("1/(1+y^2)",), ("sqrt(1/x - 1)",))


def eq(a, b):
    return simplify(a) == simplify(parse(b) if isinstance(b, str) else b)


def zero_diff(a, b, domains=None):
    return is_zero(Add((a, Neg(b))), domains).is_zero


def test_example_one_becomes_dx_dt_plus_dw():
    out = transform_ito(example1().sde, EXP)
    assert out.drift == (Num(1),) and out.noise == ((Num(1),),)


def test_example_two_becomes_state_free():
    out = transform_ito(example2().sde, EX2)
    assert eq(out.drift[0], "exp(-t)") and eq(out.noise[0][0], "1")


def test_identity_change_leaves_equation_unchanged():
    s = example2().sde
    out = transform_ito(s, CoordinateChange.identity(Y))
    assert all(zero_diff(a, b) for a, b in zip(out.drift, s.drift))
    assert all(zero_diff(a, b) for a, b in zip(out.noise[0], s.noise[0]))


def test_square_of_brownian_motion():
    ch = CoordinateChange(X, ("z",), ("x^2",), ("sqrt(z)",))
    out = transform_ito(make_sde(X, ["0"], [["1"]]), ch)
    assert eq(out.drift[0], "1")
    assert eq(out.noise[0][0], "2*sqrt(z)")


def test_stratonovich_chain_rule():
    out = transform_strat(make_sde(Y, ["exp(-y)"], [["exp(-y)"]], "stratonovich"), EXP)
    assert out.drift == (Num(1),) and out.noise == ((Num(1),),)


def test_stratonovich_identity():
    s = make_sde(Y, ["sin(y)"], [["y"]], "stratonovich")
    out = transform_strat(s, CoordinateChange.identity(Y))
    assert out.drift == tuple(simplify(e) for e in s.drift)


def test_time_dependent_change():
    ch = CoordinateChange(X, ("z",), ("x*exp(-t)",), ("z*exp(t)",))
    out = transform_ito(make_sde(X, ["x"], [["1"]]), ch)
    assert eq(out.drift[0], "0")
    assert eq(out.noise[0][0], "exp(-t)")


@pytest.mark.parametrize("ex, ch", [(example1, EXP), (example2, EX2)])
def test_pushforward_is_unit_field(ex, ch):
    assert eq(pushforward(ex().field, ch).phi[0], "1")


def test_pushforward_identity():
    f = VectorField(Y, ("y^2 + t",))
    assert pushforward(f, CoordinateChange.identity(Y)).phi == (simplify(f.phi[0]),)


@pytest.mark.parametrize("ex, ch", [(example1, EXP), (example2, EX2)])
def test_symmetry_preserved_on_examples(ex, ch):
    before, after = verify_symmetry_preserved(ex().sde, ex().field, ch)
    assert before.is_symmetry and after.is_symmetry


def test_precondition_failure_is_distinct():
    with pytest.raises(SymmetryPreconditionError):
        verify_symmetry_preserved(make_sde(X, ["0"], [["1"]]), VectorField(X, ("x",)), CoordinateChange.identity(X))


def test_bad_inverse_is_rejected():
    ch = CoordinateChange(Y, ("x",), ("exp(y)",), ("log(x) + 1",))
    with pytest.raises(CompositionError):
        ch.validate()


def test_change_may_not_mention_wiener():
    with pytest.raises(ValidationError):
        CoordinateChange(Y, ("x",), ("y + w",), ("x - w",))


def test_charts_must_match_for_composition():
    with pytest.raises(DimensionMismatch):
        EXP.then(EXP)


# ---- properties over the catalog


KINDS = [k for k in SCRAMBLE_CATALOG]


@given(st.sampled_from(KINDS), st.sampled_from(KINDS), st.integers(0, 50), st.sampled_from(["ito", "stratonovich"]))
def test_functoriality(k1, k2, seed, calculus):
    base = make_sde(U, ["exp(-t)"], [["1 + t"]], calculus)
    ch1 = catalog_change(k1, U, "y", draw_params(k1, seed))
    c2 = catalog_change(k2, Y, "z", draw_params(k2, seed + 1))
    # second map lives on the image of the first; skip branch-incompatible pairs
    ch2 = CoordinateChange(Y, ("z",), c2.forward, c2.inverse, ch1.new_domains())
    try:
        ch2.validate()
    except (CompositionError, DomainIncompatible):
        assume(False)
    step = transform(transform(base, ch1), ch2)
    both = ch1.then(ch2)
    once = transform(base, both)
    dom = both.new_domains()
    for a, b in zip(step.drift + step.noise[0], once.drift + once.noise[0]):
        assert zero_diff(a, b, dom)


@given(st.sampled_from(KINDS), st.integers(0, 50))
def test_pushforward_round_trip(kind, seed):
    ch = catalog_change(kind, U, "y", draw_params(kind, seed))
    f = VectorField(U, ("u^2 + 1",))
    back = pushforward(pushforward(f, ch), ch.inverse_change())
    assert zero_diff(back.phi[0], f.phi[0])


@given(st.sampled_from(KINDS), st.integers(0, 50))
def test_naturality_square(kind, seed):
    ch = catalog_change(kind, U, "y", draw_params(kind, seed))
    s = make_sde(U, ["u*exp(-t)"], [["u"]])
    a = ito_to_stratonovich(transform_ito(s, ch))
    b = transform_strat(ito_to_stratonovich(s), ch)
    dom = ch.new_domains()
    assert zero_diff(a.drift[0], b.drift[0], dom)
    assert zero_diff(a.noise[0][0], b.noise[0][0], dom)


@given(st.sampled_from(KINDS), st.integers(0, 200))
def test_scrambled_instances_keep_their_symmetry(kind, seed):
    base = make_sde(U, ["exp(-t)"], [["1"]])
    sde, f, ch = make_scrambled_instance(base, kind, seed)
    assert check_symmetry(sde, f, _cfg(ch)).is_symmetry
    before, after = verify_symmetry_preserved(sde, f, ch.inverse_change())
    assert before.is_symmetry and after.is_symmetry


def _cfg(ch):
    from stochsym.expr import ZeroTestConfig

    return ZeroTestConfig(domains=ch.new_domains())


def test_scramble_example_one_backwards():
    base = make_sde(U, ["1"], [["1"]])
    ch = CoordinateChange(U, ("y",), ("log(u)",), ("exp(y)",), new_domain=Domains({"y": (0.3, 2.0)}))
    sde, f, _ = make_scrambled_instance(base, ch)
    ex = example1()
    assert all(zero_diff(a, b) for a, b in zip(sde.drift, ex.sde.drift))
    assert zero_diff(sde.noise[0][0], ex.sde.noise[0][0])
    assert zero_diff(f.phi[0], ex.field.phi[0])


def test_scramble_example_two_family():
    base = make_sde(U, ["exp(-t)"], [["1"]])
    ch = CoordinateChange(U, ("y",), ("sqrt(1/u - 1)",), ("1/(1+y^2)",), new_domain=Domains({"y": (0.3, 2.0)}))
    sde, f, _ = make_scrambled_instance(base, ch)
    ex = example2()
    assert zero_diff(sde.drift[0], ex.sde.drift[0])
    assert zero_diff(sde.noise[0][0], ex.sde.noise[0][0])
    assert zero_diff(f.phi[0], ex.field.phi[0])


def test_scramble_identity_is_a_no_op():
    base = make_sde(U, ["exp(-t)"], [["1"]])
    sde, f, _ = make_scrambled_instance(base, "identity")
    assert sde.drift == (simplify(parse("exp(-t)")),)
    assert f.phi == (Num(1),)


def test_scramble_rejects_state_dependent_base():
    with pytest.raises(ValidationError):
        make_scrambled_instance(make_sde(U, ["u"], [["1"]]), "exp")


def test_scramble_is_deterministic():
    base = make_sde(U, ["1"], [["exp(-t)"]])
    assert make_scrambled_instance(base, "mobius", 7)[0] == make_scrambled_instance(base, "mobius", 7)[0]


def test_unknown_catalog_entry():
    with pytest.raises(ValidationError):
        catalog_change("cubic", U, "y")


def test_derived_domain_of_image():
    lo, hi = EXP.new_domains().interval("x")
    # exp maps [0.3, 2] onto [1.35, 7.39]; the derived box is padded inward
    assert 1.35 < lo < 1.45 and 7.2 < hi < 7.39

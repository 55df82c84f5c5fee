from fractions import Fraction

import pytest
from hypothesis import given

from stochsym.expr import (
    Add,
    Dec,
    ExprSyntaxError,
    Func,
    Mul,
    Neg,
    Num,
    Pow,
    UnknownIdentifierError,
    Var,
    VarSpace,
    identifiers,
    parse,
    simplify,
)
from strategies import expressions

Y = VarSpace(("y",))


def test_example_drift_parses_to_expected_tree():
    e = parse("exp(-y) - 1/2*exp(-2*y)", Y)
    assert simplify(e) == simplify(
        Add((Func("exp", Neg(Var("y"))), Neg(Mul((Num(Fraction(1, 2)), Func("exp", Mul((Num(-2), Var("y")))))))))
    )


def test_zero_literal():
    assert parse("0") == Num(0)


def test_quotient_round_trip():
    e = parse("x^2/(1+x^2)")
    assert simplify(parse(str(e))) == simplify(e)


def test_precedence_power_binds_tighter_than_unary_minus():
    assert simplify(parse("-2^2")) == Num(-4)


def test_power_is_right_associative():
    assert simplify(parse("2^3^2")) == Num(512)


def test_rationals_in_lowest_terms():
    e = simplify(parse("6/(-4)"))
    assert e == Num(Fraction(-3, 2))
    assert e.value.denominator > 0


def test_decimals_are_kept_apart_from_rationals():
    assert isinstance(parse("0.5"), Dec)


def test_whitespace_is_insignificant():
    assert parse(" x *  ( 1+ y ) ") == parse("x*(1+y)")


def test_syntax_error_reports_position():
    with pytest.raises(ExprSyntaxError, match="position"):
        parse("x + * y")


def test_unknown_identifier_is_named():
    with pytest.raises(UnknownIdentifierError, match="z"):
        parse("x + z", VarSpace(("x",)))


def test_identifiers_skip_functions():
    assert identifiers("exp(-y) + x*sin(t)") == ["y", "x", "t"]


def test_pow_node_shape():
    e = parse("y^(1/2)")
    assert isinstance(e, Pow)


@given(expressions())
def test_print_parse_fixed_point(e):
    try:
        s = simplify(e)
    except ZeroDivisionError:
        return
    assert simplify(parse(str(s))) == s

import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from connforge import parse
from connforge.calculus.expr import ScalarExpr
from connforge.exceptions import (CoordinateRangeError, EvaluationError, ExpressionSyntaxError,
                                  UnknownSymbolError)

LEAVES = st.sampled_from(["x1", "x2", "x3", "1", "2", "0.5"])


def _extend(children):
    pair = st.tuples(children, children)
    return st.one_of(
        pair.map(lambda p: f"({p[0]}) + ({p[1]})"),
        pair.map(lambda p: f"({p[0]}) - ({p[1]})"),
        pair.map(lambda p: f"({p[0]}) * ({p[1]})"),
        pair.map(lambda p: f"({p[0]}) / (2 + ({p[1]})^2)"),
        LEAVES.map(lambda c: f"({c})^3"),
        children.map(lambda c: f"exp(({c}) / 4)"),
        children.map(lambda c: f"sin({c})"),
        children.map(lambda c: f"cos({c})"),
    )


EXPRESSIONS = st.recursive(LEAVES, _extend, max_leaves=6)
POINTS = st.tuples(*[st.floats(min_value=-1, max_value=1, allow_nan=False)] * 3)
INDICES = st.integers(min_value=1, max_value=3)


def test_parse_zero_is_constant_zero():
    e = parse("0", 2)
    assert e.is_constant
    assert e.eval((0.3, -0.2)) == 0.0


def test_parse_exp_at_origin():
    assert parse("exp(2*x1)", 4).eval((0, 0, 0, 0)) == 1.0


def test_parse_power_times_sine():
    assert parse("x1^2 * sin(x2)", 2).eval((2, math.pi / 2)) == pytest.approx(4.0, abs=1e-15)


def test_eval_sum():
    assert parse("x1+x2", 2).eval((1, 2)) == 3.0


def test_eval_exp_matches_reference():
    assert parse("exp(2*x1)", 4).eval((0.5, 0, 0, 0)) == pytest.approx(math.e, rel=1e-15)


def test_eval_division_by_zero_is_reported():
    with pytest.raises(EvaluationError) as info:
        parse("1/x1", 2).eval((0, 1))
    assert info.value.kind == "division-by-zero"


def test_eval_rejects_wrong_point_length():
    with pytest.raises(ValueError):
        parse("x1", 2).eval((1.0,))


def test_whitespace_and_leading_sign():
    assert parse("  - exp( 2 * x1 ) ", 2).eval((0, 0)) == -1.0
    assert parse("x1^(-2)", 1).eval((2,)) == 0.25
    assert parse("x1^-1", 1).eval((4,)) == 0.25


def test_syntax_error_reports_position():
    with pytest.raises(ExpressionSyntaxError) as info:
        parse("x1 + * x2", 2)
    assert info.value.position == 5


def test_unbalanced_parenthesis():
    with pytest.raises(ExpressionSyntaxError):
        parse("(x1 + x2", 2)


def test_non_integer_exponent_is_rejected():
    with pytest.raises(ExpressionSyntaxError):
        parse("x1^0.5", 2)


def test_unknown_symbol():
    with pytest.raises(UnknownSymbolError) as info:
        parse("y + 1", 2)
    assert info.value.position == 0


def test_coordinate_out_of_range():
    with pytest.raises(CoordinateRangeError):
        parse("x3", 2)
    with pytest.raises(CoordinateRangeError):
        parse("x0", 2)


def test_constant_division_by_zero_is_reported_at_eval():
    e = parse("1/(2-2)", 2)
    with pytest.raises(EvaluationError) as info:
        e.eval((0.0, 0.0))
    assert info.value.kind == "division-by-zero"


@pytest.mark.parametrize("text", ["x1/x1", "sin(x1)/sin(x1)", "x2*x1/x1", "1/(x1-x1)"])
def test_removable_poles_are_not_cancelled(text):
    e = parse(text, 2)
    with pytest.raises(EvaluationError) as info:
        e.eval((0.0, 1.0))
    assert info.value.kind == "division-by-zero"


def test_removable_pole_evaluates_away_from_the_pole():
    assert parse("x2*x1/x1", 2).eval((0.5, 3.0)) == 3.0
    assert parse("x1 - x1 + 2", 2).eval((0.25, 0.0)) == 2.0


def test_coordinate_index_has_one_spelling():
    with pytest.raises(UnknownSymbolError):
        parse("x01", 2)
    with pytest.raises(UnknownSymbolError):
        parse("x1 + x002", 2)


def test_diff_of_constant_is_zero():
    for i in (1, 2):
        d = parse("7", 2).diff(i)
        assert d.is_constant and d.eval((0.1, 0.2)) == 0.0


def test_diff_power_rule():
    assert parse("x1^2", 2).diff(1).eval((3, 0)) == 6.0


def test_diff_product_with_exponential():
    assert parse("exp(2*x1)*x2", 2).diff(1).eval((0, 5)) == pytest.approx(10.0, abs=1e-12)


def test_diff_index_out_of_range():
    with pytest.raises(ValueError):
        parse("x1", 2).diff(3)
    with pytest.raises(ValueError):
        parse("x1", 2).diff(0)


def test_diff_is_closed():
    d = parse("sin(x1) * x2", 2).diff(1).diff(2)
    assert isinstance(d, ScalarExpr)
    assert d.eval((0.0, 3.0)) == pytest.approx(1.0)


def test_printing_round_trips():
    for text in ("exp(2*x1)*x2^3", "-x1/(2 + x2^2)", "sin(x1)^(-2) + 0.5", "exp(1)"):
        e = parse(text, 2)
        again = parse(str(e), 2)
        assert again.eval((0.3, 0.7)) == pytest.approx(e.eval((0.3, 0.7)), rel=1e-15)


def test_free_coordinates():
    assert parse("x1 * cos(x3)", 3).free_coordinates() == frozenset({1, 3})
    assert parse("2", 3).free_coordinates() == frozenset()


def _value(e, point):
    try:
        value = e.eval(point)
    except EvaluationError:
        value = math.inf
    assume(abs(value) < 1e3)
    return value


@settings(max_examples=200, deadline=None)
@given(text=EXPRESSIONS, point=POINTS, i=INDICES)
def test_derivative_matches_central_difference(text, point, i):
    e = parse(text, 3)
    _value(e, point)
    h = 1e-5
    forward = list(point)
    backward = list(point)
    forward[i - 1] += h
    backward[i - 1] -= h

    exact = e.diff(i).eval(point)
    approximate = (e.eval(forward) - e.eval(backward)) / (2 * h)

    assert abs(exact - approximate) <= 1e-5 * (1 + abs(exact))


@settings(max_examples=100, deadline=None)
@given(text=EXPRESSIONS, point=POINTS, i=INDICES, j=INDICES)
def test_mixed_partials_commute(text, point, i, j):
    e = parse(text, 3)
    _value(e, point)
    a = e.diff(i).diff(j).eval(point)
    b = e.diff(j).diff(i).eval(point)
    assert abs(a - b) <= 1e-9 * (1 + abs(a))

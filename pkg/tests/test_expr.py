import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from orliczvar.expr import Expression, ExpressionError, compile_expression


@pytest.mark.parametrize("text, value", [
    ("1+2*3", 7.0),
    ("2^3^2", 512.0),        # right associative
    ("-2^2", -4.0),          # power binds tighter than unary minus
    ("(1+2)/4", 0.75),
    ("sqrt(16) + ln(1)", 4.0),
    ("exp(0) + abs(-3) + sign(-2)", 3.0),
    ("2*pi", 2 * math.pi),
    ("1.5e2", 150.0),
])
def test_constant_expressions(text, value):
    assert compile_expression(text, ())() == pytest.approx(value, rel=1e-15)


def test_variables_broadcast():
    e = compile_expression("x + 10*y + 100*s", ("x", "y", "s"))
    out = e(x=np.array([1.0, 2.0]), y=3.0, s=np.array([[0.0], [1.0]]))
    assert out.shape == (2, 2)
    assert out[1, 0] == 131.0


def test_scalar_input_gives_float():
    assert isinstance(Expression("t^2")(t=3.0), float)


@pytest.mark.parametrize("text", [
    "t**2",                       # only ^ is a power
    "__import__('os')",
    "t.real",
    "foo(t)",
    "z + 1",
    "lambda: 1",
    "'a'",
    "t[0]",
    "t if t else 1",
    "1 +",
    "",
    "t == 1",
])
def test_rejects_outside_grammar(text):
    with pytest.raises(ExpressionError):
        compile_expression(text, ("t",))


def test_missing_variable_value():
    e = compile_expression("t + s", ("t", "s"))
    with pytest.raises(ExpressionError):
        e(t=1.0)


@given(st.floats(-50, 50), st.floats(-50, 50))
def test_matches_python_arithmetic(a, b):
    e = compile_expression("a*b - a/(1 + b^2) + abs(a)^0.5", ("a", "b"))
    expected = a * b - a / (1 + b * b) + abs(a) ** 0.5
    assert e(a=a, b=b) == pytest.approx(expected, rel=1e-12, abs=1e-12)

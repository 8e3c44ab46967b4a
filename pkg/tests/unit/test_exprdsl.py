from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

try:
    from bitensionlab.errors import ExprSyntaxError, SingularCompose, UnboundVariable, UnknownFunction
    from bitensionlab.exprdsl import (
        BinOp,
        MAX_DEPTH,
        Neg,
        Num,
        Var,
        derivative,
        eval_constant,
        eval_expr,
        eval_value,
        free_variables,
        parse_expr,
        to_text,
    )
    from bitensionlab.jets import coordinate_jets, jet_extract
except Exception:
    from src.bitensionlab.errors import ExprSyntaxError, SingularCompose, UnboundVariable, UnknownFunction  # type: ignore
    from src.bitensionlab.exprdsl import (  # type: ignore
        BinOp,
        MAX_DEPTH,
        Neg,
        Num,
        Var,
        derivative,
        eval_constant,
        eval_expr,
        eval_value,
        free_variables,
        parse_expr,
        to_text,
    )
    from src.bitensionlab.jets import coordinate_jets, jet_extract  # type: ignore


def test_precedence_and_associativity() -> None:
    """Prefix minus binds looser than ^, and ^ is right associative."""
    assert eval_value(parse_expr("-x^2"), {"x": 2.0}) == pytest.approx(-4.0)
    assert eval_constant(parse_expr("2^3^2")) == pytest.approx(512.0)
    assert eval_constant(parse_expr("1 - 2 - 3")) == pytest.approx(-4.0)
    assert eval_constant(parse_expr("8/4/2")) == pytest.approx(1.0)
    assert eval_constant(parse_expr("2^-1")) == pytest.approx(0.5)


def test_tree_shape() -> None:
    e = parse_expr("a + b*c")
    assert e == BinOp("+", Var("a"), BinOp("*", Var("b"), Var("c")))
    assert parse_expr("-(x)") == Neg(Var("x"))
    assert parse_expr("pi") == Num(math.pi)


@pytest.mark.parametrize(
    "text",
    [
        "x + y*z",
        "(x + y)*z",
        "-x^2",
        "(-x)^2",
        "x^(y^z)",
        "(x^y)^z",
        "x - (y - z)",
        "x/(y*z)",
        "sin(x)*cos(y) + exp(-x/2)",
        "sqrt(1 + x^2)/ln(2 + y)",
    ],
)
def test_printer_reparses_to_same_tree(text: str) -> None:
    """to_text output parses back to an identical tree."""
    e = parse_expr(text)
    assert parse_expr(to_text(e)) == e, f"{text!r} printed as {to_text(e)!r}"


def test_syntax_error_offsets() -> None:
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("x + * y")
    assert info.value.offset == 5
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("(x + y")
    assert info.value.offset == 7, "end of input is one past the last byte"
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("sin(u")
    assert info.value.offset == 6
    with pytest.raises(ExprSyntaxError):
        parse_expr("x $ y")


def test_unknown_function() -> None:
    with pytest.raises(UnknownFunction) as info:
        parse_expr("1 + cosh(x)")
    assert info.value.name == "cosh"
    assert info.value.offset == 5


def test_unbound_variable() -> None:
    with pytest.raises(UnboundVariable):
        eval_value(parse_expr("x + z"), {"x": 1.0})


def test_singular_constant() -> None:
    with pytest.raises(SingularCompose):
        eval_constant(parse_expr("ln(0)"))
    with pytest.raises(SingularCompose):
        eval_constant(parse_expr("1/(2 - 2)"))


def test_free_variables() -> None:
    assert free_variables(parse_expr("u1*sin(u2) + pi")) == frozenset({"u1", "u2"})


def test_eval_expr_lifts_constants() -> None:
    """Constant expressions become constant jets of the environment's order."""
    x, y = coordinate_jets((0.1, 0.2), 3)
    j = eval_expr(parse_expr("2*pi"), {"x": x, "y": y})
    assert j.order == 3
    assert j.value == pytest.approx(2.0 * math.pi)
    assert np.allclose(j.coeffs[1:], 0.0)


@pytest.mark.parametrize(
    "text",
    ["x^3*y", "sin(x*y)/(2 + cos(x))", "exp(x)*ln(3 + y^2)", "sqrt(4 + x*y)", "x^y", "tan(x/3)"],
)
def test_symbolic_derivative_matches_jets(text: str) -> None:
    """derivative() and jet differentiation agree on values and first partials."""
    e = parse_expr(text)
    p = (0.6, 0.8)
    x, y = coordinate_jets(p, 2)
    env = {"x": x, "y": y}
    jet = eval_expr(e, env)
    for name, mi in (("x", (1, 0)), ("y", (0, 1))):
        d = eval_value(derivative(e, name), {"x": p[0], "y": p[1]})
        assert float(d) == pytest.approx(jet_extract(jet, mi), rel=1e-12, abs=1e-12)
    dxy = eval_expr(derivative(derivative(e, "x"), "y"), env)
    assert float(dxy.value) == pytest.approx(jet_extract(jet, (1, 1)), rel=1e-10, abs=1e-12)


def test_bytes_input_must_be_utf8() -> None:
    with pytest.raises(ExprSyntaxError):
        parse_expr(b"x + \xff")
    assert parse_expr(b"x + 1") == BinOp("+", Var("x"), Num(1.0))


# ───────────── totality ─────────────


@pytest.mark.parametrize(
    "text",
    ["(" * 3000 + "x" + ")" * 3000, "-" * 5000 + "x", "(" * 3000, "2^" * 3000 + "x"],
)
def test_deep_nesting_is_a_syntax_error(text: str) -> None:
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr(text)
    assert 1 <= info.value.offset <= len(text) + 1
    assert "nested" in str(info.value)


def test_nesting_below_the_limit_parses() -> None:
    depth = MAX_DEPTH - 5
    assert parse_expr("(" * depth + "x" + ")" * depth) == Var("x")


@settings(max_examples=300, deadline=None)
@given(st.binary(max_size=64))
def test_parser_is_total_on_bytes(data: bytes) -> None:
    """Any input yields a tree or a syntax error that points inside the input."""
    try:
        parse_expr(data)
    except ExprSyntaxError as exc:
        assert 1 <= exc.offset <= len(data) + 1


@settings(max_examples=300, deadline=None)
@given(st.text(alphabet="xy0123456789.e+-*/^() sincoexpl", max_size=48))
def test_parser_is_total_on_expression_alphabet(text: str) -> None:
    try:
        parse_expr(text)
    except ExprSyntaxError as exc:
        assert 1 <= exc.offset <= len(text.encode("utf-8")) + 1

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fredholm_lattice.expr import (BinOp, Call, Compare, EvaluationError, Neg, Num,
                                   ParseError, Pi, Piecewise, Var, evaluate,
                                   evaluate_array, free_variables, parse, unparse)

EXAMPLE_F = "piecewise(t < 1/2 -> t^4/6, else -> t^3/5)"
EXAMPLE_K = "4*t^7*sin(pi/2*s)^9"


def test_parse_power_over_number():
    assert parse("t^3/5", {"t"}) == BinOp("/", BinOp("^", Var("t"), Num(3.0)), Num(5.0))


def test_parse_example_kernel():
    ast = parse(EXAMPLE_K, {"t", "s"})
    assert free_variables(ast) == {"t", "s"}
    # the power applies to the call, not to its argument
    assert ast.op == "*" and ast.right.op == "^"
    assert isinstance(ast.right.left, Call) and ast.right.left.name == "sin"


def test_unbalanced_paren_position():
    with pytest.raises(ParseError) as err:
        parse("sin(", {"t"})
    assert err.value.position == 4


@pytest.mark.parametrize("source, position", [
    ("t + s", 4),
    ("4t", 1),
    ("t +", 3),
    ("(t", 2),
    ("t $ 1", 2),
])
def test_syntax_errors_report_position(source, position):
    with pytest.raises(ParseError) as err:
        parse(source, {"t"})
    assert err.value.position == position


@pytest.mark.parametrize("source", [
    "piecewise()",
    "piecewise(t < 1 -> 0)",
    "piecewise(t < 1 -> 0, t > 2 -> 1)",
    "piecewise(else -> 1)",
    "piecewise(t -> 1, else -> 0)",
])
def test_bad_piecewise(source):
    with pytest.raises(ParseError):
        parse(source, {"t"})


def test_function_arity():
    with pytest.raises(ParseError):
        parse("sin(t, t)", {"t"})
    with pytest.raises(ParseError):
        parse("max(t)", {"t"})
    assert parse("max(t, 1, 2)", {"t"}) == Call("max", (Var("t"), Num(1.0), Num(2.0)))


def test_precedence():
    assert parse("-t^2", {"t"}) == Neg(BinOp("^", Var("t"), Num(2.0)))
    assert parse("2^3^2", set()) == BinOp("^", Num(2.0), BinOp("^", Num(3.0), Num(2.0)))
    assert parse("1-2-3", set()) == BinOp("-", BinOp("-", Num(1.0), Num(2.0)), Num(3.0))
    assert parse("2^-1", set()) == BinOp("^", Num(2.0), Neg(Num(1.0)))
    assert evaluate(parse("2^3^2", set()), 0.0) == 512.0
    assert evaluate(parse("-2^2", set()), 0.0) == -4.0
    assert evaluate(parse("8/4/2", set()), 0.0) == 1.0


def test_evaluate_basic():
    assert evaluate(parse("t+1", {"t"}), 2.0) == 3.0


def test_evaluate_example_kernel_corner():
    assert evaluate(parse(EXAMPLE_K, {"t", "s"}), 1.0, 1.0) == 4.0


def test_evaluate_example_f_at_jump():
    f = parse(EXAMPLE_F, {"t"})
    assert evaluate(f, 0.5) == 0.5 ** 3 / 5
    assert evaluate(f, 0.5) == pytest.approx(0.025, abs=1e-17)
    assert evaluate(f, 0.25) == 0.25 ** 4 / 6


@pytest.mark.parametrize("source, t", [
    ("log(t)", 0.0),
    ("1/t", 0.0),
    ("sqrt(t - 1)", 0.5),
    ("t^0.5", -1.0),
    ("exp(t)", 1000.0),
])
def test_domain_errors_name_subexpression(source, t):
    with pytest.raises(EvaluationError) as err:
        evaluate(parse(source, {"t"}), t)
    assert unparse(err.value.subexpr) in source.replace(" ", "")


def test_unbound_variable():
    with pytest.raises(EvaluationError):
        evaluate(parse("t*s", {"t", "s"}), 1.0)


def test_lazy_piecewise_arms():
    # the log arm is never evaluated where its guard fails
    f = parse("piecewise(t > 0 -> log(t), else -> 0)", {"t"})
    assert evaluate(f, 0.0) == 0.0
    np.testing.assert_array_equal(evaluate_array(f, np.array([0.0, 1.0])), [0.0, 0.0])


@pytest.mark.parametrize("op, at_boundary", [("<", 2), ("<=", 1), (">", 2), (">=", 1)])
def test_piecewise_boundary_follows_comparison(op, at_boundary):
    f = parse(f"piecewise(t {op} 1 -> 1, else -> 2)", {"t"})
    assert evaluate(f, 1.0) == at_boundary


def test_guard_override_picks_one_sided_limit():
    f = parse(EXAMPLE_F, {"t"})
    t = np.array([0.5])
    left = evaluate_array(f, t, guard_t=np.nextafter(t, -np.inf))
    assert left[0] == 0.5 ** 4 / 6


def test_scalar_and_array_paths_agree():
    K = parse(EXAMPLE_K, {"t", "s"})
    t = np.linspace(0, 1, 7)
    grid = evaluate_array(K, t[:, None], t[None, :])
    for i, ti in enumerate(t):
        for j, sj in enumerate(t):
            assert evaluate(K, ti, sj) == grid[i, j]


def test_unparse_minimal_parentheses():
    assert unparse(parse("(t^3)/5", {"t"})) == "t^3/5"
    assert unparse(parse("(1-t)^7", {"t"})) == "(1-t)^7"
    assert unparse(parse("-(t*2)", {"t"})) == "-(t*2)"
    assert unparse(parse("1-(2-3)", set())) == "1-(2-3)"
    assert unparse(parse(EXAMPLE_K, {"t", "s"})) == EXAMPLE_K
    assert unparse(parse(EXAMPLE_F, {"t"})) == EXAMPLE_F


# -- round trip --------------------------------------------------------------

numbers = st.floats(min_value=0, max_value=1e6, allow_nan=False, allow_infinity=False).map(Num)
leaves = st.one_of(numbers, st.sampled_from([Var("t"), Var("s"), Pi()]))


def _extend(children):
    binop = st.builds(BinOp, st.sampled_from(["+", "-", "*", "/", "^"]), children, children)
    call1 = st.builds(lambda n, a: Call(n, (a,)),
                      st.sampled_from(["sin", "cos", "exp", "log", "abs", "sqrt"]), children)
    call2 = st.builds(lambda n, a, b: Call(n, (a, b)), st.sampled_from(["min", "max"]),
                      children, children)
    compare = st.builds(Compare, st.sampled_from(["<", "<=", ">", ">="]), children, children)
    pw = st.builds(lambda arms, other: Piecewise(tuple(arms), other),
                   st.lists(st.tuples(compare, children), min_size=1, max_size=3), children)
    return st.one_of(binop, st.builds(Neg, children), call1, call2, pw)


expressions = st.recursive(leaves, _extend, max_leaves=12)


@given(expressions)
def test_unparse_parse_round_trip(ast):
    assert parse(unparse(ast), {"t", "s"}) == ast


@given(st.floats(min_value=-3, max_value=3), st.floats(min_value=-3, max_value=3))
def test_evaluation_is_deterministic(t, s):
    K = parse("piecewise(t < s -> exp(t)*cos(s), else -> min(t, s)^2)", {"t", "s"})
    a = evaluate(K, t, s)
    b = evaluate(K, t, s)
    assert math.copysign(1, a) == math.copysign(1, b) and a == b

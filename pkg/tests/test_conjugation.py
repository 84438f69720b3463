import numpy as np
from hypothesis import given, settings, strategies as st

from conftest import constant_spec, example_spec
from fredholm_lattice.conjugation import (conjugate, negate_expr, reflect_class,
                                          reflect_problem, reflect_solution)
from fredholm_lattice.expr import Neg, Var, unparse
from fredholm_lattice.grid import FunctionClass, GridFunction, in_class, sample
from fredholm_lattice.operator import apply_T, check_hypotheses
from fredholm_lattice.problem import ProblemFile, dump_text
from fredholm_lattice.solver import solve


def test_lambda_zero_reflection(example):
    r = reflect_problem(example.with_(lam=0.0))
    assert r.lam == 0.0 and str(r.lam) == "0.0"
    g = example.grid(11)
    assert sample(r.f_expr, g) == -sample(example.f_expr, g)


def test_example_constants(example):
    r = reflect_problem(example)
    assert (r.lam, r.kappa, r.mu, r.rho) == (-0.2, -2.0, -0.2, -4.0)
    assert (r.monotone, r.semicontinuity, r.sign) == ("or", "lsc", "nonpos")
    assert unparse(r.K_expr) == "-(4*t^7*sin(pi/2*s)^9)"


def test_reflected_example_passes_hypotheses(example):
    report = check_hypotheses(reflect_problem(example), example.grid(201))
    assert report.passed and abs(report.margin_value - 0.2) < 1e-12


def test_involution_is_exact(example):
    assert reflect_problem(reflect_problem(example)) == example
    pair = conjugate(example)
    assert reflect_problem(pair.reflected) == pair.original
    assert negate_expr(negate_expr(Var("t"))) == Var("t")
    assert negate_expr(Neg(Var("t"))) == Var("t")


def test_class_transport():
    cls = FunctionClass("op", "usc", "nonneg", 2.0)
    assert reflect_class(cls) == FunctionClass("or", "lsc", "nonpos", -2.0)
    assert reflect_class(reflect_class(cls)) == cls
    g = example_spec().grid(51)
    phi = sample(example_spec().f_expr, g)
    assert in_class(reflect_solution(phi), reflect_class(cls))


def test_zero_and_constant_solution():
    g = constant_spec().grid(11)
    zero = GridFunction.constant(g, 0.0)
    assert reflect_solution(zero) == zero
    res = solve(reflect_problem(constant_spec()), n=11)
    np.testing.assert_allclose(res.phi_max.values, -2.0, atol=1e-8)


def test_reflected_file_round_trip(example):
    once = dump_text(ProblemFile(reflect_problem(example)))
    twice = dump_text(ProblemFile(reflect_problem(reflect_problem(example))))
    assert twice == dump_text(ProblemFile(example))
    assert once != twice


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 0.3), st.floats(0.5, 3.0),
       st.lists(st.floats(0, 1), min_size=31, max_size=31))
def test_apply_T_commutes_with_reflection(lam, kappa, steps):
    spec = example_spec(lam=lam, kappa=kappa)
    g = spec.grid(31)
    phi = GridFunction(g, np.cumsum(steps) / 31 * kappa)
    lhs = apply_T(reflect_problem(spec), -phi).values
    rhs = -apply_T(spec, phi).values
    scale = max(1.0, np.max(np.abs(rhs)))
    assert np.max(np.abs(lhs - rhs)) <= 1e-13 * scale

"""Minimum and maximum monotone solutions of Fredholm equations of the second kind.

``phi(t) = f(t) + lam * int_a^b K(t, s) phi(s) ds`` is solved on a uniform grid
by monotone bracketing iteration from the bottom and top of a bounded
monotone function class, with a Nystrom dense solve as an independent check.
"""
from .expr import ParseError, EvaluationError, parse, unparse, evaluate
from .grid import FunctionClass, Grid, GridFunction, in_class, leq, pointwise_inf, pointwise_sup, sample
from .operator import ProblemSpec, Quadrature, apply_T, check_hypotheses, trapezoid_weights
from .solver import SolverConfig, SolveResult, certify, solve, uniqueness_margin
from .oracle import assemble, solve_linear
from .conjugation import reflect_problem, reflect_solution
from .kernels import BACKEND

__version__ = "0.1.0"

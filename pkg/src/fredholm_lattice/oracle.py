"""Nystrom reference solver.

Collocating the equation at the quadrature nodes gives the dense system
``(I - lam * K W) v = f``.  With the trapezoid rule the system is the same
discretisation the lattice iteration uses, so its solution is an exact
discrete fixed point up to linear-solve error; the Gauss-Legendre variant
measures distance to the continuum solution instead.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import warnings

import numpy as np
import scipy.linalg

from .expr import evaluate_array
from .grid import Grid, GridFunction, sample, sample_kernel
from .operator import ProblemSpec, Quadrature, trapezoid_weights

__all__ = ["DenseSystem", "SingularSystemError", "assemble", "solve_linear",
           "oracle_solution", "gauss_legendre_solution"]

SINGULAR_PIVOT = 1e-14
RESIDUAL_TOL = 1e-10


class SingularSystemError(ArithmeticError):
    """Pivot below ``1e-14 * ||A||_inf``: lambda is near a characteristic value."""


@dataclass(frozen=True)
class DenseSystem:
    matrix: np.ndarray
    rhs: np.ndarray
    grid: Optional[Grid] = None


def assemble(spec: ProblemSpec, grid: Grid, quad: Optional[Quadrature] = None) -> DenseSystem:
    """``A_ij = delta_ij - lam * w_j * K(t_i, s_j)``, ``rhs_i = f(t_i)``."""
    quad = quad or trapezoid_weights(grid)
    if quad.grid != grid:
        raise ValueError("quadrature and grid disagree")
    K = sample_kernel(spec.K_expr, grid)
    A = np.eye(grid.n) - spec.lam * K * quad.weights[None, :]
    rhs = sample(spec.f_expr, grid).values.copy()
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(rhs))):
        raise ValueError("non-finite entries in the Nystrom system")
    return DenseSystem(A, rhs, grid)


def _lu_solve(A: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    norm = np.max(np.sum(np.abs(A), axis=1))
    with warnings.catch_warnings():
        # an exactly zero pivot is reported below as SingularSystemError
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    smallest = np.min(np.abs(np.diag(lu)))
    if smallest < SINGULAR_PIVOT * norm:
        raise SingularSystemError(
            f"pivot {smallest:.3g} below {SINGULAR_PIVOT:g} * ||A||_inf = {SINGULAR_PIVOT * norm:.3g}")
    v = scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)
    # one step of iterative refinement keeps the residual well under tolerance
    v += scipy.linalg.lu_solve((lu, piv), rhs - A @ v, check_finite=False)
    return v


def solve_linear(system: DenseSystem) -> GridFunction:
    """Partial-pivoting Gaussian elimination (LAPACK getrf) with a residual check."""
    A, rhs = system.matrix, system.rhs
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] != rhs.shape[0]:
        raise ValueError(f"need a square system, got {A.shape} and {rhs.shape}")
    v = _lu_solve(A, rhs)
    res = np.max(np.abs(A @ v - rhs))
    bound = RESIDUAL_TOL * (1 + np.max(np.abs(rhs)))
    if res > bound:
        raise SingularSystemError(f"residual {res:.3g} exceeds {bound:.3g}")
    grid = system.grid or Grid(0.0, 1.0, len(rhs))
    return GridFunction(grid, v)


def oracle_solution(spec: ProblemSpec, n: int = 1001) -> GridFunction:
    grid = spec.grid(n)
    return solve_linear(assemble(spec, grid))


def gauss_legendre_solution(spec: ProblemSpec, grid: Grid, m: int = 64) -> GridFunction:
    """Solve at ``m`` Gauss-Legendre nodes, then Nystrom-interpolate onto ``grid``.

    ``phi(t) = f(t) + lam * sum_j w_j K(t, x_j) phi_j`` is the natural
    interpolant; it is exact at the collocation nodes.
    """
    x, w = np.polynomial.legendre.leggauss(m)
    half = (spec.b - spec.a) / 2
    nodes = spec.a + half * (x + 1)
    weights = half * w
    K = evaluate_array(spec.K_expr, nodes[:, None], nodes[None, :])
    A = np.eye(m) - spec.lam * K * weights[None, :]
    rhs = evaluate_array(spec.f_expr, nodes)
    phi_nodes = _lu_solve(A, rhs)
    t = grid.nodes
    Kt = evaluate_array(spec.K_expr, t[:, None], nodes[None, :])
    values = evaluate_array(spec.f_expr, t) + spec.lam * (Kt * weights[None, :]) @ phi_nodes
    return GridFunction(grid, values)

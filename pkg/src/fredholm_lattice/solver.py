"""Extremal solutions by monotone bracketing iteration.

The minimum solution is the infimum of the pre-fixed points ``{phi : T phi <= phi}``
and the maximum solution the supremum of the post-fixed points
``{phi : phi <= T phi}``.  Those formulas are not an algorithm; on a grid,
``T`` is a finite-dimensional order-preserving map that is continuous in
every node value, so Kleene iteration from the class bottom increases to the
least fixed point and iteration from the class top decreases to the greatest
one.  Every low iterate sits below every solution in the class and every high
iterate above, which is what :func:`solve` returns as a bracket.

Floating-point sums are monotone in their inputs only up to rounding, so the
invariants are asserted with a slack of a few ulps of ``kappa``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .conjugation import reflect_problem, reflect_solution
from .grid import GridFunction, class_violation, sup_norm
from .operator import (DiscreteOperator, HypothesisReport, ProblemSpec, Quadrature,
                       check_hypotheses, trapezoid_weights)

__all__ = [
    "SolverConfig", "SolveResult", "Certificate", "HypothesisError",
    "InvariantViolation", "IterateEscapedError", "solve", "certify",
    "uniqueness_margin", "refinement_delta", "roundoff_slack",
]

log = logging.getLogger(__name__)


class HypothesisError(ValueError):
    """The existence hypotheses fail; ``report`` says which."""

    def __init__(self, report: HypothesisReport):
        super().__init__("hypotheses fail: " + ", ".join(report.failed))
        self.report = report


class InvariantViolation(AssertionError):
    pass


class IterateEscapedError(RuntimeError):
    """A forced run produced an iterate outside the bounded class."""


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-9
    max_iter: int = 10_000
    force: bool = False
    unique_tol: Optional[float] = None  # defaults to 10 * tol
    check_invariants: bool = True
    keep_trace: bool = True
    threads: Optional[int] = None

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass
class SolveResult:
    phi_min: GridFunction
    phi_max: GridFunction
    iterations_low: int
    iterations_high: int
    residual_low: float
    residual_high: float
    bracket_gap: float
    contraction_ratio: float
    unique: bool
    converged: bool
    report: HypothesisReport
    reflected: bool = False
    trace: list = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "iterations_low": self.iterations_low,
            "iterations_high": self.iterations_high,
            "residual_low": self.residual_low,
            "residual_high": self.residual_high,
            "bracket_gap": self.bracket_gap,
            "contraction_ratio": self.contraction_ratio,
            "unique": self.unique,
            "converged": self.converged,
            "reflected": self.reflected,
            "n": self.phi_min.grid.n,
        }


@dataclass(frozen=True)
class Certificate:
    prefixed: bool
    postfixed: bool
    residual: float


def uniqueness_margin(spec: ProblemSpec) -> float:
    """Sup-norm contraction bound ``|lam| * rho * (b - a)``; below 1 the solution is unique."""
    return abs(spec.lam) * abs(spec.rho) * (spec.b - spec.a)


def roundoff_slack(spec: ProblemSpec) -> float:
    return 64 * np.finfo(float).eps * max(1.0, abs(spec.kappa))


def certify(spec: ProblemSpec, phi: GridFunction, quad: Optional[Quadrature] = None,
            atol: float = 0.0, op: Optional[DiscreteOperator] = None) -> Certificate:
    """Membership of ``phi`` in the pre-/post-fixed sets, up to ``atol``."""
    op = op or DiscreteOperator(spec, quad or trapezoid_weights(phi.grid))
    diff = op.apply(phi).values - phi.values
    return Certificate(prefixed=bool(np.all(diff <= atol)),
                       postfixed=bool(np.all(diff >= -atol)),
                       residual=float(np.max(np.abs(diff))))


class _Sequence:
    """One Kleene sequence.

    Each application of ``T`` measures the residual of the current iterate;
    once that is ``<= tol`` the iterate is accepted as the limit, so the
    reported residual is an exact ``||T phi - phi||`` of the returned value.
    ``k`` counts the iterates produced, not the final certifying application.
    """

    def __init__(self, op: DiscreteOperator, start: float, direction: int, cfg: SolverConfig):
        self.op = op
        self.phi = GridFunction.constant(op.grid, start)
        self.direction = direction  # +1 ascending, -1 descending
        self.cfg = cfg
        self.k = 0
        self.residual = np.inf
        self.done = False

    def advance(self):
        """Apply ``T`` once; return ``(previous, image)`` for invariant checks."""
        new = self.op.apply(self.phi)
        previous = self.phi
        self.residual = sup_norm(new, previous)
        if self.residual <= self.cfg.tol:
            self.done = True
        else:
            self.phi = new
            self.k += 1
        return previous, new


def _check_step(spec, name, k, prev, new, direction, slack, force):
    why = class_violation(new, spec.function_class, slack)
    if why is not None:
        kind, i = why
        t = new.grid.nodes[i]
        msg = (f"{name} iterate {k} leaves the class ({kind} at t={t!r}, "
               f"value={new.values[i]!r}, kappa={spec.kappa!r})")
        if force and kind == "bound":
            raise IterateEscapedError(msg)
        raise InvariantViolation(msg)
    drift = direction * (new.values - prev.values)
    if np.any(drift < -slack):
        i = int(np.argmin(drift))
        raise InvariantViolation(
            f"{name} sequence not monotone in k at iteration {k}, node {i}")


def solve(spec: ProblemSpec, quad: Optional[Quadrature] = None,
          cfg: Optional[SolverConfig] = None, n: int = 1001) -> SolveResult:
    """Bracket the minimum and maximum solutions in the spec's class.

    Problems posed in the non-positive frame are reflected, solved and
    reflected back; reflection swaps the roles of the two extremes.
    Returns a result with ``converged=False`` when ``max_iter`` is hit.
    """
    cfg = cfg or SolverConfig()
    quad = quad or trapezoid_weights(spec.grid(n))
    if spec.sign == "nonpos":
        res = _solve_nonneg(reflect_problem(spec), quad, cfg)
        return SolveResult(
            phi_min=reflect_solution(res.phi_max), phi_max=reflect_solution(res.phi_min),
            iterations_low=res.iterations_high, iterations_high=res.iterations_low,
            residual_low=res.residual_high, residual_high=res.residual_low,
            bracket_gap=res.bracket_gap, contraction_ratio=res.contraction_ratio,
            unique=res.unique, converged=res.converged,
            report=check_hypotheses(spec, quad.grid), reflected=True,
            trace=[(k, rh, rl, g) for k, rl, rh, g in res.trace])
    return _solve_nonneg(spec, quad, cfg)


def _solve_nonneg(spec: ProblemSpec, quad: Quadrature, cfg: SolverConfig) -> SolveResult:
    report = check_hypotheses(spec, quad.grid)
    if not report.passed:
        only_margin = set(report.failed) <= {"margin_nonneg", "margin_interval"}
        if not (cfg.force and only_margin):
            raise HypothesisError(report)
        log.warning("margin condition fails (%r); iterating anyway", report.margin_value)

    op = DiscreteOperator(spec, quad, threads=cfg.threads)
    cls = spec.function_class
    low = _Sequence(op, cls.bottom, +1, cfg)
    high = _Sequence(op, cls.top, -1, cfg)
    slack = roundoff_slack(spec)
    trace = []

    for r in range(cfg.max_iter):
        if low.done and high.done:
            break
        gap = sup_norm(high.phi, low.phi)
        for seq, name in ((low, "low"), (high, "high")):
            if not seq.done:
                prev, new = seq.advance()
                if cfg.check_invariants:
                    _check_step(spec, name, seq.k, prev, new, seq.direction,
                                slack, cfg.force)
        if cfg.keep_trace:
            trace.append((r, low.residual, high.residual, gap))
        if cfg.check_invariants and np.any(low.phi.values > high.phi.values + slack):
            i = int(np.argmax(low.phi.values - high.phi.values))
            raise InvariantViolation(f"bracket crossed at node {i}, round {r}")

    converged = low.done and high.done
    for seq in (low, high):
        if not seq.done:
            seq.residual = sup_norm(op.apply(seq.phi), seq.phi)
    gap = sup_norm(high.phi, low.phi)
    unique_tol = cfg.unique_tol if cfg.unique_tol is not None else 10 * cfg.tol
    return SolveResult(
        phi_min=low.phi, phi_max=high.phi,
        iterations_low=low.k, iterations_high=high.k,
        residual_low=low.residual, residual_high=high.residual,
        bracket_gap=gap, contraction_ratio=uniqueness_margin(spec),
        unique=converged and gap <= unique_tol, converged=converged,
        report=report, trace=trace)


def refinement_delta(spec: ProblemSpec, n: int = 1001, cfg: Optional[SolverConfig] = None) -> dict:
    """Change in both limits when the grid is refined from ``n`` to ``2n - 1`` nodes.

    The refined grid contains the coarse nodes, so limits are compared there.
    """
    coarse = solve(spec, cfg=cfg, n=n)
    fine = solve(spec, cfg=cfg, n=2 * n - 1)
    return {
        "n": n, "n_refined": 2 * n - 1,
        "delta_min": float(np.max(np.abs(fine.phi_min.values[::2] - coarse.phi_min.values))),
        "delta_max": float(np.max(np.abs(fine.phi_max.values[::2] - coarse.phi_max.values))),
    }

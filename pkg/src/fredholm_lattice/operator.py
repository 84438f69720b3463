"""The integral operator ``T phi = f + lam * int_a^b K(., s) phi(s) ds`` on a grid.

The integral is discretised with the composite trapezoid rule.  Its weights
are non-negative, so with a non-negative kernel and ``lam >= 0`` the discrete
operator is order-preserving exactly, not only in the limit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import kernels
from .expr import Expression, free_variables, parse, unparse
from .grid import (FunctionClass, Grid, GridFunction, GridMismatchError,
                   class_violation, sample, sample_kernel)

__all__ = [
    "ProblemSpec", "Quadrature", "DiscreteOperator", "CheckRecord",
    "HypothesisReport", "trapezoid_weights", "apply_T", "check_hypotheses",
    "margin",
]


@dataclass(frozen=True)
class ProblemSpec:
    """One instance of ``phi = f + lam * int K phi`` with its class constants.

    For the non-positive classes (the reflected frame) ``kappa``, ``mu`` and
    ``rho`` are the lower bounds of the solution, of ``f`` and of ``K``.
    """

    a: float
    b: float
    lam: float
    f_expr: Expression
    K_expr: Expression
    kappa: float
    mu: float
    rho: float
    monotone: str = "op"
    semicontinuity: str = "usc"
    sign: str = "nonneg"

    def __post_init__(self):
        for name in ("a", "b", "lam", "kappa", "mu", "rho"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not self.a < self.b:
            raise ValueError(f"need a < b, got [{self.a}, {self.b}]")
        if not free_variables(self.f_expr) <= {"t"}:
            raise ValueError("f may only use the variable t")
        if not free_variables(self.K_expr) <= {"t", "s"}:
            raise ValueError("K may only use the variables t and s")
        FunctionClass(self.monotone, self.semicontinuity, self.sign, 0.0)

    @classmethod
    def from_strings(cls, f: str, K: str, **kwargs) -> "ProblemSpec":
        return cls(f_expr=parse(f, {"t"}), K_expr=parse(K, {"t", "s"}), **kwargs)

    @property
    def function_class(self) -> FunctionClass:
        """The solution class, bounded by kappa."""
        return FunctionClass(self.monotone, self.semicontinuity, self.sign, self.kappa)

    @property
    def f_class(self) -> FunctionClass:
        """The class ``f`` must belong to, bounded by mu."""
        return FunctionClass(self.monotone, self.semicontinuity, self.sign, self.mu)

    def grid(self, n: int = 1001) -> Grid:
        return Grid(self.a, self.b, n)

    def with_(self, **changes) -> "ProblemSpec":
        return replace(self, **changes)

    def describe(self) -> str:
        return (f"phi(t) = {unparse(self.f_expr)} + {self.lam!r} * "
                f"int_{self.a!r}^{self.b!r} ({unparse(self.K_expr)}) phi(s) ds")


@dataclass(frozen=True)
class Quadrature:
    grid: Grid
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.grid.n,):
            raise ValueError("one weight per grid node is required")
        if np.any(w < 0):
            raise ValueError("quadrature weights must be non-negative")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)


def trapezoid_weights(grid: Grid) -> Quadrature:
    """Composite trapezoid weights ``h/2, h, ..., h, h/2``."""
    w = np.full(grid.n, grid.h)
    w[0] = w[-1] = grid.h / 2
    return Quadrature(grid, w)


class DiscreteOperator:
    """``T`` with ``f`` and ``w_j K(t_i, s_j)`` sampled once.

    ``apply`` sums each row with Kahan compensation in fixed column order, so
    values do not depend on ``threads``.
    """

    def __init__(self, spec: ProblemSpec, quad: Quadrature, side: Optional[str] = None,
                 threads: Optional[int] = None):
        self.spec = spec
        self.grid = quad.grid
        self.quad = quad
        self.f = sample(spec.f_expr, self.grid, side)
        self.K = sample_kernel(spec.K_expr, self.grid)
        self.weighted = np.ascontiguousarray(self.K * quad.weights[None, :])
        self.threads = threads or kernels.default_threads()

    def integral(self, phi: GridFunction) -> np.ndarray:
        if phi.grid != self.grid:
            raise GridMismatchError("phi is not on the operator's grid")
        return kernels.kahan_matvec(self.weighted, phi.values, self.threads)

    def apply(self, phi: GridFunction) -> GridFunction:
        return GridFunction(self.grid, self.f.values + self.spec.lam * self.integral(phi))

    __call__ = apply


def apply_T(spec: ProblemSpec, phi: GridFunction, quad: Optional[Quadrature] = None) -> GridFunction:
    """One application of ``T``; builds the discretisation on every call."""
    quad = quad or trapezoid_weights(phi.grid)
    return DiscreteOperator(spec, quad).apply(phi)


def margin(spec: ProblemSpec) -> float:
    """``kappa (1 - lam rho) - mu``, sign-normalised so ``>= 0`` means the condition holds.

    In the non-positive frame the condition reads ``kappa (1 - lam rho) <= mu``.
    """
    value = spec.kappa * (1 - spec.lam * spec.rho) - spec.mu
    return value if spec.sign == "nonneg" else -value


@dataclass(frozen=True)
class CheckRecord:
    name: str
    passed: bool
    witness: Optional[tuple] = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed,
                "witness": None if self.witness is None else list(self.witness),
                "detail": self.detail}


@dataclass(frozen=True)
class HypothesisReport:
    records: tuple
    margin_value: float
    n: int
    notes: tuple = field(default=())

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def __getitem__(self, name: str) -> CheckRecord:
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)

    @property
    def failed(self) -> list:
        return [r.name for r in self.records if not r.passed]

    def to_dict(self) -> dict:
        return {"passed": self.passed, "margin_value": self.margin_value, "n": self.n,
                "checks": [r.to_dict() for r in self.records], "notes": list(self.notes)}


def _first_true(mask: np.ndarray):
    idx = np.argwhere(mask)
    return None if idx.size == 0 else tuple(int(i) for i in idx[0])


def check_hypotheses(spec: ProblemSpec, grid: Optional[Grid] = None) -> HypothesisReport:
    """Check the existence hypotheses on an ``n x n`` sample.

    Sampling can falsify the continuum hypotheses but never prove them;
    continuity of ``K`` is not checked at all.
    """
    grid = grid or spec.grid()
    t = grid.nodes
    nonneg = spec.sign == "nonneg"
    records = []

    consts = {"lambda": spec.lam, "kappa": spec.kappa, "mu": spec.mu, "rho": spec.rho}
    bad = [k for k, v in consts.items() if (v < 0 if nonneg else v > 0)]
    records.append(CheckRecord(
        "constants_sign", not bad, None,
        ("must be " + (">= 0" if nonneg else "<= 0") + ": " + ", ".join(bad)) if bad else ""))

    f = sample(spec.f_expr, grid)
    try:
        f_cls = spec.f_class
    except ValueError as exc:
        records.append(CheckRecord("f_in_class", False, None, str(exc)))
    else:
        why = class_violation(f, f_cls)
        records.append(CheckRecord(
            "f_in_class", why is None,
            None if why is None else (float(t[why[1]]),),
            "" if why is None else f"{why[0]} violated at t={float(t[why[1]])!r}, f={float(f.values[why[1]])!r}"))

    K = sample_kernel(spec.K_expr, grid)
    out = (K < 0) | (K > spec.rho) if nonneg else (K > 0) | (K < spec.rho)
    hit = _first_true(out)
    records.append(CheckRecord(
        "K_bounded_by_rho", hit is None,
        None if hit is None else (float(t[hit[0]]), float(t[hit[1]])),
        "" if hit is None else f"K={float(K[hit])!r} outside the bound at (t, s)"))

    sign = 1.0 if spec.monotone == "op" else -1.0
    for name, steps in (("K_monotone_in_t", np.diff(K, axis=0)),
                        ("K_monotone_in_s", np.diff(K, axis=1))):
        hit = _first_true(sign * steps < 0)
        witness = None if hit is None else (float(t[hit[0]]), float(t[hit[1]]))
        direction = "nondecreasing" if sign > 0 else "nonincreasing"
        records.append(CheckRecord(
            name, hit is None, witness,
            "" if hit is None else f"not {direction} between neighbouring nodes at (t, s)"))

    m = margin(spec)
    # the inequality is inclusive; allow the rounding of kappa * (1 - lam * rho)
    ulps = 8 * np.finfo(float).eps * max(1.0, abs(spec.kappa), abs(spec.mu))
    records.append(CheckRecord("margin_nonneg", m >= -ulps, None, f"margin={float(m)!r}"))
    length = spec.b - spec.a
    if length > 1:
        # sup |T phi| <= mu + lam kappa rho (b - a): the plain margin only covers b - a <= 1
        m_len = spec.kappa * (1 - spec.lam * spec.rho * length) - spec.mu
        m_len = m_len if nonneg else -m_len
        records.append(CheckRecord("margin_interval", m_len >= -ulps, None,
                                   f"kappa (1 - lam rho (b - a)) - mu = {m_len!r}"))

    notes = (f"sampled on a {grid.n}x{grid.n} grid: checks can falsify but not prove "
             "the continuum hypotheses",
             f"continuity of K not checked (not falsifiable by sampling); "
             f"semicontinuity of f is a sampling convention")
    return HypothesisReport(tuple(records), m, grid.n, notes)

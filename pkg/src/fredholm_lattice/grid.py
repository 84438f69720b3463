"""Grid functions on a uniform partition of [a, b] and the pointwise order.

A bounded monotone function class is a complete lattice under the pointwise
order; on a grid the same holds nodewise.  The infimum of the empty family is
the class top (the constant ``kappa`` for non-negative classes), the supremum
of the empty family is the class bottom.

Semicontinuity is a representation convention here, not something a grid can
check: a nondecreasing function is USC iff it is right-continuous, so USC
members are sampled as right limits at jumps and LSC members as left limits
(mirror the rule for nonincreasing functions).  Only finite families are ever
formed; the continuum lattice admits uncountable ones.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .expr import Expression, evaluate_array, free_variables

__all__ = [
    "Grid", "GridFunction", "FunctionClass", "GridMismatchError",
    "ClassMembershipError", "SampleError", "leq", "pointwise_inf", "pointwise_sup",
    "in_class", "class_violation", "sample", "sample_kernel",
    "semicontinuity_side", "sup_norm", "to_csv", "from_csv",
]

MONOTONE = ("op", "or")
SEMICONTINUITY = ("usc", "lsc")
SIGN = ("nonneg", "nonpos")


class GridMismatchError(ValueError):
    pass


class ClassMembershipError(ValueError):
    pass


class SampleError(ValueError):
    """Evaluation failed at grid node ``node``."""

    def __init__(self, message: str, node: int):
        super().__init__(message)
        self.node = node


@dataclass(frozen=True)
class Grid:
    a: float
    b: float
    n: int = 1001

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or not self.a < self.b:
            raise ValueError(f"need finite a < b, got [{self.a}, {self.b}]")
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"need at least 2 nodes, got {self.n}")

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.n - 1)

    @property
    def nodes(self) -> np.ndarray:
        i = np.arange(self.n, dtype=float)
        t = self.a + i * (self.b - self.a) / (self.n - 1)
        t[-1] = self.b
        t.flags.writeable = False
        return t

    def refined(self) -> "Grid":
        """The grid with every interval halved; it contains all current nodes."""
        return Grid(self.a, self.b, 2 * self.n - 1)


class GridFunction:
    """Immutable node values on a :class:`Grid`."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values):
        v = np.array(values, dtype=float)
        if v.shape != (grid.n,):
            raise ValueError(f"expected {grid.n} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", v)

    def __setattr__(self, name, value):
        raise AttributeError("GridFunction is immutable")

    @classmethod
    def constant(cls, grid: Grid, c: float) -> "GridFunction":
        return cls(grid, np.full(grid.n, float(c)))

    def __neg__(self) -> "GridFunction":
        return GridFunction(self.grid, -self.values)

    def __eq__(self, other):
        if not isinstance(other, GridFunction):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.grid, self.values.tobytes()))

    def __repr__(self):
        return f"GridFunction(n={self.grid.n}, [{self.grid.a}, {self.grid.b}])"


@dataclass(frozen=True)
class FunctionClass:
    """Bounded monotone class; ``bound`` is kappa (upper) or kappa~ (lower)."""

    monotone: str = "op"
    semicontinuity: str = "usc"
    sign: str = "nonneg"
    bound: float = 1.0

    def __post_init__(self):
        if self.monotone not in MONOTONE:
            raise ValueError(f"monotone must be one of {MONOTONE}")
        if self.semicontinuity not in SEMICONTINUITY:
            raise ValueError(f"semicontinuity must be one of {SEMICONTINUITY}")
        if self.sign not in SIGN:
            raise ValueError(f"sign must be one of {SIGN}")
        if self.sign == "nonneg" and not self.bound >= 0:
            raise ValueError("non-negative classes need bound >= 0")
        if self.sign == "nonpos" and not self.bound <= 0:
            raise ValueError("non-positive classes need bound <= 0")

    @property
    def bottom(self) -> float:
        return 0.0 if self.sign == "nonneg" else float(self.bound)

    @property
    def top(self) -> float:
        return float(self.bound) if self.sign == "nonneg" else 0.0

    def with_bound(self, bound: float) -> "FunctionClass":
        return FunctionClass(self.monotone, self.semicontinuity, self.sign, bound)


def _same_grid(functions) -> Grid:
    grids = {f.grid for f in functions}
    if len(grids) > 1:
        raise GridMismatchError("grid functions live on different grids")
    return grids.pop()


def leq(phi: GridFunction, psi: GridFunction) -> bool:
    """Pointwise order: ``phi(t_i) <= psi(t_i)`` at every node."""
    _same_grid([phi, psi])
    return bool(np.all(phi.values <= psi.values))


def sup_norm(phi: GridFunction, psi: Optional[GridFunction] = None) -> float:
    if psi is None:
        return float(np.max(np.abs(phi.values)))
    _same_grid([phi, psi])
    return float(np.max(np.abs(phi.values - psi.values)))


def class_violation(phi: GridFunction, cls: FunctionClass, atol: float = 0.0):
    """First reason ``phi`` is outside ``cls`` as ``(kind, node_index)``, else None."""
    v = phi.values
    lo = cls.bottom - atol
    hi = cls.top + atol
    bad = np.flatnonzero((v < lo) | (v > hi))
    if bad.size:
        return ("bound", int(bad[0]))
    steps = np.diff(v)
    if cls.monotone == "op":
        bad = np.flatnonzero(steps < -atol)
    else:
        bad = np.flatnonzero(steps > atol)
    if bad.size:
        return ("monotone", int(bad[0]))
    return None


def in_class(phi: GridFunction, cls: FunctionClass, atol: float = 0.0) -> bool:
    """Nodewise monotone in the class direction and within the class bounds."""
    return class_violation(phi, cls, atol) is None


def _check_members(functions, cls: Optional[FunctionClass]):
    if cls is None:
        return
    for k, f in enumerate(functions):
        why = class_violation(f, cls)
        if why is not None:
            raise ClassMembershipError(
                f"member {k} violates the class ({why[0]} at node {why[1]})")


def pointwise_inf(functions: Iterable[GridFunction], cls: Optional[FunctionClass] = None,
                  grid: Optional[Grid] = None) -> GridFunction:
    """Nodewise infimum; the empty family gives the class top constant."""
    functions = list(functions)
    if not functions:
        if cls is None or grid is None:
            raise ValueError("the infimum of the empty family needs a class and a grid")
        return GridFunction.constant(grid, cls.top)
    g = _same_grid(functions)
    if grid is not None and grid != g:
        raise GridMismatchError("members do not live on the given grid")
    _check_members(functions, cls)
    return GridFunction(g, np.min([f.values for f in functions], axis=0))


def pointwise_sup(functions: Iterable[GridFunction], cls: Optional[FunctionClass] = None,
                  grid: Optional[Grid] = None) -> GridFunction:
    """Nodewise supremum; the empty family gives the class bottom constant."""
    functions = list(functions)
    if not functions:
        if cls is None or grid is None:
            raise ValueError("the supremum of the empty family needs a class and a grid")
        return GridFunction.constant(grid, cls.bottom)
    g = _same_grid(functions)
    if grid is not None and grid != g:
        raise GridMismatchError("members do not live on the given grid")
    _check_members(functions, cls)
    return GridFunction(g, np.max([f.values for f in functions], axis=0))


def semicontinuity_side(cls: FunctionClass) -> str:
    """Which one-sided limit represents members of ``cls`` at a jump."""
    right = (cls.monotone == "op") == (cls.semicontinuity == "usc")
    return "right" if right else "left"


def sample(expr: Expression, grid: Grid, side: Optional[str] = None) -> GridFunction:
    """Sample an expression in ``t`` at the grid nodes.

    ``side=None`` evaluates guards exactly as written.  ``"left"``/``"right"``
    evaluate the guards at interior nodes one ulp to that side, so a node that
    sits exactly on a piecewise boundary takes the corresponding one-sided
    limit; arm values are always computed at the node itself.
    """
    if not free_variables(expr) <= {"t"}:
        raise ValueError("sampled expressions may only use t")
    t = grid.nodes
    guard_t = None
    if side is not None:
        if side not in ("left", "right"):
            raise ValueError("side must be 'left', 'right' or None")
        guard_t = t.copy()
        direction = -np.inf if side == "left" else np.inf
        guard_t[1:-1] = np.nextafter(t[1:-1], direction)
    try:
        values = evaluate_array(expr, t, guard_t=guard_t)
    except ValueError as exc:
        node = _first_bad_node(expr, t, guard_t)
        raise SampleError(f"{exc} (node {node}, t={t[node]!r})", node) from exc
    return GridFunction(grid, values)


def _first_bad_node(expr, t, guard_t) -> int:
    for i in range(t.size):
        try:
            evaluate_array(expr, t[i:i + 1],
                           guard_t=None if guard_t is None else guard_t[i:i + 1])
        except ValueError:
            return i
    return 0


def sample_kernel(expr: Expression, grid: Grid) -> np.ndarray:
    """``K[i, j] = K(t_i, s_j)`` on the tensor grid."""
    if not free_variables(expr) <= {"t", "s"}:
        raise ValueError("kernel expressions may only use t and s")
    t = grid.nodes
    return evaluate_array(expr, t[:, None], t[None, :])


def to_csv(phi: GridFunction) -> str:
    """``t,value`` rows with 17 significant digits."""
    out = io.StringIO()
    out.write("t,value\n")
    for t, v in zip(phi.grid.nodes, phi.values):
        out.write(f"{t:.17g},{v:.17g}\n")
    return out.getvalue()


def from_csv(text: str) -> GridFunction:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["t", "value"]:
        raise ValueError("expected header 't,value'")
    data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
    grid = Grid(float(data[0, 0]), float(data[-1, 0]), len(data))
    if not np.allclose(grid.nodes, data[:, 0], rtol=0, atol=1e-12 * (grid.b - grid.a)):
        raise ValueError("CSV nodes are not a uniform grid")
    return GridFunction(grid, data[:, 1])

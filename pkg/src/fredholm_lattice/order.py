"""Finite complete lattices and exhaustive checks of Tarski's fixed point theorem.

Every finite lattice is complete: the supremum of any subset is a fold of
``join`` starting from the bottom element, the infimum a fold of ``meet``
from the top.  For an order-preserving self-map the least fixed point is the
infimum of the pre-fixed points ``{x : f(x) <= x}`` and the greatest the
supremum of the post-fixed points ``{x : x <= f(x)}``.

The fixed points form a non-empty complete lattice in the order inherited
from ``L``.  They need not be a sublattice of ``L``: on ``2 x 3`` the map

    (0,0)->(0,0) (0,1)->(0,0) (0,2)->(0,2) (1,0)->(0,0) (1,1)->(1,1) (1,2)->(1,2)

fixes ``(0,2)`` and ``(1,1)`` but not their meet ``(0,1)``.  Both properties
are checkable here: :func:`verify_complete_lattice` (induced order) and
:func:`verify_complete_sublattice` (closure under ``L``'s join and meet).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Optional, Sequence

import numpy as np

__all__ = [
    "FiniteLattice", "MonotoneMap", "LatticeError", "NotMonotoneError",
    "check_monotone", "fixed_point_set", "extremal_fixed_points",
    "verify_complete_sublattice", "verify_complete_lattice", "kleene_iterate", "random_lattice",
    "random_monotone_map", "SelftestReport", "check_case", "selftest",
]

EXHAUSTIVE_LIMIT = 20
SAMPLED_SUBSETS = 10_000


class LatticeError(ValueError):
    pass


class NotMonotoneError(LatticeError):
    """The map is not order-preserving, so the fixed-point theorem does not apply."""


class FiniteLattice:
    """Elements are opaque hashable labels; tables are indexed by position."""

    def __init__(self, elements: Sequence[Hashable], leq, join, meet, validate: bool = True):
        self.elements = tuple(elements)
        self.index = {e: i for i, e in enumerate(self.elements)}
        if len(self.index) != len(self.elements):
            raise LatticeError("duplicate elements")
        self.leq = np.asarray(leq, dtype=bool)
        self.join = np.asarray(join, dtype=np.intp)
        self.meet = np.asarray(meet, dtype=np.intp)
        n = len(self.elements)
        for name in ("leq", "join", "meet"):
            if getattr(self, name).shape != (n, n):
                raise LatticeError(f"{name} table must be {n}x{n}")
        if validate:
            self.validate()
        self.bottom_index = int(np.flatnonzero(self.leq.all(axis=1))[0])
        self.top_index = int(np.flatnonzero(self.leq.all(axis=0))[0])

    def __len__(self):
        return len(self.elements)

    def __repr__(self):
        return f"FiniteLattice({len(self)} elements)"

    @property
    def bottom(self):
        return self.elements[self.bottom_index]

    @property
    def top(self):
        return self.elements[self.top_index]

    @classmethod
    def from_leq(cls, elements: Sequence[Hashable], leq) -> "FiniteLattice":
        """Build join/meet tables from the order by brute force."""
        leq = np.asarray(leq, dtype=bool)
        n = len(elements)
        join = np.empty((n, n), dtype=np.intp)
        meet = np.empty((n, n), dtype=np.intp)
        for x in range(n):
            for y in range(n):
                join[x, y] = _least(leq, np.flatnonzero(leq[x] & leq[y]), (x, y), "join")
                meet[x, y] = _greatest(leq, np.flatnonzero(leq[:, x] & leq[:, y]), (x, y), "meet")
        return cls(elements, leq, join, meet)

    @classmethod
    def chain(cls, m: int) -> "FiniteLattice":
        """The chain ``0 < 1 < ... < m - 1``."""
        if m < 1:
            raise LatticeError("a chain needs at least one element")
        r = np.arange(m)
        return cls(list(range(m)), r[:, None] <= r[None, :],
                   np.maximum.outer(r, r), np.minimum.outer(r, r), validate=False)

    @classmethod
    def product(cls, *sizes: int) -> "FiniteLattice":
        """Product of chains with the componentwise order; elements are tuples."""
        if not sizes or min(sizes) < 1:
            raise LatticeError("need at least one chain of positive length")
        coords = np.array(list(itertools.product(*(range(m) for m in sizes))), dtype=np.intp)
        strides = np.array([int(np.prod(sizes[i + 1:])) for i in range(len(sizes))])
        leq = np.all(coords[:, None, :] <= coords[None, :, :], axis=2)
        join = (np.maximum(coords[:, None, :], coords[None, :, :]) * strides).sum(axis=2)
        meet = (np.minimum(coords[:, None, :], coords[None, :, :]) * strides).sum(axis=2)
        return cls([tuple(int(v) for v in c) for c in coords], leq, join, meet, validate=False)

    def validate(self):
        """Scan the tables: partial order laws, then lub/glb for every pair."""
        L = self.leq
        n = len(self)
        if not np.all(np.diag(L)):
            raise LatticeError("leq is not reflexive")
        if np.any(L & L.T & ~np.eye(n, dtype=bool)):
            raise LatticeError("leq is not antisymmetric")
        # transitivity: x<=y and y<=z imply x<=z
        if np.any((L.astype(np.int64) @ L.astype(np.int64) > 0) & ~L):
            raise LatticeError("leq is not transitive")
        for x in range(n):
            for y in range(n):
                j, m = self.join[x, y], self.meet[x, y]
                upper = L[x] & L[y]
                lower = L[:, x] & L[:, y]
                if not (upper[j] and np.all(L[j, upper])):
                    raise LatticeError(f"join table wrong at {self.elements[x]!r}, {self.elements[y]!r}")
                if not (lower[m] and np.all(L[lower, m])):
                    raise LatticeError(f"meet table wrong at {self.elements[x]!r}, {self.elements[y]!r}")

    def le(self, x, y) -> bool:
        return bool(self.leq[self.index[x], self.index[y]])

    def sup(self, subset: Iterable[Hashable]):
        acc = self.bottom_index
        for e in subset:
            acc = self.join[acc, self.index[e]]
        return self.elements[acc]

    def inf(self, subset: Iterable[Hashable]):
        acc = self.top_index
        for e in subset:
            acc = self.meet[acc, self.index[e]]
        return self.elements[acc]


def _least(leq, candidates, pair, what):
    for c in candidates:
        if np.all(leq[c, candidates]):
            return c
    raise LatticeError(f"no {what} for indices {pair}: not a lattice")


def _greatest(leq, candidates, pair, what):
    for c in candidates:
        if np.all(leq[candidates, c]):
            return c
    raise LatticeError(f"no {what} for indices {pair}: not a lattice")


class MonotoneMap:
    """A self-map given by its table; monotonicity is checked, not assumed."""

    def __init__(self, table: Mapping[Hashable, Hashable]):
        self.table = dict(table)

    def __call__(self, x):
        return self.table[x]

    def indices(self, L: FiniteLattice) -> np.ndarray:
        missing = [e for e in L.elements if e not in self.table]
        if missing:
            raise LatticeError(f"map not total on the lattice (missing {missing[0]!r})")
        try:
            return np.array([L.index[self.table[e]] for e in L.elements], dtype=np.intp)
        except KeyError as exc:
            raise LatticeError(f"map leaves the lattice: {exc.args[0]!r}") from None


def check_monotone(fmap: MonotoneMap, L: FiniteLattice) -> bool:
    """True iff ``x <= y`` implies ``f(x) <= f(y)`` for every comparable pair."""
    f = fmap.indices(L)
    return bool(np.all(L.leq[f[:, None], f[None, :]] | ~L.leq))


def _monotone_indices(fmap: MonotoneMap, L: FiniteLattice) -> np.ndarray:
    f = fmap.indices(L)
    if not np.all(L.leq[f[:, None], f[None, :]] | ~L.leq):
        raise NotMonotoneError("map is not order-preserving; the fixed-point theorem does not apply")
    return f


def fixed_point_set(fmap: MonotoneMap, L: FiniteLattice) -> frozenset:
    """``{x : f(x) = x}`` by enumeration; checked non-empty and a complete
    lattice in the induced order (not necessarily a sublattice of ``L``)."""
    f = _monotone_indices(fmap, L)
    fixed = np.flatnonzero(f == np.arange(len(L)))
    if fixed.size == 0:
        raise LatticeError("order-preserving map without fixed points: lattice tables are wrong")
    result = frozenset(L.elements[i] for i in fixed)
    if not verify_complete_lattice(result, L):
        raise LatticeError("fixed points do not form a complete lattice")
    return result


def extremal_fixed_points(fmap: MonotoneMap, L: FiniteLattice):
    """``(inf of pre-fixed points, sup of post-fixed points)``, cross-checked
    against the min and max of the enumerated fixed-point set."""
    f = _monotone_indices(fmap, L)
    idx = np.arange(len(L))
    pre = idx[L.leq[f, idx]]
    post = idx[L.leq[idx, f]]
    lo = L.inf(L.elements[i] for i in pre)
    hi = L.sup(L.elements[i] for i in post)
    fixed = idx[f == idx]
    lo_i, hi_i = L.index[lo], L.index[hi]
    if not (f[lo_i] == lo_i and np.all(L.leq[lo_i, fixed])):
        raise LatticeError(f"inf of pre-fixed points {lo!r} is not the least fixed point")
    if not (f[hi_i] == hi_i and np.all(L.leq[fixed, hi_i])):
        raise LatticeError(f"sup of post-fixed points {hi!r} is not the greatest fixed point")
    return lo, hi


def _fold_all_subsets(table: np.ndarray, members: np.ndarray, identity: int) -> np.ndarray:
    """Fold ``table`` over every subset of ``members``; entry ``mask`` is the
    result for the subset whose bits are set (entry 0 is the identity)."""
    k = members.size
    out = np.empty(1 << k, dtype=np.intp)
    out[0] = identity
    for b in range(k):
        lo = 1 << b
        out[lo:2 * lo] = table[out[:lo], members[b]]
    return out


def verify_complete_sublattice(S: Iterable[Hashable], L: FiniteLattice,
                               rng: Optional[np.random.Generator] = None,
                               samples: int = SAMPLED_SUBSETS) -> bool:
    """Every non-empty ``Y`` in ``S`` has ``sup_L Y`` and ``inf_L Y`` in ``S``.

    Exhaustive over all ``2^|S| - 1`` subsets for ``|S| <= 20``; above that,
    ``samples`` random non-empty subsets are checked.
    """
    members = np.array(sorted(L.index[e] for e in set(S)), dtype=np.intp)
    if members.size == 0:
        raise LatticeError("S must be non-empty")
    inside = np.zeros(len(L), dtype=bool)
    inside[members] = True
    if members.size <= EXHAUSTIVE_LIMIT:
        sups = _fold_all_subsets(L.join, members, L.bottom_index)[1:]
        infs = _fold_all_subsets(L.meet, members, L.top_index)[1:]
        return bool(inside[sups].all() and inside[infs].all())
    rng = rng if rng is not None else np.random.default_rng(0)
    for _ in range(samples):
        pick = members[rng.random(members.size) < rng.random()]
        if pick.size == 0:
            pick = members[rng.integers(members.size, size=1)]
        s, i = L.bottom_index, L.top_index
        for e in pick:
            s = L.join[s, e]
            i = L.meet[i, e]
        if not (inside[s] and inside[i]):
            return False
    return True


def verify_complete_lattice(S: Iterable[Hashable], L: FiniteLattice) -> bool:
    """``S`` with the order inherited from ``L`` is a complete lattice.

    For a finite non-empty poset it is enough that every pair has a least
    upper bound and a greatest lower bound inside ``S``; larger families fold.
    """
    members = np.array(sorted(L.index[e] for e in set(S)), dtype=np.intp)
    if members.size == 0:
        raise LatticeError("S must be non-empty")
    sub = L.leq[np.ix_(members, members)]
    for x in range(members.size):
        for y in range(x + 1, members.size):
            upper = np.flatnonzero(sub[x] & sub[y])
            lower = np.flatnonzero(sub[:, x] & sub[:, y])
            if not any(np.all(sub[u, upper]) for u in upper):
                return False
            if not any(np.all(sub[lower, m]) for m in lower):
                return False
    return True


def kleene_iterate(fmap: MonotoneMap, L: FiniteLattice, start: str = "bottom"):
    """Iterate from the bottom (or top) until a fixed point; returns ``(x, steps)``."""
    f = _monotone_indices(fmap, L)
    x = L.bottom_index if start == "bottom" else L.top_index
    for steps in range(len(L) + 1):
        if f[x] == x:
            return L.elements[x], steps
        x = f[x]
    raise LatticeError("Kleene iteration did not stabilise within |L| steps")


# ---------------------------------------------------------------------------
# random instances

def random_lattice(rng: np.random.Generator, max_size: int = 64) -> FiniteLattice:
    """A chain or a product of two or three chains with at most ``max_size`` elements."""
    while True:
        k = int(rng.integers(1, 4))
        sizes = [int(rng.integers(1, 9 if k > 1 else max_size + 1)) for _ in range(k)]
        if int(np.prod(sizes)) <= max_size:
            return FiniteLattice.chain(sizes[0]) if k == 1 else FiniteLattice.product(*sizes)


def random_monotone_map(L: FiniteLattice, rng: np.random.Generator) -> MonotoneMap:
    """Choose images along a linear extension, each above the join of the
    images of everything strictly below."""
    n = len(L)
    order = np.argsort(L.leq.sum(axis=0), kind="stable")  # by number of elements below
    f = np.full(n, -1, dtype=np.intp)
    greedy = rng.random() < 0.3
    for x in order:
        floor = L.bottom_index
        for y in np.flatnonzero(L.leq[:, x]):
            if y != x:
                floor = L.join[floor, f[y]]
        choices = np.flatnonzero(L.leq[floor])
        if greedy and rng.random() < 0.7:
            f[x] = floor if rng.random() < 0.5 or not L.leq[floor, x] else x
        else:
            f[x] = int(rng.choice(choices))
    return MonotoneMap({L.elements[i]: L.elements[f[i]] for i in range(n)})


@dataclass
class SelftestReport:
    seed: int
    cases: int
    failures: list = field(default_factory=list)
    not_sublattice: list = field(default_factory=list)
    largest: int = 0
    max_fixed_points: int = 0

    @property
    def passed(self) -> bool:
        return not self.failures


def check_case(fmap: MonotoneMap, L: FiniteLattice):
    """Run every fixed-point check on one map; raises :class:`LatticeError`.

    Returns ``(fixed point set, closed under L's join and meet)``.
    """
    if not check_monotone(fmap, L):
        raise LatticeError("generator produced a non-monotone map")
    fixed = fixed_point_set(fmap, L)
    lo, hi = extremal_fixed_points(fmap, L)
    if lo != min_fixed(fixed, L) or hi != max_fixed(fixed, L):
        raise LatticeError("extremal formulas disagree with the enumerated extremes")
    up, steps_up = kleene_iterate(fmap, L, "bottom")
    down, steps_down = kleene_iterate(fmap, L, "top")
    if up != lo or down != hi:
        raise LatticeError("Kleene iteration missed an extremal fixed point")
    if max(steps_up, steps_down) > len(L):
        raise LatticeError("Kleene iteration took more than |L| steps")
    return fixed, verify_complete_sublattice(fixed, L)


def selftest(seed: int = 1, cases: int = 500, max_size: int = 64,
             strict_sublattice: bool = False) -> SelftestReport:
    """Check the fixed-point theorem on random monotone maps of random lattices.

    Fixed-point sets that are complete lattices but not sublattices of ``L``
    are listed in ``not_sublattice``; they count as failures only with
    ``strict_sublattice``.
    """
    rng = np.random.default_rng(seed)
    report = SelftestReport(seed, cases)
    for case in range(cases):
        L = random_lattice(rng, max_size)
        fmap = random_monotone_map(L, rng)
        report.largest = max(report.largest, len(L))
        try:
            fixed, closed = check_case(fmap, L)
        except LatticeError as exc:
            report.failures.append((case, str(exc)))
            continue
        report.max_fixed_points = max(report.max_fixed_points, len(fixed))
        if not closed:
            report.not_sublattice.append(case)
            if strict_sublattice:
                report.failures.append((case, "fixed points not closed under the join/meet of L"))
    return report


def min_fixed(fixed: frozenset, L: FiniteLattice):
    """The element of ``fixed`` below all others (exists by completeness)."""
    for x in fixed:
        if all(L.le(x, y) for y in fixed):
            return x
    raise LatticeError("fixed-point set has no minimum")


def max_fixed(fixed: frozenset, L: FiniteLattice):
    for x in fixed:
        if all(L.le(y, x) for y in fixed):
            return x
    raise LatticeError("fixed-point set has no maximum")

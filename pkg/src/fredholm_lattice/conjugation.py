"""Reflection ``phi -> -phi`` between the non-negative and non-positive frames.

Negating ``f``, ``K``, ``lam`` and all bounds maps a problem over a
non-negative order-preserving USC class to one over a non-positive
order-reversing LSC class, and ``phi`` solves the first iff ``-phi`` solves
the second.  The same map sends every other combination (USC/LSC,
op/or) to its mirror, and applying it twice is the identity.
"""
from __future__ import annotations

from dataclasses import dataclass

from .expr import Expression, Neg
from .grid import FunctionClass, GridFunction
from .operator import ProblemSpec

__all__ = ["ConjugatePair", "negate_expr", "reflect_class", "reflect_problem",
           "reflect_solution", "conjugate"]

_FLIP = {"op": "or", "or": "op", "usc": "lsc", "lsc": "usc",
         "nonneg": "nonpos", "nonpos": "nonneg"}


def _neg(x: float) -> float:
    # 0.0 - x keeps zero unsigned
    return 0.0 - x


def negate_expr(expr: Expression) -> Expression:
    """Wrap in unary minus, or strip one, so negation is an involution."""
    return expr.operand if isinstance(expr, Neg) else Neg(expr)


def reflect_class(cls: FunctionClass) -> FunctionClass:
    return FunctionClass(_FLIP[cls.monotone], _FLIP[cls.semicontinuity],
                         _FLIP[cls.sign], _neg(cls.bound))


def reflect_problem(spec: ProblemSpec) -> ProblemSpec:
    return ProblemSpec(
        a=spec.a, b=spec.b, lam=_neg(spec.lam),
        f_expr=negate_expr(spec.f_expr), K_expr=negate_expr(spec.K_expr),
        kappa=_neg(spec.kappa), mu=_neg(spec.mu), rho=_neg(spec.rho),
        monotone=_FLIP[spec.monotone], semicontinuity=_FLIP[spec.semicontinuity],
        sign=_FLIP[spec.sign],
    )


def reflect_solution(phi: GridFunction) -> GridFunction:
    return -phi


@dataclass(frozen=True)
class ConjugatePair:
    original: ProblemSpec
    reflected: ProblemSpec


def conjugate(spec: ProblemSpec) -> ConjugatePair:
    return ConjugatePair(spec, reflect_problem(spec))

"""Problem files: JSON documents with a versioned ``format`` key.

Example::

    {
      "format": "fredholm-problem/1",
      "a": 0, "b": 1, "lambda": 0.2, "kappa": 2, "mu": 0.2, "rho": 4,
      "f": "piecewise(t < 1/2 -> t^4/6, else -> t^3/5)",
      "K": "4*t^7*sin(pi/2*s)^9",
      "class": {"monotone": "op", "semicontinuity": "usc"},
      "grid_n": 1001, "tol": 1e-9, "max_iter": 10000
    }

``class.sign`` defaults to ``"nonneg"``; reflected problems carry ``"nonpos"``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

from .expr import ParseError, parse, unparse
from .operator import ProblemSpec

FORMAT = "fredholm-problem/1"
REQUIRED = ("a", "b", "lambda", "kappa", "mu", "rho", "f", "K", "class")
DEFAULTS = {"grid_n": 1001, "tol": 1e-9, "max_iter": 10_000}


class ProblemFileError(ValueError):
    pass


@dataclass(frozen=True)
class ProblemFile:
    spec: ProblemSpec
    grid_n: int = 1001
    tol: float = 1e-9
    max_iter: int = 10_000


def _number(doc: dict, key: str) -> float:
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProblemFileError(f"key {key!r} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ProblemFileError(f"key {key!r} must be finite")
    return value


def from_dict(doc: dict) -> ProblemFile:
    if not isinstance(doc, dict):
        raise ProblemFileError("problem file must be a JSON object")
    fmt = doc.get("format", FORMAT)
    if fmt != FORMAT:
        raise ProblemFileError(f"unsupported format {fmt!r} (expected {FORMAT!r})")
    missing = [k for k in REQUIRED if k not in doc]
    if missing:
        raise ProblemFileError(f"missing required key {missing[0]!r}")
    unknown = set(doc) - set(REQUIRED) - set(DEFAULTS) - {"format"}
    if unknown:
        raise ProblemFileError(f"unknown key {sorted(unknown)[0]!r}")
    cls = doc["class"]
    if not isinstance(cls, dict) or not {"monotone", "semicontinuity"} <= set(cls):
        raise ProblemFileError("key 'class' needs 'monotone' and 'semicontinuity'")
    try:
        f_expr = parse(str(doc["f"]), {"t"})
    except ParseError as exc:
        raise ProblemFileError(f"key 'f': {exc}") from None
    try:
        K_expr = parse(str(doc["K"]), {"t", "s"})
    except ParseError as exc:
        raise ProblemFileError(f"key 'K': {exc}") from None
    try:
        spec = ProblemSpec(
            a=_number(doc, "a"), b=_number(doc, "b"), lam=_number(doc, "lambda"),
            f_expr=f_expr, K_expr=K_expr, kappa=_number(doc, "kappa"),
            mu=_number(doc, "mu"), rho=_number(doc, "rho"),
            monotone=cls["monotone"], semicontinuity=cls["semicontinuity"],
            sign=cls.get("sign", "nonneg"))
    except ProblemFileError:
        raise
    except ValueError as exc:
        raise ProblemFileError(str(exc)) from None
    grid_n = doc.get("grid_n", DEFAULTS["grid_n"])
    max_iter = doc.get("max_iter", DEFAULTS["max_iter"])
    for key, value in (("grid_n", grid_n), ("max_iter", max_iter)):
        if isinstance(value, bool) or not isinstance(value, int) or value < (2 if key == "grid_n" else 1):
            raise ProblemFileError(f"key {key!r} must be a positive integer, got {value!r}")
    tol = _number({"tol": doc.get("tol", DEFAULTS["tol"])}, "tol")
    if tol <= 0:
        raise ProblemFileError("key 'tol' must be positive")
    return ProblemFile(spec, grid_n, tol, max_iter)


def to_dict(problem: ProblemFile) -> dict:
    spec = problem.spec
    return {
        "format": FORMAT,
        "a": spec.a, "b": spec.b, "lambda": spec.lam,
        "kappa": spec.kappa, "mu": spec.mu, "rho": spec.rho,
        "f": unparse(spec.f_expr), "K": unparse(spec.K_expr),
        "class": {"monotone": spec.monotone, "semicontinuity": spec.semicontinuity,
                  "sign": spec.sign},
        "grid_n": problem.grid_n, "tol": problem.tol, "max_iter": problem.max_iter,
    }


def load(path: Union[str, Path]) -> ProblemFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ProblemFileError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return from_dict(doc)


def format_number(x: float) -> str:
    return format(float(x), ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with sorted keys and every float printed to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}"
                 for k, v in sorted(obj.items())]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return json.dumps(str(obj))
        return format_number(obj)
    return json.dumps(obj)


def dump_text(problem: ProblemFile) -> str:
    return dumps(to_dict(problem)) + "\n"

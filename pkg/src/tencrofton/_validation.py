"""Input coercion shared by the estimators and the command line."""

from __future__ import annotations

from numbers import Integral

import numpy as np

from .polytope import Box, Polytope, build, load_body


def check_nonnegative_int(name: str, value, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, (Integral, np.integer)):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_body(body) -> Polytope:
    """Accept a :class:`Polytope`, a catalog/JSON spec string or an array of vertices."""
    if isinstance(body, Polytope):
        return body
    if isinstance(body, str):
        return load_body(body)
    points = np.asarray(body, dtype=float)
    if points.ndim != 2 or points.shape[0] < points.shape[1] + 1:
        raise ValueError("vertices must be an (m, n) array with m > n")
    return build(points)


def check_bodies(bodies) -> list[Polytope]:
    if isinstance(bodies, (Polytope, str)):
        bodies = [bodies]
    out = [check_body(b) for b in bodies]
    if not out:
        raise ValueError("need at least one body")
    dims = {b.dim for b in out}
    if len(dims) != 1:
        raise ValueError(f"bodies must share one dimension, got {sorted(dims)}")
    return out


def check_box(box, dim: int) -> Box | None:
    """``None``, "all", a :class:`Box` or interleaved bounds ``[lo1, hi1, ...]``."""
    if box is None or (isinstance(box, str) and box == "all"):
        return None
    if not isinstance(box, Box):
        box = Box.parse(box)
    if box.dim != dim:
        raise ValueError(f"box dimension {box.dim} does not match body dimension {dim}")
    return box

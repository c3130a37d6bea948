"""Vectorized measures of polytope slices for batches of flats.

A batch of affine k-flats is given by orthonormal bases ``B`` of shape
``(N, n, k)`` and translations ``t`` of shape ``(N, n)`` orthogonal to them.
The polytope enters only through its H-representation ``A x <= c`` (a box is
handled by appending its halfspaces).  Every function returns dense tensor
rows of shape ``(N, C)`` that are zero for flats missing the body.

Lines and planes are handled in closed form: a line meets the body in a
segment, and a plane meets it in a polygon whose edges come from clipping
each facet's trace line against all other traces.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import beta as beta_fn

from . import _dense
from .exact import omega
from .polytope import simplex_moments

EDGE_TOL = 1e-12
BOX_TOL = 1e-9
GL_NODES = 32


def dedupe_halfspaces(A: np.ndarray, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Normalize rows and merge parallel constraints, keeping the tightest.

    Coincident constraints would otherwise both contribute a polygon edge.
    """
    norms = np.linalg.norm(A, axis=1)
    A, c = A / norms[:, None], c / norms
    keep_A, keep_c = [], []
    for a, b in zip(A, c):
        for idx, other in enumerate(keep_A):
            if np.allclose(a, other, atol=1e-10):
                keep_c[idx] = min(keep_c[idx], b)
                break
        else:
            keep_A.append(a)
            keep_c.append(b)
    return np.array(keep_A), np.array(keep_c)


def _halfspaces(A: np.ndarray, c: np.ndarray, box) -> tuple[np.ndarray, np.ndarray]:
    if box is None:
        return A, c
    Ab, cb = box.halfspaces()
    return dedupe_halfspaces(np.vstack([A, Ab]), np.concatenate([c, cb]))


# ---------------------------------------------------------------------------
# lines


def line_segments(A: np.ndarray, c: np.ndarray, t: np.ndarray, b: np.ndarray):
    """Parameter interval of ``t + lam b`` inside ``A x <= c``; returns (lo, hi, hit)."""
    ab = b @ A.T
    rhs = c[None, :] - t @ A.T
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = rhs / ab
    pos = ab > EDGE_TOL
    neg = ab < -EDGE_TOL
    hi = np.where(pos, ratio, np.inf).min(axis=1)
    lo = np.where(neg, ratio, -np.inf).max(axis=1)
    blocked = np.any(~pos & ~neg & (rhs < 0), axis=1)
    hit = ~blocked & (hi - lo > EDGE_TOL)
    return lo, hi, hit


def _clip_segments(p: np.ndarray, q: np.ndarray, box):
    """Clip segments [p, q] to the box; returns the clipped endpoints and a validity mask."""
    if box is None:
        return p, q, np.ones(len(p), dtype=bool)
    lo_b, hi_b = np.array(box.lo), np.array(box.hi)
    d = q - p
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = (lo_b - BOX_TOL - p) / d
        t2 = (hi_b + BOX_TOL - p) / d
    flat = np.abs(d) <= EDGE_TOL
    inside = (p >= lo_b - BOX_TOL) & (p <= hi_b + BOX_TOL)
    enter = np.where(flat, np.where(inside, 0.0, np.inf), np.minimum(t1, t2))
    leave = np.where(flat, np.where(inside, 1.0, -np.inf), np.maximum(t1, t2))
    a = np.clip(enter.max(axis=1), 0.0, 1.0)
    e = np.clip(leave.min(axis=1), 0.0, 1.0)
    valid = e - a > EDGE_TOL
    return p + a[:, None] * d, p + e[:, None] * d, valid


def _segment_moments(p: np.ndarray, q: np.ndarray, r: int, valid: np.ndarray) -> np.ndarray:
    lengths = np.linalg.norm(q - p, axis=1) * valid
    return simplex_moments(np.stack([p, q], axis=1), r, volumes=lengths)


# ---------------------------------------------------------------------------
# planes


def polygon_edges(A: np.ndarray, c: np.ndarray, t: np.ndarray, B: np.ndarray) -> dict:
    """Edges of the polygons ``{y : (B^T a_f) . y <= c_f - a_f . t}``, one candidate per facet.

    Edges are oriented counterclockwise, so the end of the edge of facet f is
    the start of the edge of facet ``next[f]``.
    """
    alpha = np.einsum("fn,Nnk->Nfk", A, B)
    beta = c[None, :] - t @ A.T
    norm = np.linalg.norm(alpha, axis=2)
    usable = norm > 1e-12
    safe = np.where(usable, norm, 1.0)
    normal = alpha / safe[..., None]
    y0 = normal * (beta / safe)[..., None]
    direction = np.stack([-normal[..., 1], normal[..., 0]], axis=2)
    den = np.einsum("Ngk,Nfk->Nfg", alpha, direction)
    num = beta[:, None, :] - np.einsum("Ngk,Nfk->Nfg", alpha, y0)
    F = A.shape[0]
    eye = np.eye(F, dtype=bool)[None]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = num / den
    upper = (den > EDGE_TOL) & ~eye
    lower = (den < -EDGE_TOL) & ~eye
    hi_all = np.where(upper, ratio, np.inf)
    lo_all = np.where(lower, ratio, -np.inf)
    tau_hi = hi_all.min(axis=2)
    tau_lo = lo_all.max(axis=2)
    nxt = hi_all.argmin(axis=2)
    blocked = np.any(~upper & ~lower & ~eye & (num < -EDGE_TOL), axis=2)
    valid = usable[...] & ~blocked & np.isfinite(tau_hi) & np.isfinite(tau_lo) & (tau_hi - tau_lo > EDGE_TOL)
    tau_hi = np.where(valid, tau_hi, 0.0)
    tau_lo = np.where(valid, tau_lo, 0.0)
    start = y0 + tau_lo[..., None] * direction
    end = y0 + tau_hi[..., None] * direction
    return {"normal": normal, "direction": direction, "start": start, "end": end,
            "valid": valid, "next": nxt}


def _to_ambient(t: np.ndarray, B: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Map plane coordinates ``(N, F, 2)`` to ambient points ``(N, F, n)``."""
    return t[:, None, :] + np.einsum("Nnk,Nfk->Nfn", B, y)


def _flatten(x: np.ndarray) -> np.ndarray:
    return x.reshape(-1, x.shape[-1])


# ---------------------------------------------------------------------------
# normal-cone moments


@lru_cache(maxsize=None)
def _ray_join_weights(s: int, v: int) -> tuple[float, ...]:
    """Weights of ``nu^{s-m} Q_V^{m/2}`` in the moment of a ray joined with a v-dim subspace."""
    out = []
    for m in range(0, s + 1, 2):
        radial = beta_fn((s - m + 1) / 2, (m + v) / 2) / 2
        out.append(math.comb(s, m) * radial * 2 * float(omega(v + m) / omega(m + 1)))
    return tuple(out)


def ray_join_moment(nu: np.ndarray, q_perp: np.ndarray, s: int, v: int) -> np.ndarray:
    """``int u^s`` over the sphere of (ray nu) ⊕ V with ``q_perp`` the metric of V (dense rows)."""
    n = nu.shape[1]
    if v == 0:
        return _dense.vec_pow(nu, s)
    weights = _ray_join_weights(s, v)
    total = np.zeros((len(nu), _dense.size(n, s)))
    for idx, m in enumerate(range(0, s + 1, 2)):
        part = _dense.mul(_dense.vec_pow(nu, s - m), s - m, _dense.power(q_perp, 2, m // 2, n), m, n)
        total += weights[idx] * part
    return total


def arc_moments(e: np.ndarray, f: np.ndarray, angle: np.ndarray, s: int) -> np.ndarray:
    """``int_0^angle (cos t e + sin t f)^s dt`` for batches of arcs (Gauss-Legendre, exact to rounding)."""
    x, w = np.polynomial.legendre.leggauss(GL_NODES)
    x, w = 0.5 * (x + 1.0), 0.5 * w
    n = e.shape[1]
    total = np.zeros((len(e), _dense.size(n, s)))
    for xi, wi in zip(x, w):
        theta = angle * xi
        u = np.cos(theta)[:, None] * e + np.sin(theta)[:, None] * f
        total += (wi * angle)[:, None] * _dense.vec_pow(u, s)
    return total


# ---------------------------------------------------------------------------
# slice measures


def intrinsic_line(A, c, t, B, j: int, r: int, s: int, box) -> np.ndarray:
    """Intrinsic measures of line slices (k = 1): j = 1 is length, j = 0 the two endpoints."""
    b = B[:, :, 0]
    n = t.shape[1]
    if j == 1:
        if s:
            return np.zeros((len(t), _dense.size(n, r + s)))
        Ab, cb = _halfspaces(A, c, box)
        lo, hi, hit = line_segments(Ab, cb, t, b)
        lo, hi = np.where(hit, lo, 0.0), np.where(hit, hi, 0.0)
        return _segment_moments(t + lo[:, None] * b, t + hi[:, None] * b, r, hit)
    lo, hi, hit = line_segments(A, c, t, b)
    lo, hi = np.where(hit, lo, 0.0), np.where(hit, hi, 0.0)
    total = np.zeros((len(t), _dense.size(n, r + s)))
    for lam, sign in ((lo, -1.0), (hi, 1.0)):
        x = t + lam[:, None] * b
        keep = hit & (box.contains(x) if box is not None else True)
        term = _dense.mul(_dense.vec_pow(x, r), r, _dense.vec_pow(sign * b, s), s, n)
        total += keep[:, None] * term
    return total


def extrinsic_line(A, c, t, B, r: int, s: int, box) -> np.ndarray:
    """Extrinsic phi_0 of line slices: endpoint cones are half-spaces of R^n."""
    b = B[:, :, 0]
    n = t.shape[1]
    lo, hi, hit = line_segments(A, c, t, b)
    lo, hi = np.where(hit, lo, 0.0), np.where(hit, hi, 0.0)
    q_perp = _dense.metric(len(t), n) - _dense.vec_pow(b, 2)
    total = np.zeros((len(t), _dense.size(n, r + s)))
    for lam, sign in ((lo, -1.0), (hi, 1.0)):
        x = t + lam[:, None] * b
        keep = hit & (box.contains(x) if box is not None else True)
        cone = ray_join_moment(sign * b, q_perp, s, n - 1)
        total += keep[:, None] * _dense.mul(_dense.vec_pow(x, r), r, cone, s, n)
    return total


def _edge_terms(A, c, t, B, r: int, box):
    """Position moments of polygon edges clipped to the box, with their ambient normals."""
    N, n, _ = B.shape
    F = A.shape[0]
    edges = polygon_edges(A, c, t, B)
    p = _flatten(_to_ambient(t, B, edges["start"]))
    q = _flatten(_to_ambient(t, B, edges["end"]))
    valid = edges["valid"].reshape(-1)
    p, q, inside = _clip_segments(p, q, box)
    pos = _segment_moments(p, q, r, valid & inside)
    nu = _flatten(np.einsum("Nnk,Nfk->Nfn", B, edges["normal"]))
    return pos, nu, (valid & inside), N, F, edges


def intrinsic_plane(A, c, t, B, j: int, r: int, s: int, box) -> np.ndarray:
    """Intrinsic measures of plane slices (k = 2) for j = 0, 1, 2."""
    N, n, _ = B.shape
    rank = r + s
    if j == 2:
        if s:
            return np.zeros((N, _dense.size(n, rank)))
        Ab, cb = _halfspaces(A, c, box)
        edges = polygon_edges(Ab, cb, t, B)
        y0, y1 = edges["start"], edges["end"]
        signed = 0.5 * (y0[..., 0] * y1[..., 1] - y0[..., 1] * y1[..., 0]) * edges["valid"]
        tri = np.stack([np.broadcast_to(t[:, None, :], (N, Ab.shape[0], n)),
                        _to_ambient(t, B, y0), _to_ambient(t, B, y1)], axis=2)
        rows = simplex_moments(tri.reshape(-1, 3, n), r, volumes=signed.reshape(-1))
        return rows.reshape(N, Ab.shape[0], -1).sum(axis=1)
    if j == 1:
        pos, nu, keep, _, F, _ = _edge_terms(A, c, t, B, r, box)
        rows = _dense.mul(pos, r, _dense.vec_pow(nu, s), s, n) * keep[:, None]
        return rows.reshape(N, F, -1).sum(axis=1)
    if j == 0:
        F = A.shape[0]
        edges = polygon_edges(A, c, t, B)
        valid = edges["valid"]
        nxt = edges["next"]
        vertex = _to_ambient(t, B, edges["end"])
        n_f = edges["normal"]
        n_g = np.take_along_axis(n_f, nxt[..., None], axis=1)
        cross = n_f[..., 0] * n_g[..., 1] - n_f[..., 1] * n_g[..., 0]
        angle = np.arctan2(cross, np.sum(n_f * n_g, axis=2))
        angle = np.where(valid, np.clip(angle, 0.0, np.pi), 0.0)
        e = _flatten(np.einsum("Nnk,Nfk->Nfn", B, n_f))
        f = _flatten(np.einsum("Nnk,Nfk->Nfn", B, edges["direction"]))
        cone = arc_moments(e, f, angle.reshape(-1), s)
        keep = valid.reshape(-1)
        x = _flatten(vertex)
        if box is not None:
            keep = keep & box.contains(x)
        rows = _dense.mul(_dense.vec_pow(x, r), r, cone, s, n) * keep[:, None]
        return rows.reshape(N, F, -1).sum(axis=1)
    raise ValueError("plane slices support j in {0, 1, 2}")


def extrinsic_plane_edges(A, c, t, B, r: int, s: int, box) -> np.ndarray:
    """Extrinsic phi_1 of plane slices: each edge cone is its in-plane normal joined with L^perp."""
    N, n, _ = B.shape
    pos, nu, keep, _, F, _ = _edge_terms(A, c, t, B, r, box)
    q_perp = _dense.metric(N, n) - _dense.subspace_metric(B)
    q_perp = np.repeat(q_perp, F, axis=0)
    cone = ray_join_moment(nu, q_perp, s, n - 2)
    rows = _dense.mul(pos, r, cone, s, n) * keep[:, None]
    return rows.reshape(N, F, -1).sum(axis=1)

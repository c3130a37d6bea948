"""Convex polytopes at desk scale.

A :class:`Polytope` is built from a point cloud.  Facets come from testing
n-subsets of vertices for supporting hyperplanes (qhull takes over for large
inputs), and lower faces are intersections of facet vertex sets.  Every face
carries an orthonormal frame of its affine hull and the list of facets that
contain it, which is all the normal-cone code needs.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from . import _dense
from .symtensor import SymTensor

__all__ = [
    "DegenerateError",
    "Box",
    "Face",
    "NormalCone",
    "Polytope",
    "FlatFrame",
    "SliceResult",
    "build",
    "catalog",
    "load_body",
    "face_volume",
    "face_moment_tensor",
    "normal_cone",
    "slice_polytope",
    "simplex_moments",
]

TOL = 1e-9
SNAP = 1e-12
VERTEX_CAP = 64
BRUTE_FORCE_LIMIT = 20_000


class DegenerateError(ValueError):
    """The point set does not span its ambient space."""


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``lo <= x <= hi`` used as the localizing Borel set."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi):
            raise ValueError("box bounds must have equal length")
        if any(a > b for a, b in zip(lo, hi)):
            raise ValueError("box needs lo <= hi in every coordinate")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def parse(cls, values: Sequence[float]) -> "Box":
        """Build from interleaved bounds ``[lo1, hi1, lo2, hi2, ...]``."""
        values = [float(v) for v in values]
        if len(values) % 2:
            raise ValueError("box needs an even number of bounds")
        return cls(tuple(values[0::2]), tuple(values[1::2]))

    @property
    def dim(self) -> int:
        return len(self.lo)

    def halfspaces(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.dim
        eye = np.eye(n)
        return np.vstack([eye, -eye]), np.concatenate([np.array(self.hi), -np.array(self.lo)])

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        return np.all((points >= np.array(self.lo) - TOL) & (points <= np.array(self.hi) + TOL), axis=1)

    def to_json(self):
        return {"lo": list(self.lo), "hi": list(self.hi)}


@dataclass(frozen=True)
class Face:
    dim: int
    index: int
    vertex_ids: tuple
    point: np.ndarray = field(repr=False)
    basis: np.ndarray = field(repr=False)
    facet_ids: tuple = ()

    @property
    def face_id(self) -> tuple[int, int]:
        return (self.dim, self.index)


@dataclass(frozen=True)
class NormalCone:
    face_id: tuple
    generators: np.ndarray
    subspace_basis: np.ndarray

    @property
    def dim(self) -> int:
        return self.subspace_basis.shape[1]


def _orthonormal_span(vectors: np.ndarray, tol: float = TOL) -> np.ndarray:
    """Columns spanning the row space of ``vectors`` (``m x n``)."""
    n = vectors.shape[1] if vectors.ndim == 2 else 0
    if vectors.size == 0:
        return np.zeros((n, 0))
    _, sv, vt = np.linalg.svd(vectors, full_matrices=True)
    scale = max(1.0, sv[0]) if sv.size else 1.0
    rank = int(np.sum(sv > tol * scale))
    return vt[:rank].T


def _orthogonal_complement(basis: np.ndarray, n: int) -> np.ndarray:
    if basis.shape[1] == 0:
        return np.eye(n)
    _, _, vt = np.linalg.svd(basis.T, full_matrices=True)
    return vt[basis.shape[1]:].T


def _affine_rank(points: np.ndarray) -> int:
    if len(points) <= 1:
        return 0
    return _orthonormal_span(points[1:] - points[0]).shape[1]


def _dedupe_points(points: np.ndarray, tol: float = SNAP) -> np.ndarray:
    kept: list[np.ndarray] = []
    for p in points:
        if all(np.max(np.abs(p - q)) > tol for q in kept):
            kept.append(p)
    return np.array(kept).reshape(-1, points.shape[1])


class Polytope:
    """A full-dimensional convex polytope with its complete face lattice."""

    def __init__(self, vertices: np.ndarray, facet_normals: np.ndarray, facet_offsets: np.ndarray,
                 faces: list[list[Face]], name: str = ""):
        self.vertices = vertices
        self.facet_normals = facet_normals
        self.facet_offsets = facet_offsets
        self.faces = faces
        self.name = name
        self._triangulations: dict = {}

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    dim_ambient = dim

    @property
    def facets(self) -> list[Face]:
        return self.faces[self.dim - 1]

    def face(self, face_id: tuple[int, int]) -> Face:
        dim, index = face_id
        return self.faces[dim][index]

    def face_counts(self) -> list[int]:
        return [len(self.faces[j]) for j in range(self.dim)]

    @cached_property
    def center(self) -> np.ndarray:
        return self.vertices.mean(axis=0)

    @cached_property
    def circumradius(self) -> float:
        """Radius of the smallest ball about :attr:`center` holding the body."""
        return float(np.max(np.linalg.norm(self.vertices - self.center, axis=1)))

    def h_representation(self) -> tuple[np.ndarray, np.ndarray]:
        return self.facet_normals, self.facet_offsets

    def contains(self, points: np.ndarray, tol: float = TOL) -> np.ndarray:
        points = np.atleast_2d(points)
        return np.all(points @ self.facet_normals.T <= self.facet_offsets + tol, axis=1)

    def subfaces(self, face: Face) -> list[Face]:
        if face.dim == 0:
            return []
        ids = set(face.vertex_ids)
        return [g for g in self.faces[face.dim - 1] if set(g.vertex_ids) <= ids]

    def triangulation(self, face: Face) -> list[tuple[int, ...]]:
        """Pulling triangulation of a face into simplices of the same dimension."""
        key = face.face_id
        if key not in self._triangulations:
            if face.dim == 0:
                simplices = [face.vertex_ids]
            else:
                apex = min(face.vertex_ids)
                simplices = []
                for sub in self.subfaces(face):
                    if apex in sub.vertex_ids:
                        continue
                    simplices.extend((apex,) + s for s in self.triangulation(sub))
            self._triangulations[key] = simplices
        return self._triangulations[key]

    def to_json(self) -> dict:
        return {"name": self.name, "dim": self.dim, "vertices": self.vertices.tolist()}

    def transformed(self, matrix: np.ndarray, shift: np.ndarray | None = None) -> "Polytope":
        """Image under ``x -> matrix @ x + shift``."""
        shift = np.zeros(self.dim) if shift is None else np.asarray(shift, dtype=float)
        return build(self.vertices @ np.asarray(matrix, dtype=float).T + shift, name=self.name)

    def __repr__(self):
        return f"Polytope(name={self.name!r}, dim={self.dim}, f={self.face_counts()})"


def _facet_planes_brute_force(points: np.ndarray) -> list[tuple[np.ndarray, float]]:
    n = points.shape[1]
    planes: dict[frozenset, tuple[np.ndarray, float]] = {}
    for subset in itertools.combinations(range(len(points)), n):
        base = points[list(subset)]
        diffs = base[1:] - base[0]
        _, sv, vt = np.linalg.svd(diffs, full_matrices=True)
        if sv.size and sv[-1] <= TOL * max(1.0, sv[0]):
            continue
        normal = vt[-1]
        offset = float(normal @ base[0])
        side = points @ normal - offset
        if np.all(side <= TOL):
            pass
        elif np.all(side >= -TOL):
            normal, offset, side = -normal, -offset, -side
        else:
            continue
        on_plane = frozenset(np.flatnonzero(np.abs(side) <= TOL).tolist())
        planes.setdefault(on_plane, (normal, offset))
    return list(planes.values())


def _facet_planes_qhull(points: np.ndarray) -> list[tuple[np.ndarray, float]]:
    hull = ConvexHull(points)
    planes: dict[frozenset, tuple[np.ndarray, float]] = {}
    for eq in hull.equations:
        normal = eq[:-1] / np.linalg.norm(eq[:-1])
        offset = -eq[-1] / np.linalg.norm(eq[:-1])
        side = points @ normal - offset
        on_plane = frozenset(np.flatnonzero(np.abs(side) <= TOL).tolist())
        planes.setdefault(on_plane, (normal, offset))
    return list(planes.values())


def _facet_planes_1d(points: np.ndarray) -> list[tuple[np.ndarray, float]]:
    x = points[:, 0]
    return [(np.array([-1.0]), float(-x.min())), (np.array([1.0]), float(x.max()))]


def build(vertices, name: str = "", cap: int = VERTEX_CAP, method: str = "auto") -> Polytope:
    """Build a full-dimensional polytope and its face lattice from a point set.

    ``method`` selects facet enumeration: ``"brute"`` tests every n-subset of
    points, ``"qhull"`` uses scipy's hull, ``"auto"`` picks brute force when
    the number of subsets is small.
    """
    points = np.asarray(vertices, dtype=float)
    if points.ndim != 2 or points.shape[0] == 0:
        raise ValueError("vertices must be a non-empty 2-d array")
    points = _dedupe_points(points)
    n = points.shape[1]
    if len(points) > cap:
        raise ValueError(f"{len(points)} points exceed the vertex cap of {cap}")
    if len(points) < n + 1 or _affine_rank(points) < n:
        raise DegenerateError(f"points do not span R^{n}")

    if n == 1:
        planes = _facet_planes_1d(points)
    elif method == "brute" or (method == "auto" and math.comb(len(points), n) <= BRUTE_FORCE_LIMIT):
        planes = _facet_planes_brute_force(points)
    elif method in ("qhull", "auto"):
        planes = _facet_planes_qhull(points)
    else:
        raise ValueError(f"unknown facet method {method!r}")

    normals = np.array([p[0] for p in planes])
    offsets = np.array([p[1] for p in planes])

    # keep extreme points only: the facets through a vertex have normals spanning R^n
    incidence = np.abs(points @ normals.T - offsets) <= TOL
    extreme = [i for i in range(len(points))
               if np.linalg.matrix_rank(normals[incidence[i]], tol=1e-8) == n]
    points = points[extreme]
    incidence = incidence[extreme]

    order = np.lexsort(points.T[::-1])
    points = points[order]
    incidence = incidence[order]

    facet_sets = [frozenset(np.flatnonzero(incidence[:, f]).tolist()) for f in range(len(planes))]
    facet_order = sorted(range(len(planes)), key=lambda f: sorted(facet_sets[f]))
    normals = normals[facet_order]
    offsets = offsets[facet_order]
    facet_sets = [facet_sets[f] for f in facet_order]

    levels: dict[int, set[frozenset]] = {n - 1: set(facet_sets)}
    for d in range(n - 1, 0, -1):
        lower = set()
        for g in levels[d]:
            for f in facet_sets:
                if g <= f:
                    continue
                inter = g & f
                if inter and _affine_rank(points[sorted(inter)]) == d - 1:
                    lower.add(inter)
        levels[d - 1] = lower

    faces: list[list[Face]] = []
    for d in range(n):
        level = []
        for index, ids in enumerate(sorted(levels[d], key=sorted)):
            ids_sorted = tuple(sorted(ids))
            pts = points[list(ids_sorted)]
            anchor = pts[0]
            basis = _orthonormal_span(pts[1:] - anchor) if d else np.zeros((n, 0))
            containing = tuple(f for f, fs in enumerate(facet_sets) if ids <= fs)
            level.append(Face(d, index, ids_sorted, anchor, basis, containing))
        faces.append(level)
    all_ids = tuple(range(len(points)))
    faces.append([Face(n, 0, all_ids, points[0], np.eye(n), ())])
    return Polytope(points, normals, offsets, faces, name)


def catalog(name: str, n: int) -> Polytope:
    """Standard bodies: ``simplex`` = conv{0, e_i}, ``cube`` = [0,1]^n, ``crosspolytope`` = conv{+-e_i}."""
    if not 1 <= n <= 6:
        raise ValueError("catalog bodies are available for 1 <= n <= 6")
    eye = np.eye(n)
    if name == "simplex":
        pts = np.vstack([np.zeros(n), eye])
    elif name == "cube":
        pts = np.array(list(itertools.product([0.0, 1.0], repeat=n)))
    elif name == "crosspolytope":
        pts = np.vstack([eye, -eye])
    else:
        raise ValueError(f"unknown catalog body {name!r}")
    return build(pts, name=f"{name}:{n}")


def load_body(spec: str) -> Polytope:
    """Load ``cube:3``-style catalog names or a JSON file ``{name, dim, vertices}``."""
    if ":" in spec and not Path(spec).exists():
        name, _, dim = spec.partition(":")
        return catalog(name, int(dim))
    data = json.loads(Path(spec).read_text())
    vertices = np.asarray(data["vertices"], dtype=float)
    if "dim" in data and vertices.shape[1] != int(data["dim"]):
        raise ValueError("vertex length does not match 'dim'")
    return build(vertices, name=data.get("name", Path(spec).stem))


# ---------------------------------------------------------------------------
# volumes and moments


def _simplex_volumes(simplices: np.ndarray) -> np.ndarray:
    """Volumes of a batch of j-simplices given as ``(S, j+1, n)`` vertex arrays."""
    count, npts, _ = simplices.shape
    d = npts - 1
    if d == 0:
        return np.ones(count)
    edges = simplices[:, 1:, :] - simplices[:, :1, :]
    gram = edges @ np.transpose(edges, (0, 2, 1))
    return np.sqrt(np.clip(np.linalg.det(gram), 0.0, None)) / math.factorial(d)


def simplex_moments(simplices: np.ndarray, r: int, volumes: np.ndarray | None = None) -> np.ndarray:
    """Dense coefficient rows of ``int_simplex x^r`` for a batch of simplices.

    Uses ``vol * d! r! / (d+r)! * h_r(v_0, ..., v_d)`` where ``h_r`` is the
    complete homogeneous sum of products of vertex powers.
    """
    simplices = np.asarray(simplices, dtype=float)
    count, npts, n = simplices.shape
    d = npts - 1
    if volumes is None:
        volumes = _simplex_volumes(simplices)
    # h[q] accumulates sum over |a| = q of prod v_i^{a_i} over vertices seen so far
    h = [np.ones((count, 1))] + [np.zeros((count, _dense.size(n, q))) for q in range(1, r + 1)]
    for m in range(npts):
        pows = [np.ones((count, 1))] + [_dense.vec_pow(simplices[:, m, :], a) for a in range(1, r + 1)]
        new = []
        for q in range(r + 1):
            acc = np.zeros((count, _dense.size(n, q)))
            for a in range(q + 1):
                acc += _dense.mul(pows[a], a, h[q - a], q - a, n)
            new.append(acc)
        h = new
    factor = math.factorial(d) * math.factorial(r) / math.factorial(d + r)
    return (volumes * factor)[:, None] * h[r]


def face_points(P: Polytope, face: Face) -> np.ndarray:
    return P.vertices[list(face.vertex_ids)]


def _face_simplices(P: Polytope, face: Face) -> np.ndarray:
    return np.array([P.vertices[list(s)] for s in P.triangulation(face)])


def face_volume(P: Polytope, face: Face) -> float:
    """The j-dimensional volume of a j-face (1 for vertices)."""
    if face.dim == 0:
        return 1.0
    return float(_simplex_volumes(_face_simplices(P, face)).sum())


def clip_to_halfspaces(points: np.ndarray, anchor: np.ndarray, basis: np.ndarray,
                       A: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """Simplices covering ``conv(points) ∩ {A x <= b}`` inside an affine subspace.

    ``points`` lie in ``anchor + span(basis)``.  The result is an array of
    shape ``(S, d+1, n)`` or ``None`` when the intersection has no
    d-dimensional volume.
    """
    d = basis.shape[1]
    n = points.shape[1]
    if d == 0:
        inside = np.all(A @ points[0] <= b + TOL)
        return points[None, :1, :] if inside else None
    local = (points - anchor) @ basis
    A_loc = A @ basis
    b_loc = b - A @ anchor
    for a_row, b_val in zip(A_loc, b_loc):
        side = local @ a_row - b_val
        if np.all(side <= TOL):
            continue
        if np.all(side >= -TOL):
            return None
        local = _clip_once(local, side)
        if local is None:
            return None
    if d == 1:
        lo, hi = local[:, 0].min(), local[:, 0].max()
        if hi - lo <= TOL:
            return None
        seg = np.array([[lo], [hi]])
        return (anchor + seg @ basis.T)[None]
    try:
        sub = build(local, cap=10_000)
    except DegenerateError:
        return None
    simplices = [sub.vertices[list(s)] for s in sub.triangulation(sub.faces[d][0])]
    return np.array([anchor + s @ basis.T for s in simplices]).reshape(-1, d + 1, n)


def _clip_once(local: np.ndarray, side: np.ndarray) -> np.ndarray | None:
    inside = side <= TOL
    kept = [local[inside]]
    for i in np.flatnonzero(side < -TOL):
        for j in np.flatnonzero(side > TOL):
            t = side[i] / (side[i] - side[j])
            kept.append((local[i] + t * (local[j] - local[i]))[None])
    out = _dedupe_points(np.vstack(kept), tol=1e-12)
    d = local.shape[1]
    if len(out) < d + 1 or _affine_rank(out) < d:
        return None
    if d >= 2 and len(out) > d + 1:
        try:
            out = out[np.sort(ConvexHull(out).vertices)]
        except QhullError:  # flat inputs; keep the full set
            pass
    return out


def face_moment_tensor(P: Polytope, face: Face, r: int, box: Box | None = None) -> SymTensor:
    """``int_{F ∩ box} x^r dH^j`` as a float tensor over R^n."""
    n = P.dim
    if face.dim == 0:
        x = P.vertices[face.vertex_ids[0]]
        if box is not None and not box.contains(x)[0]:
            return SymTensor.zero(n, r)
        return _dense.to_symtensor(_dense.vec_pow(x[None], r)[0], n, r)
    if box is None:
        simplices = _face_simplices(P, face)
    else:
        A, b = box.halfspaces()
        basis = face.basis if face.dim < n else np.eye(n)
        simplices = clip_to_halfspaces(face_points(P, face), face.point, basis, A, b)
        if simplices is None:
            return SymTensor.zero(n, r)
    rows = simplex_moments(simplices, r)
    return _dense.to_symtensor(rows.sum(axis=0), n, r)


def normal_cone(P: Polytope, face: Face) -> NormalCone:
    """Outer normal cone of a proper face, generated by the normals of its facets."""
    if face.dim >= P.dim:
        raise ValueError("the polytope itself has no normal cone")
    generators = P.facet_normals[list(face.facet_ids)]
    complement = _orthogonal_complement(face.basis, P.dim)
    return NormalCone(face.face_id, generators, complement)


# ---------------------------------------------------------------------------
# slicing by affine flats


@dataclass(frozen=True)
class FlatFrame:
    """Affine k-flat ``translation + span(basis)`` with orthonormal ``basis`` (n x k)."""

    basis: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=float)
        t = np.asarray(self.translation, dtype=float)
        if basis.ndim != 2 or basis.shape[0] != t.shape[0]:
            raise ValueError("basis must be n x k and translation of length n")
        if not np.allclose(basis.T @ basis, np.eye(basis.shape[1]), atol=1e-10):
            raise ValueError("flat basis is not orthonormal")
        # keep the translation in the orthogonal complement of the direction space
        t = t - basis @ (basis.T @ t)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "translation", t)

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    @property
    def k(self) -> int:
        return self.basis.shape[1]

    def to_ambient(self, local: np.ndarray) -> np.ndarray:
        return self.translation + np.atleast_2d(local) @ self.basis.T


@dataclass(frozen=True)
class SliceResult:
    status: str  # "ok", "empty" or "degenerate"
    frame: FlatFrame
    polytope: Polytope | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def slice_polytope(P: Polytope, frame: FlatFrame) -> SliceResult:
    """Intersect P with an affine flat; the result lives in the flat's coordinates."""
    n, k = P.dim, frame.k
    if not 1 <= k <= n - 1:
        raise ValueError("flat dimension must satisfy 1 <= k <= n-1")
    B, t = frame.basis, frame.translation
    found = []
    for face in P.faces[n - k]:
        C = face.basis
        system = np.hstack([B, -C])
        if abs(np.linalg.det(system)) < 1e-12:
            continue
        sol = np.linalg.solve(system, face.point - t)
        x = t + B @ sol[:k]
        if P.contains(x)[0]:
            found.append(sol[:k])
    if not found:
        return SliceResult("empty", frame)
    local = _dedupe_points(np.array(found), tol=1e-10)
    if len(local) < k + 1 or _affine_rank(local) < k:
        return SliceResult("degenerate", frame)
    try:
        return SliceResult("ok", frame, build(local, name=f"slice of {P.name}", cap=10_000))
    except DegenerateError:
        return SliceResult("degenerate", frame)

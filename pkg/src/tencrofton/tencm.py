"""Tensorial curvature measures of polytopes.

For a polytope P, a face order j, a Borel set given by an optional box and
tensor ranks r, s::

    phi_j^{r,s,0}(P, box) = sum_{F in faces_j(P)} int_{F ∩ box} x^r  *  int_{N(P,F) ∩ S} u^s

with an extra factor Q(F) (metric of the face's direction space) for the
generalized measure (``eps=1``).  Measures of order j = dim P integrate x^r over
the body.  Intrinsic measures of a body lying in a flat E are the same sums
taken inside E and then pushed forward to the ambient space.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.special import beta as beta_fn

from . import _dense
from .exact import ExactScalar, binom, gamma, omega, rgamma, rising
from .polytope import (Box, DegenerateError, Face, FlatFrame, NormalCone, Polytope, build,
                       clip_to_halfspaces, normal_cone, simplex_moments)
from .symtensor import SymTensor, q_metric, q_of_subspace, sym_mul

__all__ = [
    "MeasureSpec",
    "TensorMeasureValue",
    "cone_sphere_moment",
    "full_sphere_moment",
    "join_sphere_moment",
    "solid_angle_3d",
    "phi",
    "phi_generalized",
    "minkowski_tensor",
    "extrinsic_phi_of_flat_body",
    "psi_coefficients",
    "psi_inverse_coefficients",
    "psi_from_phi",
    "phi_from_psi",
    "intrinsic_to_extrinsic",
    "intrinsic_to_extrinsic_coefficients",
    "mcmullen_face_sum",
]

ARC_TOL = 1e-13
SIMPLEX_QUAD_TOL = 1e-12


@dataclass(frozen=True)
class MeasureSpec:
    """Index data of a tensorial curvature measure.

    ``ambient_dim`` is the dimension of the space the measure lives in: n for
    extrinsic measures, k for intrinsic measures inside a k-flat.
    """

    ambient_dim: int
    j: int
    r: int = 0
    s: int = 0
    eps: int = 0
    kind: str = "extrinsic"

    def __post_init__(self):
        if self.kind not in ("extrinsic", "intrinsic"):
            raise ValueError("kind must be 'extrinsic' or 'intrinsic'")
        if min(self.ambient_dim, self.j + 1, self.r + 1, self.s + 1) < 1:
            raise ValueError("need ambient_dim >= 1 and j, r, s >= 0")
        if self.eps not in (0, 1):
            raise ValueError("eps must be 0 or 1")
        if self.eps == 1 and not 1 <= self.j <= self.ambient_dim - 1:
            raise ValueError("the generalized measure needs 1 <= j <= ambient_dim - 1")

    @property
    def rank(self) -> int:
        return self.r + self.s + 2 * self.eps

    @property
    def vanishes_by_convention(self) -> bool:
        return self.j > self.ambient_dim or (self.j == self.ambient_dim and self.s != 0)

    def to_json(self) -> dict:
        return {"ambient_dim": self.ambient_dim, "j": self.j, "r": self.r, "s": self.s,
                "eps": self.eps, "kind": self.kind}


@dataclass(frozen=True)
class TensorMeasureValue:
    spec: MeasureSpec
    value: SymTensor

    def to_json(self) -> dict:
        return {"spec": self.spec.to_json(), "tensor": self.value.to_json()}


# ---------------------------------------------------------------------------
# spherical moments of cones


def full_sphere_constant(m: int, q: int) -> ExactScalar:
    """``2 omega_{m+q} / omega_{q+1}`` for even q, else 0."""
    if q % 2:
        return ExactScalar(0)
    return 2 * omega(m + q) / omega(q + 1)


def full_sphere_moment(m: int, q: int, subspace_basis) -> SymTensor:
    """``int_{S^{m-1}} w^q`` over the unit sphere of an m-dimensional subspace."""
    basis = np.asarray(subspace_basis, dtype=float)
    if basis.ndim != 2 or basis.shape[1] != m:
        raise ValueError("subspace basis must be an n x m array")
    n = basis.shape[0]
    if q % 2:
        return SymTensor.zero(n, q)
    q_sub = q_of_subspace(basis, n) if m else SymTensor.zero(n, 2)
    return (q_sub ** (q // 2)).scale(float(full_sphere_constant(m, q)))


@lru_cache(maxsize=None)
def _gauss_legendre(m: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (x + 1.0), 0.5 * w


def _arc_moment(e: np.ndarray, f: np.ndarray, angle: float, s: int) -> np.ndarray:
    """Dense coefficients of ``int_0^angle (cos t e + sin t f)^s dt`` with adaptive Gauss-Legendre."""
    previous = None
    for m in (16, 32, 64, 128, 256):
        x, w = _gauss_legendre(m)
        theta = angle * x
        u = np.cos(theta)[:, None] * e + np.sin(theta)[:, None] * f
        value = angle * (w @ _dense.vec_pow(u, s))
        if previous is not None and np.max(np.abs(value - previous)) <= ARC_TOL * max(1.0, angle):
            return value
        previous = value
    return value


@lru_cache(maxsize=None)
def _collapsed_simplex_rule(d: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature on the standard d-simplex {lambda >= 0, sum <= 1} via collapsed coordinates.

    ``lambda_i = u_i * prod_{l<i} (1 - u_l)`` maps the unit cube onto the simplex
    with Jacobian ``prod_i (1 - u_i)^(d-1-i)``.
    """
    x, w = _gauss_legendre(m)
    u = np.stack([g.ravel() for g in np.meshgrid(*([x] * d), indexing="ij")], axis=1)
    weights = np.prod(np.stack([g.ravel() for g in np.meshgrid(*([w] * d), indexing="ij")], axis=1), axis=1)
    lam = np.empty_like(u)
    remaining = np.ones(u.shape[0])
    for i in range(d):
        lam[:, i] = remaining * u[:, i]
        weights = weights * (1.0 - u[:, i]) ** (d - 1 - i)
        remaining = remaining * (1.0 - u[:, i])
    return lam, weights


def _simplicial_cone_moment(gens: np.ndarray, span: np.ndarray, s: int) -> np.ndarray:
    """Moment of a simplicial cone whose c unit generators (rows, ambient coords) span ``span``.

    Uses ``int_{S ∩ C} h = |det G| int_simplex h(y/|y|) |y|^{-c} d lambda`` with
    ``y = sum lambda_i g_i`` and a collapsed Gauss-Legendre rule.
    """
    local = gens @ span  # c x c
    c = local.shape[0]
    det = abs(np.linalg.det(local))
    d = c - 1
    caps = {2: 128, 3: 48, 4: 24, 5: 14}
    previous = None
    m = 8
    while True:
        lam, w = _collapsed_simplex_rule(d, m)
        full = np.hstack([1.0 - lam.sum(axis=1, keepdims=True), lam])
        y = full @ gens
        norm = np.linalg.norm(y, axis=1)
        u = y / norm[:, None]
        value = det * ((w * norm ** (-c)) @ _dense.vec_pow(u, s))
        if previous is not None and np.max(np.abs(value - previous)) <= SIMPLEX_QUAD_TOL * max(1.0, np.max(np.abs(value))):
            return value
        if m >= caps.get(d, 10):
            return value
        previous = value
        m = 2 * m if d <= 2 else m + 4


def _cone_pieces(gens_local: np.ndarray) -> list[list[int]]:
    """Split a pointed polyhedral cone (generators as rows) into simplicial cones."""
    count, c = gens_local.shape
    if count == c:
        return [list(range(count))]
    axis = gens_local.mean(axis=0)
    axis /= np.linalg.norm(axis)
    projected = gens_local / (gens_local @ axis)[:, None]
    # coordinates inside the hyperplane orthogonal to the axis
    _, _, vt = np.linalg.svd(axis[None, :], full_matrices=True)
    coords = projected @ vt[1:].T
    section = build(coords, cap=10_000)
    lookup = [int(np.argmin(np.linalg.norm(coords - v, axis=1))) for v in section.vertices]
    top = section.faces[c - 1][0]
    return [[lookup[i] for i in simplex] for simplex in section.triangulation(top)]


def _cone_moment_mc(gens: np.ndarray, span: np.ndarray, s: int, rng: np.random.Generator,
                    samples: int) -> tuple[np.ndarray, np.ndarray]:
    local = gens @ span
    c = local.shape[1]
    pieces = _cone_pieces(local)
    z = rng.standard_normal((samples, c))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    inside = np.zeros(samples, dtype=bool)
    for piece in pieces:
        coeffs = np.linalg.solve(local[piece].T, z.T).T
        inside |= np.all(coeffs >= -1e-14, axis=1)
    u = z @ span.T
    vals = _dense.vec_pow(u, s) * inside[:, None] * float(omega(c))
    return vals.mean(axis=0), vals.std(axis=0, ddof=1) / math.sqrt(samples)


def _unit_rows(vectors: np.ndarray) -> np.ndarray:
    return vectors / np.linalg.norm(vectors, axis=1, keepdims=True)


def cone_sphere_moment_dense(generators: np.ndarray, span: np.ndarray, s: int,
                             method: str = "quadrature", rng: np.random.Generator | None = None,
                             samples: int = 200_000) -> np.ndarray:
    """Dense coefficients of ``int_{C ∩ S} u^s`` for the cone generated by the rows of ``generators``.

    ``span`` is an orthonormal basis (columns) of the cone's linear span.
    """
    gens = _unit_rows(np.asarray(generators, dtype=float))
    c = span.shape[1]
    if c == 0:
        raise ValueError("a zero-dimensional cone has no spherical moment")
    if c == 1:
        return _dense.vec_pow(gens[:1], s)[0]
    if c == 2:
        local = gens @ span
        angles = np.arctan2(local[:, 1], local[:, 0])
        # the two extreme rays of a pointed planar cone
        order = np.argsort(angles)
        a, b = local[order[0]], local[order[-1]]
        spread = math.atan2(a[0] * b[1] - a[1] * b[0], a @ b)
        if spread < 0:
            a, b, spread = b, a, -spread
        e = span @ a
        f_local = b - (a @ b) * a
        f_local /= np.linalg.norm(f_local)
        return _arc_moment(e, span @ f_local, spread, s)
    if method == "mc":
        if rng is None:
            raise ValueError("the Monte Carlo tier needs an explicit random generator")
        return _cone_moment_mc(gens, span, s, rng, samples)[0]
    if method != "quadrature":
        raise ValueError(f"unknown cone moment method {method!r}")
    local = gens @ span
    total = np.zeros(_dense.size(span.shape[0], s))
    for piece in _cone_pieces(local):
        total += _simplicial_cone_moment(gens[piece], span, s)
    return total


def cone_sphere_moment(cone: NormalCone, s: int, method: str = "quadrature",
                       rng: np.random.Generator | None = None) -> SymTensor:
    """``int_{N(P,F) ∩ S^{n-1}} u^s`` as a float tensor over R^n.

    Rays are exact, planar wedges use adaptive Gauss-Legendre on the arc, and
    cones of dimension three or more are split into simplicial pieces that are
    integrated by a collapsed Gauss-Legendre rule (or by Monte Carlo when
    ``method="mc"``).
    """
    n = cone.subspace_basis.shape[0]
    row = cone_sphere_moment_dense(cone.generators, cone.subspace_basis, s, method, rng)
    return _dense.to_symtensor(row, n, s)


def solid_angle_3d(g1, g2, g3) -> float:
    """Exact solid angle of the cone spanned by three vectors in R^3."""
    a, b, c = (np.asarray(g, dtype=float) / np.linalg.norm(g) for g in (g1, g2, g3))
    num = abs(np.dot(a, np.cross(b, c)))
    den = 1.0 + a @ b + a @ c + b @ c
    return 2.0 * math.atan2(num, den)


def join_sphere_moment(cone_moments: Sequence[np.ndarray], cone_dim: int, complement: np.ndarray,
                       s: int) -> np.ndarray:
    """Moment of ``C ⊕ V`` for a cone C and a linear subspace V orthogonal to it.

    ``cone_moments[q]`` are dense rank-q moments of C for q = 0..s and
    ``complement`` is an orthonormal basis of V.  Writing ``u = cos t a + sin t b``
    splits the sphere measure into ``cos^{c-1} t sin^{v-1} t dt`` times the two
    sphere measures, so::

        int u^s = sum_m C(s,m) B((s-m+c)/2, (m+v)/2)/2 * M_C(s-m) * M_V(m).
    """
    n = complement.shape[0]
    v = complement.shape[1]
    if v == 0:
        return cone_moments[s]
    q_v = q_of_subspace(complement, n).to_vector()[None]
    total = np.zeros(_dense.size(n, s))
    for m in range(0, s + 1, 2):
        radial = beta_fn((s - m + cone_dim) / 2, (m + v) / 2) / 2
        sphere = float(full_sphere_constant(v, m)) * _dense.power(q_v, 2, m // 2, n)
        total += math.comb(s, m) * radial * _dense.mul(cone_moments[s - m][None], s - m, sphere, m, n)[0]
    return total


# ---------------------------------------------------------------------------
# the measures


def _embedding(P: Polytope, frame: FlatFrame | None):
    if frame is None:
        return np.zeros(P.dim), np.eye(P.dim)
    if frame.k != P.dim:
        raise ValueError("frame dimension must equal the body dimension")
    return frame.translation, frame.basis


def _face_position_moment(P: Polytope, face: Face, r: int, box: Box | None, origin, B) -> np.ndarray:
    N = B.shape[0]
    pts = origin + P.vertices[list(face.vertex_ids)] @ B.T
    if face.dim == 0:
        if box is not None and not box.contains(pts)[0]:
            return np.zeros(_dense.size(N, r))
        return _dense.vec_pow(pts[:1], r)[0]
    if box is None:
        simplices = np.array([origin + P.vertices[list(sx)] @ B.T for sx in P.triangulation(face)])
    else:
        A, b = box.halfspaces()
        simplices = clip_to_halfspaces(pts, origin + face.point @ B.T, B @ face.basis, A, b)
        if simplices is None:
            return np.zeros(_dense.size(N, r))
    return simplex_moments(simplices, r).sum(axis=0)


def _check_box(box: Box | None, N: int):
    if box is not None and box.dim != N:
        raise ValueError(f"box dimension {box.dim} does not match ambient dimension {N}")


def phi(P: Polytope, spec: MeasureSpec, box: Box | None = None, frame: FlatFrame | None = None,
        method: str = "quadrature", verbose: bool = False) -> TensorMeasureValue:
    """Evaluate ``phi_j^{r,s,eps}(P, box)``.

    Without ``frame`` this is the extrinsic measure of a full-dimensional P.
    With ``frame`` the body is given in the flat's coordinates, the measure is
    computed intrinsically (cones inside the flat) and the result is pushed to
    the ambient space of the frame, where ``box`` is also interpreted.
    """
    d = P.dim
    if spec.ambient_dim != d:
        raise ValueError(f"spec ambient_dim {spec.ambient_dim} does not match body dimension {d}")
    origin, B = _embedding(P, frame)
    N = B.shape[0]
    _check_box(box, N)
    if spec.vanishes_by_convention:
        if verbose:
            warnings.warn(f"phi_{spec.j}^({spec.r},{spec.s}) is zero by convention in dimension {d}")
        return TensorMeasureValue(spec, SymTensor.zero(N, spec.rank))
    j, r, s = spec.j, spec.r, spec.s
    if j == d:
        row = _face_position_moment(P, P.faces[d][0], r, box, origin, B)
        return TensorMeasureValue(spec, _dense.to_symtensor(row, N, r))
    total = np.zeros(_dense.size(N, spec.rank))
    for face in P.faces[j]:
        pos = _face_position_moment(P, face, r, box, origin, B)
        if not np.any(pos):
            continue
        cone = normal_cone(P, face)
        cone_row = cone_sphere_moment_dense(cone.generators @ B.T, B @ cone.subspace_basis, s, method)
        term = _dense.mul(pos[None], r, cone_row[None], s, N)
        if spec.eps:
            q_face = q_of_subspace(B @ face.basis, N).to_vector()[None]
            term = _dense.mul(term, r + s, q_face, 2, N)
        total += term[0]
    return TensorMeasureValue(spec, _dense.to_symtensor(total, N, spec.rank))


def phi_generalized(P: Polytope, j: int, r: int, s: int, box: Box | None = None) -> SymTensor:
    return phi(P, MeasureSpec(P.dim, j, r, s, eps=1), box).value


def minkowski_tensor(P: Polytope, j: int, r: int, s: int) -> SymTensor:
    """The Minkowski tensor, i.e. the measure evaluated on all of R^n."""
    return phi(P, MeasureSpec(P.dim, j, r, s)).value


def extrinsic_phi_of_flat_body(P: Polytope, frame: FlatFrame, j: int, r: int, s: int,
                               box: Box | None = None) -> SymTensor:
    """Extrinsic ``phi_j^{r,s,0}`` in R^n of a k-polytope lying in a k-flat.

    The normal cone in R^n of a face is its cone inside the flat joined with
    the flat's orthogonal complement, handled by :func:`join_sphere_moment`.
    """
    k = P.dim
    origin, B = _embedding(P, frame)
    N = B.shape[0]
    _check_box(box, N)
    complement = np.linalg.svd(B.T, full_matrices=True)[2][k:].T
    if j > k:
        return SymTensor.zero(N, r + s)
    total = np.zeros(_dense.size(N, r + s))
    faces = P.faces[j]
    for face in faces:
        pos = _face_position_moment(P, face, r, box, origin, B)
        if not np.any(pos):
            continue
        if j == k:
            cone_moments = [np.ones(1)] + [np.zeros(_dense.size(N, q)) for q in range(1, s + 1)]
            cone_dim = 0
            sphere = _full_sphere_dense(complement, s)
        else:
            cone = normal_cone(P, face)
            gens, span = cone.generators @ B.T, B @ cone.subspace_basis
            cone_dim = span.shape[1]
            cone_moments = [cone_sphere_moment_dense(gens, span, q) for q in range(s + 1)]
            sphere = join_sphere_moment(cone_moments, cone_dim, complement, s)
        total += _dense.mul(pos[None], r, sphere[None], s, N)[0]
    return _dense.to_symtensor(total, N, r + s)


def _full_sphere_dense(basis: np.ndarray, s: int) -> np.ndarray:
    return full_sphere_moment(basis.shape[1], s, basis).to_vector()


def mcmullen_face_sum(P: Polytope, j: int, s: int) -> SymTensor:
    """``sum_F Q(F^perp) H^j(F) int_{N(P,F) ∩ S} u^s`` over the j-faces."""
    n = P.dim
    total = SymTensor.zero(n, s + 2)
    for face in P.faces[j]:
        cone = normal_cone(P, face)
        q_perp = q_of_subspace(cone.subspace_basis, n)
        vol = _face_position_moment(P, face, 0, None, np.zeros(n), np.eye(n))[0]
        total = total + sym_mul(q_perp, cone_sphere_moment(cone, s)).scale(vol)
    return total


# ---------------------------------------------------------------------------
# the Psi basis and the intrinsic/extrinsic conversion


def _half_gamma_ratio(j: int) -> Fraction:
    """Gamma(j + 1/2) / sqrt(pi) as a rational number."""
    return (gamma(Fraction(2 * j + 1, 2)) / ExactScalar(1, 1)).coeff


def psi_coefficients(n: int, s: int) -> list[Fraction]:
    """Rational weights c_j with ``psi^{r,s} = sum_j c_j Q^j phi^{r,s-2j}``.

    ``c_j = (-1)^j C(s,2j) Gamma(j+1/2)/sqrt(pi) * Gamma(n/2+s-j-1)/Gamma(n/2+s-1)``;
    the Gamma quotient is evaluated as a reciprocal rising factorial, which
    reads Gamma(0)/Gamma(0) as 1 in the plane.
    """
    x = Fraction(n, 2) + s - 1
    out = []
    for j in range(s // 2 + 1):
        ratio = 1 / rising(x - j, j).coeff
        out.append((-1) ** j * binom(s, 2 * j) * _half_gamma_ratio(j) * ratio)
    return out


def psi_inverse_coefficients(n: int, s: int) -> list[Fraction]:
    """Rational weights d_j with ``phi^{r,s} = sum_j d_j Q^j psi^{r,s-2j}``."""
    out = []
    for j in range(s // 2 + 1):
        ratio = 1 / rising(Fraction(n, 2) + s - 2 * j, j).coeff
        out.append(binom(s, 2 * j) * _half_gamma_ratio(j) * ratio)
    return out


def _combine_with_q(values: Sequence[SymTensor], weights: Sequence, n: int) -> SymTensor:
    if len(values) != len(weights):
        raise ValueError(f"need {len(weights)} input tensors, got {len(values)}")
    q = q_metric(n)
    total = None
    for j, (value, w) in enumerate(zip(values, weights)):
        term = sym_mul(q ** j, value.to_float()).scale(float(w))
        total = term if total is None else total + term
    return total


def psi_from_phi(values: Sequence[SymTensor], n: int, s: int) -> SymTensor:
    """``values[j] = phi^{r,s-2j,0}`` for j = 0..floor(s/2)."""
    return _combine_with_q(values, psi_coefficients(n, s), n)


def phi_from_psi(values: Sequence[SymTensor], n: int, s: int) -> SymTensor:
    """``values[j] = psi^{r,s-2j,0}`` for j = 0..floor(s/2)."""
    return _combine_with_q(values, psi_inverse_coefficients(n, s), n)


def intrinsic_to_extrinsic_coefficients(n: int, k: int, j: int, s: int) -> dict:
    """Exact weights keyed by (m, l) for ``Q^l Q(E)^{m-l} phi~_j^{r,s-2m,0}``."""
    if not 0 <= j < k < n:
        raise ValueError("need 0 <= j < k < n")
    prefactor = ExactScalar(math.factorial(s), n - k) * rgamma(Fraction(n - j + s, 2))
    out = {}
    for m in range(s // 2 + 1):
        for l in range(m + 1):
            w = Fraction((-1) ** (m - l) * binom(m, l),
                         4**m * math.factorial(m) * math.factorial(s - 2 * m))
            out[(m, l)] = prefactor * w * gamma(Fraction(k - j + s, 2) - m)
    return out


def intrinsic_to_extrinsic(intrinsic_values: Sequence[SymTensor], frame: FlatFrame, j: int, k: int,
                           r: int, s: int, n: int) -> SymTensor:
    """Extrinsic ``phi_j^{r,s,0}`` of a body in the flat from its intrinsic measures.

    ``intrinsic_values[m] = phi~_j^{r,s-2m,0}`` pushed to R^n, m = 0..floor(s/2).
    """
    if frame.k != k or frame.n != n:
        raise ValueError("frame does not match (n, k)")
    coeffs = intrinsic_to_extrinsic_coefficients(n, k, j, s)
    if len(intrinsic_values) != s // 2 + 1:
        raise ValueError(f"need {s // 2 + 1} intrinsic tensors")
    q = q_metric(n)
    q_e = q_of_subspace(frame.basis, n)
    total = SymTensor.zero(n, r + s)
    for (m, l), c in coeffs.items():
        term = sym_mul(sym_mul(q ** l, q_e ** (m - l)), intrinsic_values[m].to_float())
        total = total + term.scale(float(c))
    return total

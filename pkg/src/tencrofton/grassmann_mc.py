"""Haar sampling of subspaces and flats, and Monte Carlo checks of integral formulas.

The motion-invariant measure on affine k-flats is used in its Fubini form:
``mu_k = int_{G(n,k)} int_{L^perp} 1{L + t in .} dt nu_k(dL)``.  Flats
meeting a body are drawn by sampling L from the Haar probability measure and
t uniformly from the (n-k)-ball of radius R in L^perp around the projection of
the body's center; the window measure is ``kappa_{n-k} R^{n-k}``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import _dense, _slices
from .crofton import (
    FORMULAS,
    CroftonDomainError,
    CroftonParams,
    coeff_thm_j_eq_k,
    coefficient_table,
    gamma_nkj,
    lambda_local,
    rhs_tensor,
)
from .exact import gamma, kappa_ball, rgamma
from .polytope import Box, FlatFrame, Polytope, slice_polytope
from .symtensor import SymTensor, monomials
from .tencm import MeasureSpec, extrinsic_phi_of_flat_body, phi, psi_coefficients

__all__ = [
    "FlatFrame",
    "MCEstimate",
    "IdentityReport",
    "VerificationReport",
    "LhsSpec",
    "sample_grassmann",
    "sample_grassmann_batch",
    "sample_flat_hitting_ball",
    "sample_flats_batch",
    "generalized_sine",
    "generalized_sine_batch",
    "check_lemma_Q_power",
    "check_lemma_sine_Q",
    "check_prop_integrand",
    "crofton_lhs_mc",
    "verify",
    "default_workers",
]

STDERR_FLOOR = 1e-12
DEFAULT_THRESHOLD = 4.0
DEFAULT_CHUNK = 20_000
WINDOW_FACTOR = 1.05
INTERSECTION_TOL = 1e-8
WORKERS_ENV = "TENCROFTON_WORKERS"


def default_workers() -> int:
    """Worker count from the environment, 1 if unset or invalid."""
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# sampling


def _haar_orthogonal(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrices, shape ``(count, n, n)``."""
    while True:
        G = rng.standard_normal((count, n, n))
        Qm, Rm = np.linalg.qr(G)
        diag = np.diagonal(Rm, axis1=1, axis2=2)
        if np.all(np.abs(diag) > 1e-12):
            return Qm * np.sign(diag)[:, None, :]


def sample_grassmann(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Orthonormal basis (n x k) of a Haar-random k-dimensional subspace."""
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    while True:
        G = rng.standard_normal((n, k))
        Qm, Rm = np.linalg.qr(G)
        diag = np.diag(Rm)
        if np.all(np.abs(diag) > 1e-12):
            return Qm * np.sign(diag)


def sample_grassmann_batch(n: int, k: int, count: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Bases of L and of L^perp for ``count`` Haar subspaces: ``(count, n, k)``, ``(count, n, n-k)``."""
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    Qm = _haar_orthogonal(n, count, rng)
    return Qm[:, :, :k], Qm[:, :, k:]


def _uniform_ball(dim: int, count: int, radius: float, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((count, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * (radius * rng.random(count) ** (1.0 / dim))[:, None]


def window_weight(n: int, k: int, radius: float) -> float:
    return float(kappa_ball(n - k)) * radius ** (n - k)


def sample_flats_batch(n: int, k: int, count: int, radius: float, center, rng: np.random.Generator):
    """``(B, t, weight)`` for ``count`` flats drawn from mu_k restricted to flats meeting the ball."""
    if not 1 <= k <= n - 1:
        raise ValueError("need 1 <= k <= n-1")
    B, perp = sample_grassmann_batch(n, k, count, rng)
    center = np.asarray(center, dtype=float)
    offset = np.einsum("Nnm,Nm->Nn", perp, _uniform_ball(n - k, count, radius, rng))
    base = np.einsum("Nnm,Nm->Nn", perp, np.einsum("Nnm,n->Nm", perp, center))
    return B, base + offset, window_weight(n, k, radius)


def sample_flat_hitting_ball(n: int, k: int, radius: float, center, rng: np.random.Generator) -> tuple[FlatFrame, float]:
    B, t, weight = sample_flats_batch(n, k, 1, radius, center, rng)
    return FlatFrame(B[0], t[0]), weight


# ---------------------------------------------------------------------------
# generalized sine


def generalized_sine(F_basis, L_basis) -> float:
    """``[F, L]``: volume spanned by extensions of an ONB of F ∩ L to ONBs of F and L.

    The extension vectors pair up along the principal vectors, so the volume
    is the product of the sines of the principal angles that are not
    (numerically) zero.  The sines are the singular values of the smaller
    basis projected onto the complement of the larger one, which stays
    accurate for tiny angles where ``sqrt(1 - cos^2)`` would not.
    """
    F = np.asarray(F_basis, dtype=float).reshape(-1, np.shape(F_basis)[-1] if np.ndim(F_basis) > 1 else 1)
    L = np.asarray(L_basis, dtype=float).reshape(-1, np.shape(L_basis)[-1] if np.ndim(L_basis) > 1 else 1)
    if F.shape[1] == 0 or L.shape[1] == 0:
        return 1.0
    if L.shape[1] > F.shape[1]:
        F, L = L, F
    sines = np.clip(np.linalg.svd(L - F @ (F.T @ L), compute_uv=False), 0.0, 1.0)
    moving = sines > INTERSECTION_TOL
    return float(np.prod(sines[moving]))


def generalized_sine_batch(F_perp: np.ndarray, L_perp: np.ndarray) -> np.ndarray:
    """``[F, L] = [F^perp, L^perp]`` for a fixed ``F^perp`` (n x a) and a batch ``L^perp`` (N, n, b).

    Valid when ``dim F + dim L >= n``; then the complements meet trivially for
    almost every L and the value is the Gram volume of their joint basis.
    Vanishes exactly when ``F + L`` is a proper subspace.
    """
    count = L_perp.shape[0]
    if F_perp.shape[1] == 0 or L_perp.shape[2] == 0:
        return np.ones(count)
    M = np.concatenate([np.broadcast_to(F_perp, (count,) + F_perp.shape), L_perp], axis=2)
    gram = np.transpose(M, (0, 2, 1)) @ M
    return np.sqrt(np.clip(np.linalg.det(gram), 0.0, None))


def _complement(basis: np.ndarray) -> np.ndarray:
    basis = np.asarray(basis, dtype=float)
    n, r = basis.shape
    if r == 0:
        return np.eye(n)
    return np.linalg.svd(basis, full_matrices=True)[0][:, r:]


# ---------------------------------------------------------------------------
# estimates and reports


def _tensor_json(tensor: SymTensor) -> dict:
    vec = tensor.to_vector()
    return {"dim": tensor.dim, "rank": tensor.rank,
            "components": {",".join(map(str, a)): float(v) for a, v in zip(monomials(tensor.dim, tensor.rank), vec)}}


@dataclass(frozen=True)
class MCEstimate:
    """Monte Carlo estimate of a tensor integral with per-coefficient standard errors."""

    mean: SymTensor
    stderr: SymTensor
    samples: int
    seed: int
    weight: float
    workers: int = 1

    def to_json(self) -> dict:
        return {"mean": _tensor_json(self.mean), "stderr": _tensor_json(self.stderr),
                "samples": self.samples, "seed": self.seed, "weight": self.weight, "workers": self.workers}


def _z_scores(estimate: np.ndarray, stderr: np.ndarray, exact: np.ndarray) -> np.ndarray:
    return (estimate - exact) / np.maximum(stderr, STDERR_FLOOR)


@dataclass(frozen=True)
class IdentityReport:
    """Outcome of comparing a Monte Carlo mean with an exact tensor."""

    name: str
    params: dict
    estimate: MCEstimate
    exact: SymTensor
    threshold: float = DEFAULT_THRESHOLD

    @property
    def z(self) -> np.ndarray:
        return _z_scores(self.estimate.mean.to_vector(), self.estimate.stderr.to_vector(), self.exact.to_vector())

    @property
    def z_max(self) -> float:
        z = self.z
        return float(np.max(np.abs(z))) if z.size else 0.0

    @property
    def passed(self) -> bool:
        return self.z_max <= self.threshold

    def to_json(self) -> dict:
        return {"name": self.name, "params": self.params, "estimate": self.estimate.to_json(),
                "exact": _tensor_json(self.exact), "z_max": self.z_max, "threshold": self.threshold,
                "pass": self.passed}


@dataclass
class _Accumulator:
    """Streaming sum and sum of squares of dense rows."""

    width: int
    count: int = 0
    total: np.ndarray = field(default=None)
    squares: np.ndarray = field(default=None)

    def __post_init__(self):
        self.total = np.zeros(self.width)
        self.squares = np.zeros(self.width)

    def add(self, rows: np.ndarray):
        self.count += rows.shape[0]
        self.total += rows.sum(axis=0)
        self.squares += (rows * rows).sum(axis=0)

    def merge(self, other: "_Accumulator"):
        self.count += other.count
        self.total += other.total
        self.squares += other.squares

    def mean_and_stderr(self) -> tuple[np.ndarray, np.ndarray]:
        mean = self.total / self.count
        if self.count < 2:
            return mean, np.zeros_like(mean)
        var = np.clip(self.squares / self.count - mean**2, 0.0, None) * self.count / (self.count - 1)
        return mean, np.sqrt(var / self.count)


def _estimate(acc: _Accumulator, dim: int, rank: int, seed: int, weight: float, workers: int) -> MCEstimate:
    mean, err = acc.mean_and_stderr()
    return MCEstimate(SymTensor.from_vector(dim, rank, weight * mean),
                      SymTensor.from_vector(dim, rank, weight * err), acc.count, seed, weight, workers)


def _chunks(total: int, chunk: int):
    done = 0
    while done < total:
        size = min(chunk, total - done)
        yield size
        done += size


def _run_sampler(sampler: Callable[[int, np.random.Generator], np.ndarray], width: int, samples: int,
                 seed: int, chunk: int = DEFAULT_CHUNK) -> _Accumulator:
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    acc = _Accumulator(width)
    for size in _chunks(samples, chunk):
        acc.add(sampler(size, rng))
    return acc


# ---------------------------------------------------------------------------
# integral identities over the Grassmannian


def _q_power_rows(B: np.ndarray, i: int) -> np.ndarray:
    n = B.shape[1]
    return _dense.power(_dense.subspace_metric(B), 2, i, n)


def lemma_Q_power_exact(n: int, k: int, i: int) -> SymTensor:
    coeff = 1 if k == n else float(coeff_thm_j_eq_k(n, k, i))
    q = SymTensor.from_vector(n, 2, _dense.metric(1, n)[0])
    return (q ** i).scale(coeff) if i else SymTensor.from_vector(n, 0, np.array([coeff]))


def check_lemma_Q_power(n: int, k: int, i: int, samples: int = 100_000, seed: int = 0,
                        threshold: float = DEFAULT_THRESHOLD) -> IdentityReport:
    """Mean of ``Q(L)^i`` over the Grassmannian against its closed form."""
    if not 1 <= k <= n or i < 0:
        raise ValueError("need 1 <= k <= n and i >= 0")

    def sampler(size, rng):
        B, _ = sample_grassmann_batch(n, k, size, rng)
        return _q_power_rows(B, i)

    acc = _run_sampler(sampler, _dense.size(n, 2 * i), samples, seed)
    return IdentityReport("lemma_Q_power", {"n": n, "k": k, "i": i},
                          _estimate(acc, n, 2 * i, seed, 1.0, 1), lemma_Q_power_exact(n, k, i), threshold)


def lemma_sine_Q_exact(n: int, k: int, r: int, i: int, F_basis) -> SymTensor:
    F = np.asarray(F_basis, dtype=float).reshape(n, r)
    q = SymTensor.from_vector(n, 2, _dense.metric(1, n)[0])
    if r == 0:
        return q ** i if i else SymTensor.from_vector(n, 0, np.array([1.0]))
    front = (Fraction(math.factorial(r) * math.factorial(k), math.factorial(n) * math.factorial(k + r - n))
             * gamma(Fraction(n, 2) + 1) * gamma(Fraction(k, 2) + i)
             * rgamma(Fraction(n, 2) + i + 1) * rgamma(Fraction(k, 2) + 1))
    front = float(front)
    if i == 0:
        return SymTensor.from_vector(n, 0, np.array([front * float(Fraction(k, 2))]))
    q_f = SymTensor.from_vector(n, 2, _dense.subspace_metric(F[None])[0])
    main = (q ** i).scale(front * (k / 2 + i))
    second = (q ** (i - 1) * q_f).scale(front * i * (k - n) / r) if i >= 1 else None
    return main + second


def check_lemma_sine_Q(n: int, k: int, r: int, i: int, F_basis, samples: int = 100_000, seed: int = 0,
                       threshold: float = DEFAULT_THRESHOLD) -> IdentityReport:
    """Mean of ``[F, L]^2 Q(L)^i`` against its closed form (needs k + r >= n)."""
    if not (0 <= k <= n and 0 <= r <= n and k + r >= n and i >= 0):
        raise ValueError("need k, r in 0..n with k + r >= n")
    F = np.asarray(F_basis, dtype=float).reshape(n, r)
    F_perp = _complement(F)

    def sampler(size, rng):
        B, perp = sample_grassmann_batch(n, k, size, rng)
        sine = generalized_sine_batch(F_perp, perp)
        return (sine**2)[:, None] * _q_power_rows(B, i)

    acc = _run_sampler(sampler, _dense.size(n, 2 * i), samples, seed)
    return IdentityReport("lemma_sine_Q", {"n": n, "k": k, "r": r, "i": i},
                          _estimate(acc, n, 2 * i, seed, 1.0, 1), lemma_sine_Q_exact(n, k, r, i, F), threshold)


def prop_integrand_exact(n: int, k: int, j: int, s: int, i: int, F_basis, u) -> SymTensor:
    """Closed form of ``int Q(L)^i pi_L(u)^s |p_L(u)|^{j-k} [F,L]^2 nu_k(dL)``."""
    u = np.asarray(u, dtype=float)
    rank = s + 2 * i
    q = _dense.metric(1, n)
    u_rows = u[None]
    total = np.zeros(_dense.size(n, rank))
    if k == 1:
        if s % 2:
            m = (s - 1) // 2 + i
            c = gamma(Fraction(n, 2)) * gamma(Fraction(s, 2) + i + 1) * rgamma(Fraction(n + s + 1, 2) + i)
            c = float(c) / math.sqrt(math.pi)
            term = _dense.mul(_dense.vec_pow(u_rows, 1), 1, _dense.power(q, 2, m, n), 2 * m, n)
            return SymTensor.from_vector(n, rank, c * term[0])
        m = s // 2 + i
        front = float(gamma(Fraction(n, 2)) * gamma(Fraction(s + 1, 2) + i)
                      * rgamma(Fraction(n + s + 1, 2) + i)) / math.pi
        for z in range(m + 1):
            c = front * (-1) ** z * math.comb(m, z) / (1 - 2 * z)
            term = _dense.mul(_dense.vec_pow(u_rows, 2 * z), 2 * z, _dense.power(q, 2, m - z, n), 2 * (m - z), n)
            total += c * term[0]
        return SymTensor.from_vector(n, rank, total)
    F = np.asarray(F_basis, dtype=float).reshape(n, -1)
    q_f = _dense.subspace_metric(F[None])
    g = float(gamma_nkj(n, k, j))
    for z in range(s // 2 + i + 1):
        qz = _dense.power(q, 2, z, n)
        rest = rank - 2 * z
        l0 = float(lambda_local(n, k, j, s, i, z, 0))
        total += g * l0 * _dense.mul(qz, 2 * z, _dense.vec_pow(u_rows, rest), rest, n)[0]
        if rest >= 2:
            l1 = float(lambda_local(n, k, j, s, i, z, 1))
            tail = _dense.mul(q_f, 2, _dense.vec_pow(u_rows, rest - 2), rest - 2, n)
            total += g * l1 * _dense.mul(qz, 2 * z, tail, rest, n)[0]
    return SymTensor.from_vector(n, rank, total)


def check_prop_integrand(n: int, k: int, j: int, s: int, i: int, F_basis, u, samples: int = 100_000,
                         seed: int = 0, threshold: float = DEFAULT_THRESHOLD) -> IdentityReport:
    """Monte Carlo check of the Grassmannian integral behind the local formulas.

    F has dimension n-k+j and u is a unit vector orthogonal to F.  Lines
    (k = 1, j = 0) use the dedicated closed form.
    """
    if not 0 <= j < k < n:
        raise ValueError("need j < k < n")
    if k == 1 and j != 0:
        raise ValueError("k = 1 needs j = 0")
    F = np.asarray(F_basis, dtype=float).reshape(n, n - k + j)
    u = np.asarray(u, dtype=float)
    if abs(np.linalg.norm(u) - 1) > 1e-10 or np.max(np.abs(F.T @ u), initial=0.0) > 1e-10:
        raise ValueError("u must be a unit vector orthogonal to F")
    F_perp = _complement(F)
    rank = s + 2 * i

    def draw(size, rng):
        B, perp = sample_grassmann_batch(n, k, size, rng)
        proj = np.einsum("Nnk,n->Nk", B, u)
        norm = np.linalg.norm(proj, axis=1)
        bad = norm < 1e-12
        while np.any(bad):
            B2, perp2 = sample_grassmann_batch(n, k, int(bad.sum()), rng)
            B[bad], perp[bad] = B2, perp2
            proj = np.einsum("Nnk,n->Nk", B, u)
            norm = np.linalg.norm(proj, axis=1)
            bad = norm < 1e-12
        return B, perp, proj, norm

    def sampler(size, rng):
        B, perp, proj, norm = draw(size, rng)
        direction = np.einsum("Nnk,Nk->Nn", B, proj) / norm[:, None]
        scale = norm ** (j - k) * generalized_sine_batch(F_perp, perp) ** 2
        rows = _dense.mul(_q_power_rows(B, i), 2 * i, _dense.vec_pow(direction, s), s, n)
        return scale[:, None] * rows

    acc = _run_sampler(sampler, _dense.size(n, rank), samples, seed)
    return IdentityReport("prop_integrand", {"n": n, "k": k, "j": j, "s": s, "i": i},
                          _estimate(acc, n, rank, seed, 1.0, 1),
                          prop_integrand_exact(n, k, j, s, i, F, u), threshold)


# ---------------------------------------------------------------------------
# Crofton integrals of slices


@dataclass(frozen=True)
class LhsSpec:
    """Integrand of a Crofton left-hand side.

    ``kind`` is "intrinsic" (``Q(E)^i phi~_j^{r,s}`` of the slice inside E),
    "extrinsic" (``phi_j^{r,s}`` of the slice as a body in R^n) or "psi"
    (the extrinsic measure recombined in the psi basis).
    """

    n: int
    k: int
    j: int
    r: int = 0
    s: int = 0
    i: int = 0
    kind: str = "intrinsic"

    def __post_init__(self):
        if self.kind not in ("intrinsic", "extrinsic", "psi"):
            raise ValueError("kind must be intrinsic, extrinsic or psi")
        if not 1 <= self.k <= self.n - 1 or not 0 <= self.j <= self.k:
            raise ValueError("need 1 <= k <= n-1 and 0 <= j <= k")
        if min(self.r, self.s, self.i) < 0:
            raise ValueError("r, s, i must be non-negative")
        if self.kind != "intrinsic" and self.i:
            raise ValueError("the weight Q(E)^i applies to intrinsic integrands only")

    @property
    def rank(self) -> int:
        return self.r + self.s + 2 * self.i

    @classmethod
    def from_formula(cls, formula_id: str, params: CroftonParams, r: int = 0) -> "LhsSpec":
        info = FORMULAS[formula_id]
        return cls(params.n, params.k, params.j, r, params.s, params.i if info.lhs == "intrinsic" else 0,
                   info.lhs)


def _generic_rows(body: Polytope, spec: LhsSpec, s: int, box: Box | None, B: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Slice-by-slice evaluation through the face lattice of each slice."""
    n, k = spec.n, spec.k
    rows = np.zeros((len(t), _dense.size(n, spec.r + s)))
    for m in range(len(t)):
        frame = FlatFrame(B[m], t[m])
        result = slice_polytope(body, frame)
        if not result.ok:
            continue
        if spec.kind == "intrinsic":
            value = phi(result.polytope, MeasureSpec(k, spec.j, spec.r, s, kind="intrinsic"), box, frame).value
        else:
            value = extrinsic_phi_of_flat_body(result.polytope, frame, spec.j, spec.r, s, box)
        rows[m] = value.to_vector()
    return rows


def _slice_rows(body: Polytope, spec: LhsSpec, s: int, box: Box | None, B: np.ndarray, t: np.ndarray,
                halfspaces) -> np.ndarray:
    A, c = halfspaces
    k, j, r = spec.k, spec.j, spec.r
    if spec.kind == "intrinsic":
        if k == 1:
            return _slices.intrinsic_line(A, c, t, B, j, r, s, box)
        if k == 2:
            return _slices.intrinsic_plane(A, c, t, B, j, r, s, box)
    else:
        if k == 1 and j == 0:
            return _slices.extrinsic_line(A, c, t, B, r, s, box)
        if k == 2 and j == 1:
            return _slices.extrinsic_plane_edges(A, c, t, B, r, s, box)
    return _generic_rows(body, spec, s, box, B, t)


def lhs_integrand(body: Polytope, spec: LhsSpec, box: Box | None, B: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Dense rows of the integrand for a batch of flats ``t + span(B)``."""
    n = spec.n
    halfspaces = _slices.dedupe_halfspaces(*body.h_representation())
    if spec.kind == "psi":
        q = _dense.metric(len(t), n)
        total = np.zeros((len(t), _dense.size(n, spec.rank)))
        for m, c in enumerate(psi_coefficients(n, spec.s)):
            rows = _slice_rows(body, spec, spec.s - 2 * m, box, B, t, halfspaces)
            total += float(c) * _dense.mul(_dense.power(q, 2, m, n), 2 * m, rows, spec.r + spec.s - 2 * m, n)
        return total
    rows = _slice_rows(body, spec, spec.s, box, B, t, halfspaces)
    if spec.i:
        rows = _dense.mul(_q_power_rows(B, spec.i), 2 * spec.i, rows, spec.r + spec.s, n)
    return rows


def _lhs_worker(body, spec, box, count, seed, worker, chunk, radius, center) -> _Accumulator:
    rng = np.random.default_rng(np.random.SeedSequence([seed, worker]))
    acc = _Accumulator(_dense.size(spec.n, spec.rank))
    for size in _chunks(count, chunk):
        B, t, _ = sample_flats_batch(spec.n, spec.k, size, radius, center, rng)
        acc.add(lhs_integrand(body, spec, box, B, t))
    return acc


def crofton_lhs_mc(body: Polytope, spec: LhsSpec, box: Box | None = None, samples: int = 100_000,
                   seed: int = 0, workers: int | None = None, chunk: int = DEFAULT_CHUNK) -> MCEstimate:
    """Estimate ``int f(K ∩ E) mu_k(dE)`` for the integrand described by ``spec``.

    Samples are split into contiguous per-worker ranges; worker w uses the
    stream ``SeedSequence([seed, w])`` and accumulators are merged in worker
    order, so results depend only on (seed, workers, samples).
    """
    if body.dim != spec.n:
        raise ValueError(f"body dimension {body.dim} does not match n = {spec.n}")
    if box is not None and box.dim != spec.n:
        raise ValueError("box dimension does not match n")
    if samples < 1:
        raise ValueError("samples must be positive")
    workers = default_workers() if workers is None else max(1, int(workers))
    radius = WINDOW_FACTOR * body.circumradius
    center = body.center
    counts = [samples // workers + (1 if w < samples % workers else 0) for w in range(workers)]
    args = [(body, spec, box, counts[w], seed, w, chunk, radius, center) for w in range(workers) if counts[w]]
    if workers == 1:
        parts = [_lhs_worker(*a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_lhs_worker, *zip(*args)))
    acc = _Accumulator(_dense.size(spec.n, spec.rank))
    for part in parts:
        acc.merge(part)
    return _estimate(acc, spec.n, spec.rank, seed, window_weight(spec.n, spec.k, radius), workers)


# ---------------------------------------------------------------------------
# end-to-end verification


@dataclass(frozen=True)
class VerificationReport:
    formula: str
    params: CroftonParams
    r: int
    lhs: MCEstimate
    rhs: SymTensor
    threshold: float = DEFAULT_THRESHOLD
    body: str = ""
    box: Box | None = None

    @property
    def z(self) -> np.ndarray:
        return _z_scores(self.lhs.mean.to_vector(), self.lhs.stderr.to_vector(), self.rhs.to_vector())

    @property
    def z_max(self) -> float:
        z = self.z
        return float(np.max(np.abs(z))) if z.size else 0.0

    @property
    def passed(self) -> bool:
        return self.z_max <= self.threshold

    def to_json(self) -> dict:
        return {
            "formula": self.formula,
            "params": {**self.params.to_json(), "r": self.r},
            "body": self.body,
            "box": None if self.box is None else self.box.to_json(),
            "samples": self.lhs.samples,
            "seed": self.lhs.seed,
            "workers": self.lhs.workers,
            "lhs": {"tensor": _tensor_json(self.lhs.mean), "stderr": _tensor_json(self.lhs.stderr)},
            "rhs": {"tensor": _tensor_json(self.rhs)},
            "z_max": self.z_max,
            "threshold": self.threshold,
            "pass": self.passed,
        }

    def summary_row(self) -> dict:
        p = self.params
        return {"formula": self.formula, "n": p.n, "k": p.k, "j": p.j, "r": self.r, "s": p.s, "i": p.i,
                "body": self.body, "samples": self.lhs.samples, "seed": self.lhs.seed,
                "z_max": f"{self.z_max:.6g}", "pass": self.passed}


def verify(formula_id: str, body: Polytope, box: Box | None = None, r: int = 0, samples: int = 100_000,
           seed: int = 0, workers: int | None = None, threshold: float = DEFAULT_THRESHOLD,
           **params) -> VerificationReport:
    """Compare a Monte Carlo left-hand side with the exactly weighted right-hand side."""
    if formula_id not in FORMULAS:
        raise CroftonDomainError(f"unknown formula {formula_id!r}")
    params.setdefault("n", body.dim)
    table = coefficient_table(formula_id, **params)
    rhs = rhs_tensor(table, body, r=r, box=box)
    spec = LhsSpec.from_formula(formula_id, table.params, r)
    lhs = crofton_lhs_mc(body, spec, box, samples=samples, seed=seed, workers=workers)
    return VerificationReport(formula_id, table.params, r, lhs, rhs, threshold, body.name, box)

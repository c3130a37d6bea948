"""Symmetric tensors over R^n in polynomial (monomial-coefficient) form.

A symmetric rank-p tensor T is stored through the homogeneous polynomial
``t -> T(t, ..., t)``.  The symmetric tensor product then becomes polynomial
multiplication, ``x^p`` becomes ``(x . t)^p`` and the metric tensor is
``|t|^2``.  Individual components are recovered with
``T[i1..ip] = c_alpha * alpha! / p!`` where ``alpha`` counts the indices.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .exact import ExactPolyPi, ExactScalar

__all__ = [
    "SymTensor",
    "monomials",
    "sym_mul",
    "add",
    "scale",
    "approx_eq",
    "q_metric",
    "q_of_subspace",
    "vec_pow",
    "push_forward",
]

ORTHONORMAL_TOL = 1e-10


@lru_cache(maxsize=None)
def monomials(dim: int, rank: int) -> tuple[tuple[int, ...], ...]:
    """All exponent vectors of length ``dim`` summing to ``rank``, sorted lexicographically."""
    if dim < 1 or rank < 0:
        raise ValueError("need dim >= 1 and rank >= 0")
    out = []
    for bars in itertools.combinations(range(rank + dim - 1), dim - 1):
        prev = -1
        alpha = []
        for b in bars:
            alpha.append(b - prev - 1)
            prev = b
        alpha.append(rank + dim - 2 - prev)
        out.append(tuple(alpha))
    return tuple(sorted(out))


@lru_cache(maxsize=None)
def monomial_index(dim: int, rank: int) -> dict:
    return {alpha: i for i, alpha in enumerate(monomials(dim, rank))}


def multinomial(alpha: Sequence[int]) -> int:
    out = math.factorial(sum(alpha))
    for a in alpha:
        out //= math.factorial(a)
    return out


def _to_exact(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    if isinstance(value, (ExactScalar, ExactPolyPi)):
        scalar = ExactScalar.coerce(value)
        if scalar.pi_half_exponent:
            raise ValueError(f"{scalar} is irrational; use float backing")
        return scalar.coeff
    raise TypeError(f"cannot use {type(value).__name__} as an exact coefficient")


class SymTensor:
    """An immutable symmetric tensor with exact (Fraction) or float coefficients."""

    __slots__ = ("dim", "rank", "exact", "_coeffs")

    def __init__(self, dim: int, rank: int, coeffs: Mapping | None = None, exact: bool = False):
        if dim < 1 or rank < 0:
            raise ValueError("need dim >= 1 and rank >= 0")
        clean = {}
        for alpha, value in (coeffs or {}).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != dim or sum(alpha) != rank or min(alpha) < 0:
                raise ValueError(f"multi-index {alpha} does not fit dim={dim}, rank={rank}")
            value = _to_exact(value) if exact else float(value)
            if value != 0:
                clean[alpha] = clean.get(alpha, 0) + value
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "rank", rank)
        object.__setattr__(self, "exact", bool(exact))
        object.__setattr__(self, "_coeffs", clean)

    def __setattr__(self, name, value):
        raise AttributeError("SymTensor is immutable")

    # construction helpers -------------------------------------------------
    @classmethod
    def zero(cls, dim: int, rank: int, exact: bool = False) -> "SymTensor":
        return cls(dim, rank, {}, exact)

    @classmethod
    def scalar(cls, value, dim: int, exact: bool = False) -> "SymTensor":
        return cls(dim, 0, {(0,) * dim: value}, exact)

    @classmethod
    def from_vector(cls, dim: int, rank: int, values: Sequence[float]) -> "SymTensor":
        """Float tensor from coefficients listed in :func:`monomials` order."""
        basis = monomials(dim, rank)
        if len(values) != len(basis):
            raise ValueError(f"expected {len(basis)} coefficients, got {len(values)}")
        return cls(dim, rank, dict(zip(basis, (float(v) for v in values))))

    # accessors ------------------------------------------------------------
    @property
    def backing(self) -> str:
        return "exact" if self.exact else "float"

    @property
    def coeffs(self) -> dict:
        return dict(self._coeffs)

    def coeff(self, alpha: Sequence[int]):
        return self._coeffs.get(tuple(alpha), Fraction(0) if self.exact else 0.0)

    def to_vector(self) -> np.ndarray:
        return np.array([float(self.coeff(a)) for a in monomials(self.dim, self.rank)])

    def component(self, indices: Sequence[int]):
        """The tensor component ``T[i1, ..., ip]`` (zero-based indices)."""
        if len(indices) != self.rank:
            raise ValueError("need one index per tensor slot")
        alpha = [0] * self.dim
        for i in indices:
            alpha[i] += 1
        c = self.coeff(alpha)
        weight = Fraction(math.prod(math.factorial(a) for a in alpha), math.factorial(self.rank))
        return c * weight if self.exact else c * float(weight)

    def to_array(self) -> np.ndarray:
        """Dense ``n x ... x n`` component array (float)."""
        out = np.zeros((self.dim,) * self.rank)
        for idx in itertools.product(range(self.dim), repeat=self.rank):
            out[idx] = float(self.component(idx))
        return out

    def evaluate(self, t: Sequence[float]) -> float:
        """Value of the polynomial ``T(t, ..., t)``."""
        t = np.asarray(t, dtype=float)
        return float(sum(float(c) * np.prod(t ** np.array(a)) for a, c in self._coeffs.items()))

    # conversions ----------------------------------------------------------
    def to_float(self) -> "SymTensor":
        return self if not self.exact else SymTensor(self.dim, self.rank, self._coeffs, exact=False)

    def to_exact(self) -> "SymTensor":
        return self if self.exact else SymTensor(self.dim, self.rank, self._coeffs, exact=True)

    # algebra ----------------------------------------------------------------
    def _check_compatible(self, other: "SymTensor", same_rank: bool):
        if not isinstance(other, SymTensor):
            raise TypeError("expected a SymTensor")
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
        if self.exact != other.exact:
            raise ValueError("backing mismatch: convert with to_float()/to_exact() first")
        if same_rank and self.rank != other.rank:
            raise ValueError(f"rank mismatch: {self.rank} vs {other.rank}")

    def __add__(self, other):
        if not isinstance(other, SymTensor):
            return NotImplemented
        self._check_compatible(other, same_rank=True)
        out = dict(self._coeffs)
        for a, c in other._coeffs.items():
            out[a] = out.get(a, 0) + c
        return SymTensor(self.dim, self.rank, out, self.exact)

    def __neg__(self):
        return SymTensor(self.dim, self.rank, {a: -c for a, c in self._coeffs.items()}, self.exact)

    def __sub__(self, other):
        if not isinstance(other, SymTensor):
            return NotImplemented
        return self + (-other)

    def scale(self, factor) -> "SymTensor":
        if self.exact:
            f = _to_exact(factor)
        else:
            f = float(factor)
        return SymTensor(self.dim, self.rank, {a: f * c for a, c in self._coeffs.items()}, self.exact)

    def __mul__(self, other):
        if isinstance(other, SymTensor):
            return sym_mul(self, other)
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, exponent: int) -> "SymTensor":
        if not isinstance(exponent, int) or exponent < 0:
            return NotImplemented
        out = SymTensor.scalar(1, self.dim, self.exact)
        for _ in range(exponent):
            out = sym_mul(out, self)
        return out

    def max_abs_diff(self, other: "SymTensor") -> float:
        if self.dim != other.dim or self.rank != other.rank:
            raise ValueError("shape mismatch")
        keys = set(self._coeffs) | set(other._coeffs)
        return max((abs(float(self.coeff(a)) - float(other.coeff(a))) for a in keys), default=0.0)

    def max_abs(self) -> float:
        return max((abs(float(c)) for c in self._coeffs.values()), default=0.0)

    def __eq__(self, other):
        if not isinstance(other, SymTensor):
            return NotImplemented
        return (self.dim, self.rank, self.exact, self._coeffs) == (
            other.dim, other.rank, other.exact, other._coeffs)

    def __hash__(self):
        return hash((self.dim, self.rank, self.exact, tuple(sorted(self._coeffs.items()))))

    def __repr__(self):
        body = ", ".join(f"{a}: {c}" for a, c in sorted(self._coeffs.items()))
        return f"SymTensor(dim={self.dim}, rank={self.rank}, {self.backing}, {{{body}}})"

    # serialization ----------------------------------------------------------
    def to_json(self) -> dict:
        entries = []
        for a in sorted(self._coeffs):
            c = self._coeffs[a]
            entries.append([list(a), str(c) if self.exact else c])
        return {"dim": self.dim, "rank": self.rank, "backing": self.backing, "entries": entries}

    @classmethod
    def from_json(cls, data: Mapping) -> "SymTensor":
        exact = data.get("backing", "float") == "exact"
        coeffs = {tuple(a): (Fraction(v) if exact else float(v)) for a, v in data["entries"]}
        return cls(int(data["dim"]), int(data["rank"]), coeffs, exact)


def sym_mul(a: SymTensor, b: SymTensor) -> SymTensor:
    """Symmetric tensor product, i.e. the product of the two polynomials."""
    a._check_compatible(b, same_rank=False)
    out: dict = {}
    for ka, ca in a._coeffs.items():
        for kb, cb in b._coeffs.items():
            key = tuple(x + y for x, y in zip(ka, kb))
            out[key] = out.get(key, 0) + ca * cb
    return SymTensor(a.dim, a.rank + b.rank, out, a.exact)


def add(a: SymTensor, b: SymTensor) -> SymTensor:
    return a + b


def scale(c, a: SymTensor) -> SymTensor:
    return a.scale(c)


def approx_eq(a: SymTensor, b: SymTensor, tol: float = 1e-12) -> bool:
    """Max-norm comparison over the full index set."""
    return a.dim == b.dim and a.rank == b.rank and a.max_abs_diff(b) <= tol


def q_metric(n: int, exact: bool = False) -> SymTensor:
    """The metric tensor Q with polynomial ``sum_i t_i^2``."""
    coeffs = {}
    for i in range(n):
        alpha = [0] * n
        alpha[i] = 2
        coeffs[tuple(alpha)] = 1
    return SymTensor(n, 2, coeffs, exact)


def _check_orthonormal(basis: np.ndarray):
    gram = basis.T @ basis
    if not np.allclose(gram, np.eye(basis.shape[1]), atol=ORTHONORMAL_TOL, rtol=0):
        raise ValueError("basis vectors are not orthonormal")


def q_of_subspace(basis, n: int | None = None) -> SymTensor:
    """Metric tensor of a linear subspace, ``sum_b (b . t)^2`` over an orthonormal basis.

    ``basis`` is an ``n x k`` array whose columns are the basis vectors (a
    list of vectors is accepted too).  An empty basis gives the zero tensor.
    """
    basis = _as_columns(basis, n)
    _check_orthonormal(basis)
    out = SymTensor.zero(basis.shape[0], 2)
    for col in basis.T:
        out = out + vec_pow(col, 2)
    return out


def _as_columns(basis, n: int | None = None) -> np.ndarray:
    if isinstance(basis, np.ndarray) and basis.ndim == 2:
        return basis.astype(float)
    vectors = [np.asarray(v, dtype=float) for v in basis]
    if not vectors:
        if n is None:
            raise ValueError("empty basis needs an explicit dimension")
        return np.zeros((n, 0))
    return np.column_stack(vectors)


def vec_pow(x, p: int, exact: bool = False) -> SymTensor:
    """The tensor power ``x^p`` whose polynomial is ``(x . t)^p``."""
    if p < 0:
        raise ValueError("p must be non-negative")
    if exact:
        xs = [_to_exact(v) for v in x]
    else:
        xs = [float(v) for v in x]
    n = len(xs)
    coeffs = {}
    for alpha in monomials(n, p):
        value = multinomial(alpha)
        for xi, ai in zip(xs, alpha):
            if ai:
                value = value * xi**ai
        coeffs[alpha] = value
    return SymTensor(n, p, coeffs, exact)


def push_forward(tensor: SymTensor, basis) -> SymTensor:
    """Push a tensor over R^k to R^n along the linear map with matrix ``basis`` (n x k).

    Each vector ``v`` in the symmetric products is replaced by ``basis @ v``,
    which on polynomials is the substitution ``tau = basis^T t``.
    """
    basis = _as_columns(basis)
    if basis.shape[1] != tensor.dim:
        raise ValueError("basis column count must match the tensor dimension")
    n = basis.shape[0]
    powers = [[vec_pow(basis[:, i], a) for a in range(tensor.rank + 1)] for i in range(tensor.dim)]
    out = SymTensor.zero(n, tensor.rank)
    for alpha, c in tensor.to_float()._coeffs.items():
        term = SymTensor.scalar(c, n)
        for i, a in enumerate(alpha):
            if a:
                term = sym_mul(term, powers[i][a])
        out = out + term
    return out


def tensor_sum(tensors: Iterable[SymTensor], dim: int, rank: int, exact: bool = False) -> SymTensor:
    out = SymTensor.zero(dim, rank, exact)
    for t in tensors:
        out = out + t
    return out

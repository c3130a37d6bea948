"""Batched symmetric tensors as dense coefficient arrays.

Monte Carlo loops evaluate the same tensor expression for many flats at once.
Here a batch of rank-p tensors over R^n is an array of shape ``(N, C)`` whose
columns follow :func:`tencrofton.symtensor.monomials` order.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .symtensor import SymTensor, monomial_index, monomials, multinomial


@lru_cache(maxsize=None)
def _exponents(dim: int, rank: int) -> tuple[np.ndarray, np.ndarray]:
    basis = monomials(dim, rank)
    exps = np.array(basis, dtype=float).reshape(len(basis), dim)
    weights = np.array([multinomial(a) for a in basis], dtype=float)
    return exps, weights


@lru_cache(maxsize=None)
def _product_matrix(dim: int, pa: int, pb: int) -> np.ndarray:
    """0/1 matrix sending flattened (i, j) coefficient pairs to the product index."""
    ma, mb = monomials(dim, pa), monomials(dim, pb)
    target = monomial_index(dim, pa + pb)
    mat = np.zeros((len(ma) * len(mb), len(target)))
    for i, a in enumerate(ma):
        for j, b in enumerate(mb):
            mat[i * len(mb) + j, target[tuple(x + y for x, y in zip(a, b))]] = 1.0
    return mat


def size(dim: int, rank: int) -> int:
    return len(monomials(dim, rank))


def ones(count: int) -> np.ndarray:
    return np.ones((count, 1))


def vec_pow(vectors: np.ndarray, p: int) -> np.ndarray:
    """Rows of ``vectors`` raised to the tensor power p."""
    vectors = np.asarray(vectors, dtype=float)
    count, dim = vectors.shape
    if p == 0:
        return np.ones((count, 1))
    exps, weights = _exponents(dim, p)
    table = np.empty((count, dim, p + 1))
    table[:, :, 0] = 1.0
    for e in range(1, p + 1):
        table[:, :, e] = table[:, :, e - 1] * vectors
    idx = exps.astype(int)
    out = np.broadcast_to(weights, (count, len(weights))).copy()
    for d in range(dim):
        out *= table[:, d, idx[:, d]]
    return out


def mul(a: np.ndarray, pa: int, b: np.ndarray, pb: int, dim: int) -> np.ndarray:
    """Row-wise symmetric product of two batches."""
    if pa == 0:
        return a[:, :1] * b
    if pb == 0:
        return a * b[:, :1]
    outer = (a[:, :, None] * b[:, None, :]).reshape(a.shape[0], -1)
    return outer @ _product_matrix(dim, pa, pb)


def power(a: np.ndarray, pa: int, exponent: int, dim: int) -> np.ndarray:
    out = np.ones((a.shape[0], 1))
    for step in range(exponent):
        out = mul(out, pa * step, a, pa, dim)
    return out


def metric(count: int, dim: int) -> np.ndarray:
    row = np.array([1.0 if max(a) == 2 else 0.0 for a in monomials(dim, 2)])
    return np.broadcast_to(row, (count, row.size)).copy()


def subspace_metric(bases: np.ndarray) -> np.ndarray:
    """Q of span(columns) for a batch of ``(N, n, k)`` orthonormal bases."""
    count, dim, k = bases.shape
    out = np.zeros((count, size(dim, 2)))
    for i in range(k):
        out += vec_pow(bases[:, :, i], 2)
    return out


def from_symtensor(tensor: SymTensor, count: int) -> np.ndarray:
    return np.broadcast_to(tensor.to_vector(), (count, size(tensor.dim, tensor.rank))).copy()


def to_symtensor(row: np.ndarray, dim: int, rank: int) -> SymTensor:
    return SymTensor.from_vector(dim, rank, row)

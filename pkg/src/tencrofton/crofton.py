"""Exact Crofton coefficients and right-hand sides.

Every formula is identified by a string id and produces a :class:`CoefficientTable`:
a list of entries ``coeff * Q^q_power * phi_order^{r, s_target, eps}(K, beta)`` whose
sum is the value of the Crofton integral.  All sums are evaluated term by term in
exact arithmetic, exactly as they are written, so that the closed forms and the
gamma-sum identities serve as independent cross-checks.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable

from .exact import ExactPolyPi, ExactScalar, binom, exact_sum, gamma, omega, rgamma
from .polytope import Box, Polytope
from .symtensor import SymTensor, q_metric, sym_mul
from .tencm import MeasureSpec, phi, psi_coefficients, psi_from_phi

__all__ = [
    "CroftonDomainError",
    "CroftonParams",
    "Target",
    "CoefficientEntry",
    "CoefficientTable",
    "FORMULAS",
    "coefficient_table",
    "coeff_thm_j_eq_k",
    "coeff_local_general",
    "coeff_k1_local",
    "coeff_global",
    "coeff_i0",
    "coeff_s2",
    "coeff_s3",
    "coeff_j_km1",
    "coeff_j_km1_weighted",
    "coeff_k1_global",
    "coeff_extrinsic",
    "coeff_extrinsic_k1",
    "coeff_psi",
    "gamma_nkj",
    "lambda_local",
    "lambda_global",
    "lambda_jkm1_weighted",
    "delta",
    "eta",
    "xi",
    "kappa",
    "kappa_generic",
    "kappa_special",
    "kappa_from_chain",
    "extrinsic_k1_from_chain",
    "psi_combination",
    "rhs_tensor",
]

H = Fraction(1, 2)


class CroftonDomainError(ValueError):
    """Parameters outside the range in which a Crofton formula is stated."""


def _require(condition: bool, formula: str, text: str):
    if not condition:
        raise CroftonDomainError(f"{formula}: requires {text}")


def _g(x) -> ExactScalar:
    return gamma(Fraction(x))


def _rg(x) -> ExactScalar:
    return rgamma(Fraction(x))


def _sum(terms: Iterable) -> ExactScalar | ExactPolyPi:
    return exact_sum(terms)


# ---------------------------------------------------------------------------
# tables


@dataclass(frozen=True, order=True)
class Target:
    """The functional ``Q^q_power * phi_order^{r, s, eps}`` (or ``psi`` when basis='psi')."""

    order: int
    s: int
    eps: int = 0
    q_power: int = 0
    basis: str = "phi"

    def to_json(self) -> dict:
        return {"order": self.order, "s": self.s, "eps": self.eps, "q_power": self.q_power,
                "basis": self.basis}


@dataclass(frozen=True)
class CoefficientEntry:
    z: int
    target: Target
    coeff: ExactScalar | ExactPolyPi


@dataclass(frozen=True)
class CroftonParams:
    n: int
    k: int
    j: int = 0
    s: int = 0
    i: int = 0

    def to_json(self) -> dict:
        return {"n": self.n, "k": self.k, "j": self.j, "s": self.s, "i": self.i}


@dataclass(frozen=True)
class CoefficientTable:
    formula_id: str
    params: CroftonParams
    entries: tuple[CoefficientEntry, ...] = field(default_factory=tuple)

    def by_target(self) -> dict[Target, ExactScalar | ExactPolyPi]:
        """Merge entries with equal targets, dropping zeros."""
        acc: dict[Target, list] = {}
        for e in self.entries:
            acc.setdefault(e.target, []).append(e.coeff)
        out = {}
        for t, vals in acc.items():
            total = _sum(vals)
            if not _is_zero(total):
                out[t] = total
        return out

    def nonzero(self) -> "CoefficientTable":
        return replace(self, entries=tuple(e for e in self.entries if not _is_zero(e.coeff)))

    def rows(self) -> list[dict]:
        p = self.params
        out = []
        for e in sorted(self.entries, key=lambda e: (e.z, e.target)):
            for exp, c in _terms(e.coeff):
                out.append({
                    "formula": self.formula_id, "n": p.n, "k": p.k, "j": p.j, "s": p.s, "i": p.i,
                    "z": e.z, "target_order": e.target.order, "target_s": e.target.s,
                    "eps": e.target.eps, "q_power": e.target.q_power,
                    "coeff_rational": str(c), "pi_half_exponent": exp,
                })
        return out

    def to_json(self) -> dict:
        return {
            "formula": self.formula_id,
            "params": self.params.to_json(),
            "entries": [
                {"z": e.z, "target": e.target.to_json(), "value": format_exact(e.coeff),
                 "terms": [{"coeff": str(c), "pi_half_exponent": x} for x, c in _terms(e.coeff)]}
                for e in sorted(self.entries, key=lambda e: (e.z, e.target))
            ],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(self.rows())
        return buf.getvalue()


CSV_COLUMNS = ["formula", "n", "k", "j", "s", "i", "z", "target_order", "target_s", "eps",
               "q_power", "coeff_rational", "pi_half_exponent"]


def _is_zero(v) -> bool:
    return v.is_zero()


def _terms(v) -> list[tuple[int, Fraction]]:
    if isinstance(v, ExactPolyPi):
        return sorted(v.terms.items()) or [(0, Fraction(0))]
    return [(v.pi_half_exponent, v.coeff)]


def format_exact(v) -> str:
    """``p/q * pi^(m/2)``, or ``p/q`` when there is no pi factor."""
    return str(v)


# ---------------------------------------------------------------------------
# intrinsic theorems


def coeff_thm_j_eq_k(n: int, k: int, i: int) -> ExactScalar:
    """``Gamma(n/2) Gamma(k/2+i) / (Gamma(n/2+i) Gamma(k/2))``; 0 for k=0, i>0 and 1 for k=i=0."""
    _require(0 <= k < n and i >= 0, "thm_j_eq_k", "0 <= k < n and i >= 0")
    if k == 0:
        return ExactScalar(1 if i == 0 else 0)
    return _g(H * n) * _g(H * k + i) / (_g(H * n + i) * _g(H * k))


def gamma_nkj(n: int, k: int, j: int) -> ExactScalar:
    return binom(n - k + j - 1, j) * _g(H * (n - k + 1)) / ExactScalar(2, 2)


def _theta_local(n, k, j, p, q, eps) -> Fraction:
    if eps == 0:
        return Fraction(n - k + j) * (H * (k - 1) + p)
    return Fraction(p * (n - k) - q * (k - 1))


def _theta_global(n, k, j, s, i, z, p, q) -> Fraction:
    ratio = Fraction(1) if p + q == 0 else Fraction(z, p + q)
    denom = s + 2 * i - 2 * z - 1
    return (Fraction(n - k + j) * (H * (k - 1) + p)
            - (p * (n - k) - q * (k - 1)) * (1 + Fraction(k - j - 1, denom) * (1 - ratio)))


def _lambda_sum(n, k, j, s, i, z, eps, theta: Callable) -> ExactScalar | ExactPolyPi:
    terms = []
    for p in range(i + 1):
        for q in range(max(z - p + eps, 0), s // 2 + i - p + 1):
            sign = (-1) ** (p + q - z)
            comb = binom(i, p) * binom(s + 2 * i - 2 * p, 2 * q) * binom(p + q - eps, z)
            if comb == 0:
                continue
            th = theta(p, q)
            if th == 0:
                continue
            value = (_g(q + H) * _g(H * (j + s) + i - p - q + 1) * _rg(H * (n - k + j + s) + i - p + 1)
                     * _g(H * (k - 1) + p) * _g(H * (n - k) + q) * _rg(H * (n + 1) + p + q))
            terms.append(value * (sign * comb * th))
    return _sum(terms)


def lambda_local(n: int, k: int, j: int, s: int, i: int, z: int, eps: int):
    """The coefficient lambda^{(eps)} of the local theorem."""
    return _lambda_sum(n, k, j, s, i, z, eps, lambda p, q: _theta_local(n, k, j, p, q, eps))


def lambda_global(n: int, k: int, j: int, s: int, i: int, z: int):
    """lambda^{(0)} with the modified theta of the translation invariant theorem."""
    if s % 2 == 1 and z == s // 2 + i:
        return ExactScalar(0)
    return _lambda_sum(n, k, j, s, i, z, 0, lambda p, q: _theta_global(n, k, j, s, i, z, p, q))


def _check_local(formula, n, k, j):
    _require(0 <= j < k < n, formula, "j < k < n")
    _require(k > 1, formula, "k > 1 (use thm_k1_local for k = 1)")


def coeff_local_general(n: int, k: int, j: int, s: int, i: int) -> CoefficientTable:
    _check_local("thm_local_general", n, k, j)
    g = gamma_nkj(n, k, j)
    entries = []
    for z in range(s // 2 + i + 1):
        entries.append(CoefficientEntry(z, Target(n - k + j, s + 2 * i - 2 * z, 0, z),
                                        g * lambda_local(n, k, j, s, i, z, 0)))
        if s + 2 * i - 2 * z - 2 >= 0:
            entries.append(CoefficientEntry(z, Target(n - k + j, s + 2 * i - 2 * z - 2, 1, z),
                                            g * lambda_local(n, k, j, s, i, z, 1)))
    return CoefficientTable("thm_local_general", CroftonParams(n, k, j, s, i), tuple(entries))


def coeff_k1_local(n: int, s: int, i: int) -> CoefficientTable:
    _require(n >= 2, "thm_k1_local", "n >= 2")
    entries = []
    if s % 2 == 0:
        half = s // 2 + i
        pre = _g(H * n) * _g(H * (s + 1) + i) / (ExactScalar(1, 2) * _g(H * (n + s + 1) + i))
        for z in range(half + 1):
            c = pre * Fraction((-1) ** z * binom(half, z), 1 - 2 * z)
            entries.append(CoefficientEntry(z, Target(n - 1, 2 * z, 0, half - z), c))
    else:
        c = _g(H * n) * _g(H * s + i + 1) / (ExactScalar(1, 1) * _g(H * (n + s + 1) + i))
        entries.append(CoefficientEntry(0, Target(n - 1, 1, 0, (s - 1) // 2 + i), c))
    return CoefficientTable("thm_k1_local", CroftonParams(n, 1, 0, s, i), tuple(entries))


def coeff_global(n: int, k: int, j: int, s: int, i: int) -> CoefficientTable:
    _check_local("thm_global", n, k, j)
    g = gamma_nkj(n, k, j)
    entries = [CoefficientEntry(z, Target(n - k + j, s + 2 * i - 2 * z, 0, z), g * lambda_global(n, k, j, s, i, z))
               for z in range(s // 2 + i + 1)]
    return CoefficientTable("thm_global", CroftonParams(n, k, j, s, i), tuple(entries))


def delta(n: int, k: int, j: int, s: int) -> ExactScalar:
    return (binom(n - k + j - 1, j) * _g(H * (n - k + 1)) * _g(H * (k + 1))
            / (ExactScalar(1, 2) * _g(H * (n - k + j + s) + 1)))


def eta(n: int, k: int, j: int, s: int, z: int):
    if s % 2 == 1 and z == s // 2:
        return ExactScalar(0)
    terms = []
    for q in range(z, s // 2 + 1):
        weight = H * (n - k + j) + q + Fraction((k - j - 1) * (q - z), s - 2 * z - 1)
        if weight == 0:
            continue
        value = (_g(q + H) * _g(H * (j + s) - q + 1) * _g(H * (n - k) + q) * _rg(H * (n + 1) + q))
        terms.append(value * ((-1) ** (q - z) * binom(s, 2 * q) * binom(q, z) * weight))
    return _sum(terms)


def coeff_i0(n: int, k: int, j: int, s: int) -> CoefficientTable:
    _require(0 <= j < k < n, "cor_i0", "0 <= j < k < n")
    d = delta(n, k, j, s)
    entries = [CoefficientEntry(z, Target(n - k + j, s - 2 * z, 0, z), d * eta(n, k, j, s, z))
               for z in range(s // 2 + 1)]
    return CoefficientTable("cor_i0", CroftonParams(n, k, j, s, 0), tuple(entries))


def coeff_s2(n: int, k: int, j: int) -> CoefficientTable:
    """The closed form for s = 2.

    The Q term carries ``(n-k) / (2(n-k+j))``, which is what the general s = 2
    table reduces to (and what the line case k = 1 gives independently).
    """
    _require(0 <= j < k < n, "cor_s2", "0 <= j < k < n")
    pre = _g(H * (k + 1)) * _g(H * (n - k + j + 1)) * _rg(H * (n + 3)) * _rg(H * (j + 1))
    m = n - k + j
    entries = (
        CoefficientEntry(1, Target(m, 0, 0, 1), pre * Fraction(n - k, 2 * m)),
        CoefficientEntry(0, Target(m, 2, 0, 0), pre * Fraction(n - k + n * j + j, 2 * m)),
    )
    return CoefficientTable("cor_s2", CroftonParams(n, k, j, 2, 0), entries)


def coeff_s3(n: int, k: int, j: int) -> CoefficientTable:
    """The closed form for s = 3; vanishes for j = 0 through 1/Gamma(0) = 0."""
    _require(0 <= j < k < n, "cor_s3", "0 <= j < k < n")
    c = (Fraction(j + 1, n - k + j + 1) * _g(H * (k + 1)) * _g(H * (n - k + j))
         * _rg(H * (n + 1)) * _rg(H * j)) if j > 0 else ExactScalar(0)
    return CoefficientTable("cor_s3", CroftonParams(n, k, j, 3, 0),
                            (CoefficientEntry(0, Target(n - k + j, 3, 0, 0), c),))


def xi(n: int, k: int, s: int, z: int):
    terms = []
    for q in range(z, s // 2 + 1):
        value = _g(q + H) * _g(H * (k + s + 1) - q) * _g(H * (n - k) + q) * _rg(H * (n - 1) + q)
        terms.append(value * ((-1) ** (q - z) * binom(s, 2 * q) * binom(q, z)))
    return _sum(terms)


def coeff_j_km1(n: int, k: int, s: int, formal: bool = False) -> CoefficientTable:
    """delta * xi for j = k-1; ``formal=True`` admits k = 1 for the consistency check."""
    _require(k < n and (k > 1 or (formal and k == 1)), "cor_j_km1", "1 < k < n")
    d = delta(n, k, k - 1, s)
    entries = [CoefficientEntry(z, Target(n - 1, s - 2 * z, 0, z), d * xi(n, k, s, z))
               for z in range(s // 2 + 1)]
    return CoefficientTable("cor_j_km1", CroftonParams(n, k, k - 1, s, 0), tuple(entries))


def _km1_gamma(k: int, p: int) -> ExactScalar:
    """(k-1) Gamma((k-1)/2 + p), read as its limit 2 Gamma((k+1)/2) when p = 0."""
    if p == 0:
        return 2 * _g(H * (k + 1))
    return (k - 1) * _g(H * (k - 1) + p)


def lambda_jkm1_weighted(n: int, k: int, s: int, i: int, z: int):
    """The coefficient for j = k-1 with weight Q(E)^i, tensorial measures only."""
    terms = []
    for p in range(i + 1):
        for q in range(max(z - p, 0), s // 2 + i - p + 1):
            comb = binom(i, p) * binom(s + 2 * i - 2 * p, 2 * q) * binom(p + q, z)
            if comb == 0:
                continue
            value = (_g(q + H) * _g(H * (k + s + 1) + i - p - q) * _rg(H * (n + s + 1) + i - p)
                     * _km1_gamma(k, p) * _g(H * (n - k) + q) * _rg(H * (n - 1) + p + q))
            terms.append(value * ((-1) ** (p + q - z) * comb))
    return _sum(terms)


def coeff_j_km1_weighted(n: int, k: int, s: int, i: int, formal: bool = False) -> CoefficientTable:
    _require(k < n and (k > 1 or (formal and k == 1)), "eq_jkm1_weighted", "1 < k < n")
    g = gamma_nkj(n, k, k - 1)
    entries = [CoefficientEntry(z, Target(n - 1, s + 2 * i - 2 * z, 0, z), g * lambda_jkm1_weighted(n, k, s, i, z))
               for z in range(s // 2 + i + 1)]
    return CoefficientTable("eq_jkm1_weighted", CroftonParams(n, k, k - 1, s, i), tuple(entries))


def coeff_k1_global(n: int, s: int) -> CoefficientTable:
    _require(n >= 2, "cor_k1_global", "n >= 2")
    if s % 2:
        return CoefficientTable("cor_k1_global", CroftonParams(n, 1, 0, s, 0), ())
    pre = 2 * omega(n + s + 1) / (ExactScalar(1, 2) * omega(s + 1) * omega(n))
    half = s // 2
    entries = [CoefficientEntry(z, Target(n - 1, 2 * z, 0, half - z), pre * Fraction((-1) ** z * binom(half, z), 1 - 2 * z))
               for z in range(half + 1)]
    return CoefficientTable("cor_k1_global", CroftonParams(n, 1, 0, s, 0), tuple(entries))


# ---------------------------------------------------------------------------
# extrinsic theorems


def kappa_generic(n: int, k: int, s: int, z: int) -> ExactScalar:
    return (Fraction(k - 1, n - 1) * ExactScalar(1, n - k) * _g(H * n) * _rg(H * k) * _rg(H * (n - k))
            * _g(H * (s + 1)) * _g(H * s + 1) * _rg(H * (n - k + s + 1)) * _rg(H * (n + s - 1))
            * _g(H * (n - k) + z) * _g(H * (k + s - 1) - z) * _rg(H * s - z + 1) / math.factorial(z))


def kappa_special(n: int, k: int, s: int) -> ExactScalar:
    """The coefficient at z = (s-1)/2 for odd s."""
    return (ExactScalar(1, n - k - 1) * Fraction(2 * k * (n + s - 2), (n - 1) * (n - k + s - 1))
            * _g(H * n) * _rg(H * (n - k)) * _g(H * s + 1) * _rg(H * (n + s + 1)))


def kappa(n: int, k: int, s: int, z: int) -> ExactScalar:
    if s % 2 == 1 and 2 * z == s - 1:
        return kappa_special(n, k, s)
    return kappa_generic(n, k, s, z)


def coeff_extrinsic(n: int, k: int, s: int) -> CoefficientTable:
    _require(1 < k < n, "thm_ext_jkm1", "1 < k < n (use thm_ext_k1 for k = 1)")
    entries = [CoefficientEntry(z, Target(n - 1, s - 2 * z, 0, z), kappa(n, k, s, z)) for z in range(s // 2 + 1)]
    return CoefficientTable("thm_ext_jkm1", CroftonParams(n, k, k - 1, s, 0), tuple(entries))


def coeff_extrinsic_k1(n: int, s: int) -> ExactScalar:
    _require(n >= 2, "thm_ext_k1", "n >= 2")
    m = (s + 1) // 2
    return ExactScalar(1, n - 2) * _g(H * n) * _rg(H * (n + 1)) * _g(m + H) * _rg(H * n + m)


def _coeff_extrinsic_k1_table(n: int, s: int) -> CoefficientTable:
    c = coeff_extrinsic_k1(n, s)
    t = Target(n - 1, s - 2 * (s // 2), 0, s // 2)
    return CoefficientTable("thm_ext_k1", CroftonParams(n, 1, 0, s, 0), (CoefficientEntry(s // 2, t, c),))


def coeff_psi(n: int, k: int, s: int) -> ExactScalar:
    """The single constant of the Crofton formula in the psi basis.

    ``(k-1) Gamma((k+s-1)/2)`` is read as its limit 2 when k = 1 and s = 0.
    """
    _require(0 < k < n, "cor_psi", "0 < k < n")
    if k == 1 and s == 0:
        km1 = ExactScalar(2)
    else:
        km1 = (k - 1) * _g(H * (k + s - 1))
    return (ExactScalar(1, n - k) * km1 / (n - 1) * _g(H * n) * _rg(H * k) * _rg(H * (n + s - 1))
            * _g(H * (s + 1)) * _rg(H * (n - k + s + 1)))


def _coeff_psi_table(n: int, k: int, s: int) -> CoefficientTable:
    return CoefficientTable("cor_psi", CroftonParams(n, k, k - 1, s, 0),
                            (CoefficientEntry(0, Target(n - 1, s, 0, 0, "psi"), coeff_psi(n, k, s)),))


# ---------------------------------------------------------------------------
# independent derivations used as cross-checks


def _intrinsic_extrinsic_weight(n: int, k: int, j: int, s: int, m: int, l: int) -> ExactScalar:
    return (ExactScalar(1, n - k) * math.factorial(s) * _rg(H * (n - j + s))
            * Fraction((-1) ** (m - l) * binom(m, l), 4**m * math.factorial(m) * math.factorial(s - 2 * m))
            * _g(H * (k - j + s) - m))


def kappa_from_chain(n: int, k: int, s: int, z: int):
    """kappa obtained by converting extrinsic to intrinsic measures and applying the weighted j=k-1 formula."""
    g = gamma_nkj(n, k, k - 1)
    terms = []
    for l in range(z + 1):
        for m in range(l, s // 2 + 1):
            if z - l > (s - 2 * m) // 2 + (m - l):
                continue
            terms.append(_intrinsic_extrinsic_weight(n, k, k - 1, s, m, l)
                         * lambda_jkm1_weighted(n, k, s - 2 * m, m - l, z - l))
    return g * _sum(terms)


def extrinsic_k1_from_chain(n: int, s: int) -> dict[Target, ExactScalar | ExactPolyPi]:
    """The k = 1 extrinsic right-hand side assembled from the weighted k = 1 intrinsic theorem."""
    acc: dict[Target, list] = {}
    for m in range(s // 2 + 1):
        for l in range(m + 1):
            w = _intrinsic_extrinsic_weight(n, 1, 0, s, m, l)
            for e in coeff_k1_local(n, s - 2 * m, m - l).entries:
                t = replace(e.target, q_power=e.target.q_power + l)
                acc.setdefault(t, []).append(w * e.coeff)
    out = {}
    for t, vals in acc.items():
        v = _sum(vals)
        if not _is_zero(v):
            out[t] = v
    return out


def psi_combination(n: int, k: int, s: int) -> dict[int, object]:
    """Coefficients of ``Q^t phi_{n-1}^{r,s-2t}`` in the integral of psi_{k-1}^{r,s}(K ∩ E).

    Uses the psi definition together with the extrinsic theorems (k > 1) or the
    k = 1 theorem; the result should be ``coeff_psi * c_t`` for the psi weights c_t.
    """
    weights = psi_coefficients(n, s)
    acc: dict[int, list] = {}
    for jj, w in enumerate(weights):
        table = coeff_extrinsic(n, k, s - 2 * jj) if k > 1 else _coeff_extrinsic_k1_table(n, s - 2 * jj)
        for e in table.entries:
            acc.setdefault(e.target.q_power + jj, []).append(e.coeff * w)
    return {t: _sum(v) for t, v in sorted(acc.items())}


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class FormulaInfo:
    """How a formula id maps to parameters, its left-hand side and its table."""

    formula_id: str
    builder: Callable[[CroftonParams], CoefficientTable]
    lhs: str  # "intrinsic", "extrinsic" or "psi"
    local: bool
    normalize: Callable[[dict], CroftonParams]
    description: str


def _p(d: dict, key: str, default=None) -> int:
    v = d.get(key, default)
    if v is None:
        raise CroftonDomainError(f"missing parameter {key}")
    return int(v)


def _fixed(formula: str, d: dict, **fixed) -> dict:
    out = dict(d)
    for key, value in fixed.items():
        if out.get(key) is not None and int(out[key]) != value:
            raise CroftonDomainError(f"{formula}: requires {key} = {value}")
        out[key] = value
    return out


def _norm_general(formula, fixed_i=None):
    def norm(d):
        if fixed_i is not None:
            d = _fixed(formula, d, i=fixed_i)
        return CroftonParams(_p(d, "n"), _p(d, "k"), _p(d, "j"), _p(d, "s", 0), _p(d, "i", 0))
    return norm


def _norm_jkm1(formula, fixed_i=None):
    def norm(d):
        k = _p(d, "k")
        d = _fixed(formula, d, j=k - 1)
        if fixed_i is not None:
            d = _fixed(formula, d, i=fixed_i)
        return CroftonParams(_p(d, "n"), k, k - 1, _p(d, "s", 0), _p(d, "i", 0))
    return norm


def _norm_jeqk(d):
    k = _p(d, "k")
    d = _fixed("thm_j_eq_k", d, j=k)
    return CroftonParams(_p(d, "n"), k, k, _p(d, "s", 0), _p(d, "i", 0))


def _norm_k1(formula, fixed_i=None):
    def norm(d):
        d = _fixed(formula, d, k=1, j=0)
        if fixed_i is not None:
            d = _fixed(formula, d, i=fixed_i)
        return CroftonParams(_p(d, "n"), 1, 0, _p(d, "s", 0), _p(d, "i", 0))
    return norm


def _norm_fixed_s(formula, s):
    def norm(d):
        d = _fixed(formula, d, s=s, i=0)
        return CroftonParams(_p(d, "n"), _p(d, "k"), _p(d, "j"), s, 0)
    return norm


def _table_j_eq_k(p: CroftonParams) -> CoefficientTable:
    c = coeff_thm_j_eq_k(p.n, p.k, p.i)
    entries = (CoefficientEntry(0, Target(p.n, 0, 0, p.i), c),) if p.s == 0 else ()
    return CoefficientTable("thm_j_eq_k", p, entries)


def _retag(table: CoefficientTable, formula_id: str) -> CoefficientTable:
    return replace(table, formula_id=formula_id)


FORMULAS: dict[str, FormulaInfo] = {
    info.formula_id: info
    for info in [
        FormulaInfo("thm_j_eq_k", _table_j_eq_k, "intrinsic", True, _norm_jeqk,
                    "weighted intrinsic measure of top order j = k"),
        FormulaInfo("thm_local_general", lambda p: coeff_local_general(p.n, p.k, p.j, p.s, p.i), "intrinsic", True,
                    _norm_general("thm_local_general"), "local intrinsic formula, j < k, k > 1"),
        FormulaInfo("thm_k1_local", lambda p: coeff_k1_local(p.n, p.s, p.i), "intrinsic", True,
                    _norm_k1("thm_k1_local"), "local intrinsic formula for lines"),
        FormulaInfo("thm_global", lambda p: coeff_global(p.n, p.k, p.j, p.s, p.i), "intrinsic", False,
                    _norm_general("thm_global"), "translation invariant global formula, j < k, k > 1"),
        FormulaInfo("cor_i0", lambda p: coeff_i0(p.n, p.k, p.j, p.s), "intrinsic", False,
                    _norm_general("cor_i0", fixed_i=0), "global formula without weight"),
        FormulaInfo("cor_s2", lambda p: coeff_s2(p.n, p.k, p.j), "intrinsic", False,
                    _norm_fixed_s("cor_s2", 2), "global formula for s = 2"),
        FormulaInfo("cor_s3", lambda p: coeff_s3(p.n, p.k, p.j), "intrinsic", False,
                    _norm_fixed_s("cor_s3", 3), "global formula for s = 3"),
        FormulaInfo("cor_j_km1", lambda p: coeff_j_km1(p.n, p.k, p.s), "intrinsic", True,
                    _norm_jkm1("cor_j_km1", fixed_i=0), "local formula for j = k-1"),
        FormulaInfo("eq_jkm1_weighted", lambda p: coeff_j_km1_weighted(p.n, p.k, p.s, p.i), "intrinsic", True,
                    _norm_jkm1("eq_jkm1_weighted"), "weighted local formula for j = k-1"),
        FormulaInfo("cor_k1_global", lambda p: coeff_k1_global(p.n, p.s), "intrinsic", False,
                    _norm_k1("cor_k1_global", fixed_i=0), "global formula for lines"),
        FormulaInfo("thm_ext_jkm1", lambda p: coeff_extrinsic(p.n, p.k, p.s), "extrinsic", True,
                    _norm_jkm1("thm_ext_jkm1", fixed_i=0), "extrinsic local formula, j = k-1"),
        FormulaInfo("thm_ext_k1", lambda p: _coeff_extrinsic_k1_table(p.n, p.s), "extrinsic", True,
                    _norm_k1("thm_ext_k1", fixed_i=0), "extrinsic local formula for lines"),
        FormulaInfo("cor_psi", lambda p: _coeff_psi_table(p.n, p.k, p.s), "psi", True,
                    _norm_jkm1("cor_psi", fixed_i=0), "extrinsic formula in the psi basis"),
    ]
}


def normalize_params(formula_id: str, **params) -> CroftonParams:
    if formula_id not in FORMULAS:
        raise CroftonDomainError(f"unknown formula {formula_id!r}; choose from {', '.join(sorted(FORMULAS))}")
    params = {k: v for k, v in params.items() if v is not None}
    p = FORMULAS[formula_id].normalize(params)
    if min(p.n, p.k, p.j, p.s, p.i) < 0:
        raise CroftonDomainError(f"{formula_id}: parameters must be non-negative")
    return p


@lru_cache(maxsize=2048)
def _cached_table(formula_id: str, p: CroftonParams) -> CoefficientTable:
    return FORMULAS[formula_id].builder(p)


def coefficient_table(formula_id: str, **params) -> CoefficientTable:
    p = normalize_params(formula_id, **params)
    return _cached_table(formula_id, p)


# ---------------------------------------------------------------------------
# right-hand sides


def _target_value(body: Polytope, t: Target, r: int, box: Box | None, cache: dict) -> SymTensor:
    n = body.dim
    key = (t.order, t.s, t.eps, t.basis)
    if key not in cache:
        if t.basis == "psi":
            parts = [_target_value(body, Target(t.order, t.s - 2 * jj), r, box, cache)
                     for jj in range(t.s // 2 + 1)]
            cache[key] = psi_from_phi(parts, n, t.s)
        else:
            cache[key] = phi(body, MeasureSpec(n, t.order, r, t.s, t.eps), box).value
    value = cache[key]
    if t.q_power:
        value = sym_mul(q_metric(n) ** t.q_power, value.to_float())
    return value.to_float()


def rhs_tensor(table: CoefficientTable, body: Polytope, r: int = 0, box: Box | None = None) -> SymTensor:
    """Sum of coefficient times target functional over the table's entries."""
    info = FORMULAS.get(table.formula_id)
    if info is not None and not info.local and (r != 0 or box is not None):
        raise CroftonDomainError(f"{table.formula_id}: global formula needs r = 0 and no box")
    n = table.params.n
    if body.dim != n:
        raise CroftonDomainError(f"body dimension {body.dim} does not match n = {n}")
    rank = _lhs_rank(table, r)
    total = SymTensor.zero(n, rank)
    cache: dict = {}
    for t, c in table.by_target().items():
        total = total + _target_value(body, t, r, box, cache).scale(float(c))
    return total


def _lhs_rank(table: CoefficientTable, r: int) -> int:
    p = table.params
    info = FORMULAS.get(table.formula_id)
    weight = p.i if info is None or info.lhs == "intrinsic" else 0
    return r + p.s + 2 * weight

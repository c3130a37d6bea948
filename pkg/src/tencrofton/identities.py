"""Batteries of identity checks: Gamma sums, coefficient tables and polytope measures.

Each suite returns a :class:`SuiteReport` listing individual checks so that
callers (the CLI, the acceptance tests) can print or serialize them.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

import numpy as np

from .crofton import (
    coeff_extrinsic_k1,
    coeff_global,
    coeff_i0,
    coeff_j_km1,
    coeff_k1_local,
    coeff_psi,
    kappa,
    psi_combination,
)
from .exact import DomainError, binom, lemma61, lemma62, lemma63, lemma64
from .polytope import Box, Polytope, catalog
from .symtensor import q_metric, sym_mul
from .tencm import MeasureSpec, mcmullen_face_sum, phi, psi_coefficients

__all__ = ["Check", "SuiteReport", "gamma_suite", "coefficient_suite", "measure_suite", "SUITES", "run_suite"]


@dataclass(frozen=True)
class Check:
    group: str
    params: dict
    passed: bool
    detail: str = ""

    def to_json(self) -> dict:
        return {"group": self.group, "params": self.params, "pass": self.passed, "detail": self.detail}


@dataclass
class SuiteReport:
    name: str
    checks: list[Check] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def groups(self) -> dict[str, tuple[int, int]]:
        """Group name -> (passed, total)."""
        out: dict[str, list[int]] = {}
        for c in self.checks:
            entry = out.setdefault(c.group, [0, 0])
            entry[0] += c.passed
            entry[1] += 1
        return {k: (v[0], v[1]) for k, v in out.items()}

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_json(self, include_passing: bool = False) -> dict:
        shown = self.checks if include_passing else self.failures()
        return {
            "suite": self.name,
            "pass": self.passed,
            "groups": {g: {"passed": p, "total": t} for g, (p, t) in self.groups().items()},
            "checks": [c.to_json() for c in shown],
        }


def _timed(name: str, body: Callable[[SuiteReport], None]) -> SuiteReport:
    report = SuiteReport(name)
    start = time.perf_counter()
    body(report)
    report.seconds = time.perf_counter() - start
    return report


def _half_integers(upper: int) -> list[Fraction]:
    return [Fraction(m, 2) for m in range(1, 2 * upper + 1)]


# ---------------------------------------------------------------------------
# Gamma sums


def gamma_suite(max_ab: int = 10, max_q: int = 10, max_a62: int = 20, max_zt: int = 6) -> SuiteReport:
    """Exact checks of the four alternating Gamma sums on half-integer grids."""
    values = _half_integers(max_ab)

    def run(report: SuiteReport):
        for q in range(max_q + 1):
            for a in values:
                for b in values:
                    lhs, rhs = lemma61(q, a, b)
                    report.checks.append(Check("lemma61", {"q": q, "a": str(a), "b": str(b)}, lhs == rhs))
        for a in range(max_a62 + 1):
            lhs, rhs = lemma62(a)
            report.checks.append(Check("lemma62", {"a": a}, lhs == rhs))
        for z in range(max_zt + 1):
            for a in values:
                if a <= z:
                    continue
                for b in values:
                    for c in values:
                        try:
                            lhs, rhs = lemma63(a, b, c, z)
                        except DomainError:
                            continue
                        report.checks.append(Check("lemma63", {"a": str(a), "b": str(b), "c": str(c), "z": z},
                                                   lhs == rhs))
        for t in range(1, max_zt + 1):
            for a in values:
                for b in values:
                    lhs, rhs = lemma64(a, b, t)
                    report.checks.append(Check("lemma64", {"a": str(a), "b": str(b), "t": t}, lhs == rhs))

    return _timed("gamma", run)


# ---------------------------------------------------------------------------
# coefficient tables


def _fmt(table: dict) -> str:
    return "{" + ", ".join(f"{k.order},{k.s},{k.eps},{k.q_power}: {v}" for k, v in sorted(table.items())) + "}"


def coefficient_suite(max_n: int = 5, max_s: int = 5, max_s_formal: int = 6, max_n_psi: int = 4,
                      max_s_psi: int = 4) -> SuiteReport:
    """Exact cross-checks between independently stated coefficient tables."""

    def run(report: SuiteReport):
        # global weighted theorem at i = 0 against the unweighted corollary
        for n in range(3, max_n + 1):
            for k in range(2, n):
                for j in range(k):
                    for s in range(max_s + 1):
                        a = coeff_global(n, k, j, s, 0).by_target()
                        b = coeff_i0(n, k, j, s).by_target()
                        report.checks.append(Check("global_i0", {"n": n, "k": k, "j": j, "s": s}, a == b,
                                                   "" if a == b else f"{_fmt(a)} vs {_fmt(b)}"))
        # s = 3, j = 1, k = 2 gives 1 / binom(n, 2)
        for n in range(3, max_n + 1):
            values = set(coeff_i0(n, 2, 1, 3).by_target().values())
            expected = Fraction(1, binom(n, 2))
            ok = len(values) == 1 and next(iter(values)) == expected
            report.checks.append(Check("s3_binomial", {"n": n}, ok, f"{[str(v) for v in values]}"))
        # the j = k-1 corollary read formally at k = 1 against the line theorem
        for n in range(2, max_n + 1):
            for s in range(max_s_formal + 1):
                a = coeff_j_km1(n, 1, s, formal=True).by_target()
                b = coeff_k1_local(n, s, 0).by_target()
                report.checks.append(Check("formal_k1", {"n": n, "s": s}, a == b,
                                           "" if a == b else f"{_fmt(a)} vs {_fmt(b)}"))
        # psi recombination of the extrinsic tables against the single psi constant
        for n in range(2, max_n_psi + 1):
            for k in range(1, n):
                for s in range(max_s_psi + 1):
                    c = coeff_psi(n, k, s)
                    weights = psi_coefficients(n, s)
                    combo = psi_combination(n, k, s)
                    bad = [t for t in range(len(weights)) if combo.get(t, 0) != c * weights[t]]
                    detail = "; ".join(f"t={t}: {combo.get(t, 0)} vs {c * weights[t]}" for t in bad)
                    report.checks.append(Check("psi_combination", {"n": n, "k": k, "s": s}, not bad, detail))
        # at s in {0, 1} psi equals phi, so the psi constant must equal the extrinsic one
        for n in range(2, max_n + 1):
            for k in range(1, n):
                for s in (0, 1):
                    direct = coeff_extrinsic_k1(n, s) if k == 1 else kappa(n, k, s, 0)
                    c = coeff_psi(n, k, s)
                    report.checks.append(Check("psi_direct", {"n": n, "k": k, "s": s}, c == direct,
                                               "" if c == direct else f"{c} vs {direct}"))

    return _timed("coefficients", run)


# ---------------------------------------------------------------------------
# polytope measures


DEFAULT_BODIES = (("cube", 2), ("cube", 3), ("simplex", 3))


def _box_for(P: Polytope) -> Box:
    """A box cutting through the body, used to exercise localization."""
    lo, hi = P.vertices.min(axis=0), P.vertices.max(axis=0)
    mid = lo + 0.6 * (hi - lo)
    return Box(tuple(lo - 1.0), tuple(mid))


def measure_suite(bodies: Iterable[tuple[str, int]] = DEFAULT_BODIES, max_s: int = 3, max_r: int = 1,
                  tol: float = 1e-8) -> SuiteReport:
    """Float checks of the facet relation and of McMullen's face-sum relation."""

    def run(report: SuiteReport):
        for name, dim in bodies:
            P = catalog(name, dim)
            n = P.dim
            q = q_metric(n)
            for box in (None, _box_for(P)):
                for r in range(max_r + 1):
                    for s in range(max_s + 1):
                        gen = phi(P, MeasureSpec(n, n - 1, r, s, eps=1), box).value
                        plain = phi(P, MeasureSpec(n, n - 1, r, s), box).value
                        shifted = phi(P, MeasureSpec(n, n - 1, r, s + 2), box).value
                        err = float(np.max(np.abs((gen - (sym_mul(q, plain) - shifted)).to_vector())))
                        report.checks.append(Check("facet_relation",
                                                   {"body": P.name, "r": r, "s": s, "box": box is not None},
                                                   err <= tol, f"max error {err:.3e}"))
            for j in range(n):
                for s in range(max_s + 1):
                    lhs = phi(P, MeasureSpec(n, j, 0, s + 2)).value.scale((n - j + s) / (s + 1))
                    rhs = mcmullen_face_sum(P, j, s)
                    err = float(np.max(np.abs((lhs - rhs).to_vector())))
                    report.checks.append(Check("mcmullen", {"body": P.name, "j": j, "s": s}, err <= tol,
                                               f"max error {err:.3e}"))

    return _timed("measures", run)


SUITES: dict[str, Callable[[], SuiteReport]] = {
    "gamma": gamma_suite,
    "coefficients": coefficient_suite,
    "measures": measure_suite,
}


def run_suite(name: str) -> SuiteReport:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return SUITES[name]()

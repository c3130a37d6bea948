"""Acceptance gate: one PASS/FAIL line per criterion, printed in the terminal summary.

Each test asserts its criterion at the stated tolerance and time budget.  A
criterion that cannot be met stays red.
"""

import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from tencrofton.grassmann_mc import (
    check_lemma_Q_power,
    check_lemma_sine_Q,
    check_prop_integrand,
    verify,
)
from tencrofton.identities import coefficient_suite, gamma_suite, measure_suite
from tencrofton.polytope import Box, catalog

SAMPLES = 100_000
SEED = 1
CUBE = catalog("cube", 3)
SIMPLEX = catalog("simplex", 3)
# clips the cube along a plane through its interior, exercising localization
HALF_BOX = Box((-1.0, -1.0, -1.0), (0.3, 2.0, 2.0))


def record(criterion: str, ok: bool, detail: str):
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {criterion:<5} {detail}")


def timed(fn, *args, **kwargs):
    start = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - start


# ---------------------------------------------------------------------------
# 1: gamma sums, exact


def test_1_gamma_identities():
    report, seconds = timed(gamma_suite)
    checks = sum(t for _, t in report.groups().values())
    ok = report.passed and seconds < 5.0
    record("1", ok, f"gamma-sum identities exact on {checks} grid points in {seconds:.2f} s (< 5 s)")
    assert report.passed, report.failures()[:5]
    assert seconds < 5.0


# ---------------------------------------------------------------------------
# 2: coefficient consistency, exact


@pytest.fixture(scope="module")
def coefficients():
    return timed(coefficient_suite)


@pytest.mark.parametrize("criterion,group,label", [
    ("2a", "global_i0", "weighted global table at i=0 equals unweighted table, n<=5, s<=5"),
    ("2b", "s3_binomial", "s=3, k=2, j=1 coefficient is 1/binom(n,2)"),
    ("2c", "formal_k1", "j=k-1 table read at k=1 equals line table, n<=5, s<=6"),
    ("2d", "psi_combination", "psi recombination of extrinsic tables equals psi constant, n<=4, s<=4"),
    ("2e", "psi_direct", "psi constant equals extrinsic constant at s in {0,1}"),
])
def test_2_coefficient_consistency(coefficients, criterion, group, label):
    report, seconds = coefficients
    passed, total = report.groups()[group]
    bad = [c for c in report.failures() if c.group == group]
    ok = not bad and seconds < 10.0
    failing = "" if not bad else "; failing: " + ", ".join(
        "(" + ",".join(f"{k}={v}" for k, v in c.params.items()) + ")" for c in bad)
    record(criterion, ok, f"{label}: {passed}/{total} exact in {seconds:.2f} s{failing}")
    assert not bad, [f"{c.params}: {c.detail}" for c in bad]
    assert seconds < 10.0


# ---------------------------------------------------------------------------
# 3: polytope measure identities, float


def test_3_measure_identities():
    report, seconds = timed(measure_suite)
    worst = max(float(c.detail.split()[-1]) for c in report.checks)
    ok = report.passed and seconds < 10.0
    record("3", ok, f"facet relation and McMullen relation: {len(report.checks)} checks, "
                    f"max error {worst:.1e} (<= 1e-8) in {seconds:.2f} s")
    assert report.passed
    assert seconds < 10.0


# ---------------------------------------------------------------------------
# 4: Grassmannian integral identities by Monte Carlo


def _run_reports(runs):
    results = [timed(fn, *args, samples=SAMPLES, seed=SEED) for fn, args in runs]
    z_max = max(r.z_max for r, _ in results)
    slowest = max(s for _, s in results)
    failed = [r.params for r, _ in results if not r.passed]
    return z_max, slowest, failed


def _tilted(columns: int) -> tuple[np.ndarray, np.ndarray]:
    """An orthonormal basis of a generic subspace of R^3 and a unit vector orthogonal to it."""
    Qm = np.linalg.qr(np.array([[1.0, 0.2, -0.3], [0.4, 1.0, 0.1], [-0.2, 0.5, 1.0]]))[0]
    return Qm[:, :columns], Qm[:, 2]


def _report_mc(criterion, label, runs):
    z_max, slowest, failed = _run_reports(runs)
    ok = not failed and slowest < 30.0
    record(criterion, ok, f"{label}: {len(runs)} runs at {SAMPLES} samples, max |z| = {z_max:.2f} (<= 4), "
                          f"slowest {slowest:.1f} s (< 30 s)" + (f"; failing {failed}" if failed else ""))
    assert not failed
    assert slowest < 30.0


def test_4a_subspace_metric_powers():
    runs = [(check_lemma_Q_power, (n, k, i)) for n in range(2, 5) for k in range(1, n) for i in range(3)]
    _report_mc("4a", "mean of Q(L)^i over G(n,k), n<=4", runs)


def test_4b_sine_weighted_metric():
    runs = [(check_lemma_sine_Q, (3, k, r, i, _tilted(r)[0] if r < 3 else np.eye(3)))
            for k, r in [(2, 2), (2, 3)] for i in range(2)]
    _report_mc("4b", "mean of [F,L]^2 Q(L)^i, n=3, (k,r) in {(2,2),(2,3)}", runs)


def test_4c_integrand_planes():
    F, u = _tilted(2)
    runs = [(check_prop_integrand, (3, 2, 1, s, i, F, u)) for s in range(3) for i in range(2)]
    _report_mc("4c", "slice integrand for planes, n=3, k=2, j=1, s<=2, i<=1", runs)


def test_4d_integrand_lines():
    F, u = _tilted(2)
    runs = [(check_prop_integrand, (3, 1, 0, s, i, F, u)) for s in range(4) for i in range(2)]
    _report_mc("4d", "slice integrand for lines, n=3, s<=3, i<=1", runs)


# ---------------------------------------------------------------------------
# 5: end-to-end Crofton formulas by Monte Carlo


def _report_verify(criterion, label, runs):
    results = []
    for formula, body, box, r, params in runs:
        report, seconds = timed(verify, formula, body, box=box, r=r, samples=SAMPLES, seed=SEED, workers=1,
                                **params)
        results.append((report, seconds))
    z_max = max(rep.z_max for rep, _ in results)
    slowest = max(s for _, s in results)
    failed = [f"{rep.formula} {rep.body} r={rep.r} {rep.params.to_json()} box={rep.box is not None}"
              for rep, _ in results if not rep.passed]
    ok = not failed and slowest < 60.0
    record(criterion, ok, f"{label}: {len(runs)} runs, max |z| = {z_max:.2f} (<= 4), slowest {slowest:.1f} s "
                          f"(< 60 s)" + (f"; failing {failed}" if failed else ""))
    assert not failed
    assert slowest < 60.0
    return results


def test_5a_top_order():
    runs = [("thm_j_eq_k", CUBE, None, r, {"k": 2, "s": s, "i": i})
            for i in (0, 1) for r in (0, 1) for s in (0, 1)]
    results = _report_verify("5a", "top-order formula on cube, k=2, i,r in {0,1}, zero claim at s=1", runs)
    assert all(rep.rhs.max_abs() == 0 for rep, _ in results if rep.params.s == 1)


def test_5b_lines():
    runs = [("thm_k1_local", CUBE, box, 0, {"s": s, "i": i})
            for box in (HALF_BOX, None) for s in (0, 1, 2) for i in (0, 1)]
    _report_verify("5b", "line formula on cube, s<=2, i<=1, clipped box and global", runs)


def test_5c_general_and_j_km1():
    runs = [(formula, body, None, 0, {"k": 2, "j": 1, "s": s})
            for formula in ("thm_local_general", "cor_j_km1") for body in (CUBE, SIMPLEX) for s in (0, 1, 2)]
    _report_verify("5c", "general local and j=k-1 formulas on cube and simplex, k=2, j=1, s<=2", runs)


def test_5d_extrinsic_planes():
    # the global s=1 measures vanish by symmetry, so s=1 also runs in the clipped box
    runs = [("thm_ext_jkm1", CUBE, None, 0, {"k": 2, "s": s}) for s in (0, 1, 2)]
    runs.append(("thm_ext_jkm1", CUBE, HALF_BOX, 0, {"k": 2, "s": 1}))
    results = _report_verify("5d", "extrinsic j=k-1 formula on cube, k=2, s<=2, special odd branch boxed", runs)
    assert results[-1][0].rhs.max_abs() > 0.1


def test_5e_extrinsic_lines():
    runs = [("thm_ext_k1", CUBE, None, 0, {"s": s}) for s in range(4)]
    runs += [("thm_ext_k1", CUBE, HALF_BOX, 0, {"s": s}) for s in (1, 3)]
    _report_verify("5e", "extrinsic line formula on cube, s<=3, odd s also boxed", runs)


def test_5f_odd_global_zero_versus_local():
    runs = [("cor_k1_global", CUBE, None, 0, {"s": s}) for s in (1, 3)]
    runs.append(("thm_k1_local", CUBE, HALF_BOX, 0, {"s": 1}))
    results = _report_verify("5f", "global line formula zero at odd s, local clipped value nonzero", runs)
    assert all(rep.rhs.max_abs() == 0 for rep, _ in results[:2])
    local = results[-1][0]
    assert local.rhs.max_abs() > 0.1 and np.max(np.abs(local.lhs.mean.to_vector())) > 0.1

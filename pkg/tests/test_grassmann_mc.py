import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats
from scipy.spatial.transform import Rotation

from tencrofton.crofton import coefficient_table, rhs_tensor
from tencrofton.exact import kappa_ball
from tencrofton.grassmann_mc import (
    LhsSpec,
    check_lemma_Q_power,
    check_lemma_sine_Q,
    check_prop_integrand,
    crofton_lhs_mc,
    generalized_sine,
    generalized_sine_batch,
    lemma_Q_power_exact,
    prop_integrand_exact,
    sample_flat_hitting_ball,
    sample_flats_batch,
    sample_grassmann,
    sample_grassmann_batch,
    verify,
)
from tencrofton.polytope import Box, catalog
from tencrofton.symtensor import q_metric

CUBE = catalog("cube", 3)


def test_sampled_bases_are_orthonormal():
    rng = np.random.default_rng(0)
    for n, k in [(2, 1), (3, 2), (5, 3)]:
        B = sample_grassmann(n, k, rng)
        assert np.allclose(B.T @ B, np.eye(k), atol=1e-10)
    B, perp = sample_grassmann_batch(4, 2, 50, rng)
    full = np.concatenate([B, perp], axis=2)
    assert np.allclose(np.einsum("Nij,Nik->Njk", full, full), np.eye(4), atol=1e-10)


def test_line_angles_are_uniform():
    B, _ = sample_grassmann_batch(2, 1, 10_000, np.random.default_rng(3))
    angles = np.mod(np.arctan2(B[:, 1, 0], B[:, 0, 0]), np.pi)
    assert stats.kstest(angles, stats.uniform(0, np.pi).cdf).pvalue > 0.01


@pytest.mark.parametrize("n,k", [(3, 1), (4, 3)])
def test_mean_subspace_metric(n, k):
    B, _ = sample_grassmann_batch(n, k, 100_000, np.random.default_rng(11))
    P = np.einsum("Nik,Njk->Nij", B, B)
    mean, se = P.mean(axis=0), P.std(axis=0, ddof=1) / math.sqrt(len(P))
    assert np.all(np.abs(mean - k / n * np.eye(n)) <= 3 * np.maximum(se, 1e-12))


def test_flat_translations_stay_in_the_window():
    rng = np.random.default_rng(5)
    center = np.array([0.5, 0.5, 0.5])
    for _ in range(50):
        frame, weight = sample_flat_hitting_ball(3, 1, 2.0, center, rng)
        foot = center - frame.basis @ (frame.basis.T @ center)
        assert np.linalg.norm(frame.translation - foot) <= 2.0 + 1e-12
        assert np.allclose(frame.basis.T @ frame.translation, 0, atol=1e-10)
    assert weight == pytest.approx(math.pi * 4.0)


@pytest.mark.parametrize("n,k", [(2, 1), (3, 1), (3, 2), (4, 2)])
def test_measure_of_flats_meeting_a_smaller_ball(n, k):
    rho, R = 0.6, 1.3
    center = np.linspace(-1, 1, n)
    B, t, weight = sample_flats_batch(n, k, 100_000, R, center, np.random.default_rng(n * 10 + k))
    foot = center - np.einsum("Nik,Njk,j->Ni", B, B, center)
    hits = np.linalg.norm(t - foot, axis=1) <= rho
    estimate = weight * hits.mean()
    stderr = weight * hits.std(ddof=1) / math.sqrt(len(hits))
    assert abs(estimate - float(kappa_ball(n - k)) * rho ** (n - k)) <= 3 * stderr


def test_constant_integrand_has_zero_variance():
    est = crofton_lhs_mc(CUBE, LhsSpec(3, 2, 0, kind="intrinsic", s=0), samples=2_000, seed=1)
    assert est.stderr.max_abs() > 0  # the Euler characteristic of the slice is not constant
    report = check_lemma_Q_power(3, 2, 0, samples=1_000, seed=2)
    assert report.estimate.stderr.max_abs() == 0
    assert report.passed


def test_generalized_sine_examples():
    e1, e2 = np.array([[1.0], [0.0]]), np.array([[0.0], [1.0]])
    assert generalized_sine(e1, e1) == pytest.approx(1.0)
    assert generalized_sine(e1, e2) == pytest.approx(1.0)
    theta = math.pi / 6
    tilted = np.array([[math.cos(theta)], [math.sin(theta)]])
    assert generalized_sine(tilted, e1) == pytest.approx(0.5)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 5).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n - 1), st.integers(1, n - 1),
                                                     st.integers(0, 2**32 - 1))))
def test_generalized_sine_range_and_symmetry(args):
    n, a, b, seed = args
    rng = np.random.default_rng(seed)
    F, L = sample_grassmann(n, a, rng), sample_grassmann(n, b, rng)
    value = generalized_sine(F, L)
    assert -1e-12 <= value <= 1 + 1e-12
    assert value == pytest.approx(generalized_sine(L, F), abs=1e-10)


def test_complement_form_vanishes_exactly_for_non_generic_position():
    # two planes in R^4 sharing a line span only a 3-space
    e = np.eye(4)
    F_perp = e[:, [2, 3]]
    L_perp = e[:, [1, 3]][None]
    assert generalized_sine_batch(F_perp, L_perp)[0] == pytest.approx(0.0, abs=1e-12)
    generic = np.linalg.qr(np.random.default_rng(0).standard_normal((4, 2)))[0][None]
    assert generalized_sine_batch(F_perp, generic)[0] > 1e-3


def test_subspace_metric_power_mean_values():
    assert np.allclose(lemma_Q_power_exact(2, 1, 1).to_array(), 0.5 * np.eye(2))
    value = lemma_Q_power_exact(3, 2, 2)
    assert value.coeff((4, 0, 0)) == pytest.approx(8 / 15)
    assert (value.coeff((4, 0, 0)) * q_metric(3) ** 2).coeff((2, 2, 0)) == pytest.approx(16 / 15)


@pytest.mark.parametrize("n,k,i", [(2, 1, 1), (3, 2, 2), (4, 1, 2)])
def test_subspace_metric_power_mean_monte_carlo(n, k, i):
    assert check_lemma_Q_power(n, k, i, samples=40_000, seed=4).passed


@pytest.mark.parametrize("n,k,r,i", [(2, 1, 1, 0), (3, 2, 2, 1), (3, 2, 3, 1)])
def test_sine_weighted_metric_mean_monte_carlo(n, k, r, i):
    F = np.eye(n)[:, :r]
    assert check_lemma_sine_Q(n, k, r, i, F, samples=40_000, seed=6).passed


def test_sine_weighted_metric_mean_rejects_small_dimensions():
    with pytest.raises(ValueError):
        check_lemma_sine_Q(3, 1, 1, 0, np.eye(3)[:, :1], samples=10)


@pytest.mark.parametrize("k,j,s,i", [(2, 1, 0, 0), (2, 1, 2, 1), (1, 0, 3, 1), (1, 0, 2, 0)])
def test_integrand_proposition_monte_carlo(k, j, s, i):
    # F has dimension n - k + j and u is a unit vector orthogonal to it
    tilt = Rotation.from_euler("xz", [0.4, 0.9]).as_matrix()
    F = tilt @ np.eye(3)[:, :3 - k + j]
    u = tilt @ np.array([0.0, 0.0, 1.0]) if 3 - k + j == 2 else tilt @ np.array([0.0, 0.6, 0.8])
    assert check_prop_integrand(3, k, j, s, i, F, u, samples=40_000, seed=8).passed


def test_line_integrand_odd_branch_is_single_term():
    u = np.array([0.0, 0.0, 1.0])
    value = prop_integrand_exact(3, 1, 0, 1, 0, np.zeros((3, 0)), u)
    c = math.gamma(1.5) * math.gamma(1.5) / (math.sqrt(math.pi) * math.gamma(2.5))
    assert value.coeff((0, 0, 1)) == pytest.approx(c)
    assert value.coeff((1, 0, 0)) == pytest.approx(0.0)


def test_determinism_and_worker_split():
    spec = LhsSpec(3, 1, 0, s=2)
    a = crofton_lhs_mc(CUBE, spec, samples=3_000, seed=9, workers=1)
    b = crofton_lhs_mc(CUBE, spec, samples=3_000, seed=9, workers=1)
    assert a == b
    c = crofton_lhs_mc(CUBE, spec, samples=3_000, seed=9, workers=2)
    assert c.samples == 3_000 and c.workers == 2


def test_top_order_slice_volume_example():
    report = verify("thm_j_eq_k", CUBE, k=2, s=0, i=0, samples=20_000, seed=3)
    assert report.rhs.coeff((0, 0, 0)) == pytest.approx(1.0)
    assert report.passed


def test_top_order_odd_s_is_zero():
    report = verify("thm_j_eq_k", CUBE, k=2, s=3, samples=20_000, seed=3)
    assert report.rhs.max_abs() == 0
    assert report.passed


def test_line_formula_on_cube():
    assert verify("thm_k1_local", CUBE, s=2, samples=50_000, seed=7).passed


def test_global_odd_zero_versus_local_nonzero():
    box = Box((-1, -1, -1), (0.3, 2, 2))
    assert verify("cor_k1_global", CUBE, s=1, samples=30_000, seed=2).passed
    local = verify("thm_k1_local", CUBE, box=box, s=1, samples=30_000, seed=2)
    assert local.passed
    assert local.rhs.max_abs() > 0.1


def test_extrinsic_special_branch_end_to_end():
    box = Box((-1, -1, -1), (0.3, 2, 2))
    assert verify("thm_ext_jkm1", CUBE, box=box, k=2, s=1, samples=50_000, seed=5).passed


def test_rotated_body_gives_rotated_estimate():
    R = Rotation.from_euler("xyz", [0.3, -0.7, 1.1]).as_matrix()
    moved = CUBE.transformed(R)
    est = crofton_lhs_mc(moved, LhsSpec(3, 1, 0, s=2), samples=40_000, seed=12)
    rhs = rhs_tensor(coefficient_table("thm_k1_local", n=3, s=2), CUBE).to_array()
    z = (est.mean.to_array() - R @ rhs @ R.T)
    se = est.stderr.to_array()
    assert np.all(np.abs(z) <= 4 * np.maximum(se, 1e-12) + 1e-12)

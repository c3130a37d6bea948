import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial.transform import Rotation

from tencrofton import _dense
from tencrofton.polytope import Box, FlatFrame, build, catalog
from tencrofton.symtensor import approx_eq
from tencrofton.tencm import (
    MeasureSpec,
    cone_sphere_moment_dense,
    extrinsic_phi_of_flat_body,
    full_sphere_moment,
    intrinsic_to_extrinsic,
    mcmullen_face_sum,
    minkowski_tensor,
    phi,
    phi_from_psi,
    psi_from_phi,
    solid_angle_3d,
)

CUBE = catalog("cube", 3)


@pytest.mark.parametrize("j,expected", [(3, 1.0), (2, 6.0), (1, 6 * math.pi), (0, 4 * math.pi)])
def test_scalar_measures_of_unit_cube(j, expected):
    assert minkowski_tensor(CUBE, j, 0, 0).coeff((0, 0, 0)) == pytest.approx(expected, rel=1e-12)


def test_square_perimeter_and_vertex_angles():
    sq = catalog("cube", 2)
    assert minkowski_tensor(sq, 1, 0, 0).coeff((0, 0)) == pytest.approx(4.0)
    assert minkowski_tensor(sq, 0, 0, 0).coeff((0, 0)) == pytest.approx(2 * math.pi)


def test_box_covering_the_body_gives_the_global_tensor():
    box = Box((-1, -1, -1), (2, 2, 2))
    for j in range(3):
        local = phi(CUBE, MeasureSpec(3, j, 1, 2), box).value
        assert approx_eq(local, minkowski_tensor(CUBE, j, 1, 2), 1e-10)


def test_half_box_keeps_half_the_edges():
    box = Box((0, 0, 0), (0.5, 2, 2))
    assert phi(CUBE, MeasureSpec(3, 1), box).value.coeff((0, 0, 0)) == pytest.approx(3 * math.pi)


def test_measures_vanishing_by_convention():
    assert minkowski_tensor(CUBE, 3, 0, 2).max_abs() == 0
    assert phi(CUBE, MeasureSpec(3, 4)).value.max_abs() == 0
    with pytest.raises(ValueError):
        MeasureSpec(3, 0, eps=1)


def test_cone_moment_is_solid_angle():
    gens = np.array([[1, 0, 0], [0, 1, 0], [1, 1, 1.0]])
    exact = solid_angle_3d(*gens)
    assert cone_sphere_moment_dense(gens, np.eye(3), 0)[0] == pytest.approx(exact, rel=1e-12)
    mc = cone_sphere_moment_dense(gens, np.eye(3), 0, method="mc", rng=np.random.default_rng(1))[0]
    assert mc == pytest.approx(exact, rel=0.02)


def test_octant_second_moment():
    # diagonal: an eighth of 4 pi / 3; off-diagonal: int u1 u2 = 1/3 by direct integration
    row = cone_sphere_moment_dense(np.eye(3), np.eye(3), 2)
    expected = np.full((3, 3), 1 / 3) + (math.pi / 6 - 1 / 3) * np.eye(3)
    assert np.allclose(_dense.to_symtensor(row, 3, 2).to_array(), expected, atol=1e-12)


def test_full_sphere_second_moment():
    assert np.allclose(full_sphere_moment(3, 2, np.eye(3)).to_array(), 4 * math.pi / 3 * np.eye(3))
    assert full_sphere_moment(3, 1, np.eye(3)).max_abs() == 0


def test_mcmullen_relation_on_simplex():
    P = catalog("simplex", 3)
    n, j, s = 3, 1, 1
    lhs = minkowski_tensor(P, j, 0, s + 2).scale((n - j + s) / (s + 1))
    assert approx_eq(lhs, mcmullen_face_sum(P, j, s), 1e-9)


def test_intrinsic_measures_push_to_extrinsic():
    tri = build(np.array([[0, 0], [1, 0], [0.2, 0.9]]))
    basis = np.linalg.qr(np.array([[1, 0.3, 0.2], [0, 1, 0.5]]).T)[0]
    frame = FlatFrame(basis, np.array([0.1, -0.2, 0.4]))
    n, k, j, r, s = 3, 2, 1, 1, 2
    intrinsic = [phi(tri, MeasureSpec(2, j, r, s - 2 * m, kind="intrinsic"), frame=frame).value
                 for m in range(s // 2 + 1)]
    expected = extrinsic_phi_of_flat_body(tri, frame, j, r, s)
    assert approx_eq(intrinsic_to_extrinsic(intrinsic, frame, j, k, r, s, n), expected, 1e-9)


bodies = st.tuples(st.integers(2, 3), st.integers(0, 2**32 - 1)).map(
    lambda a: build(np.random.default_rng(a[1]).standard_normal((a[0] + 4, a[0]))))


@settings(max_examples=15, deadline=None)
@given(bodies, st.data())
def test_trace_of_second_moment_recovers_scalar(P, data):
    j = data.draw(st.integers(0, P.dim - 1))
    trace = np.trace(minkowski_tensor(P, j, 0, 2).to_array())
    assert trace == pytest.approx(minkowski_tensor(P, j, 0, 0).coeff((0,) * P.dim), rel=1e-9)


@settings(max_examples=15, deadline=None)
@given(bodies, st.data())
def test_translation_shifts_the_position_moment(P, data):
    j = data.draw(st.integers(0, P.dim))
    t = np.array(data.draw(st.lists(st.floats(-2, 2), min_size=P.dim, max_size=P.dim)))
    moved = P.transformed(np.eye(P.dim), t)
    base = minkowski_tensor(P, j, 1, 0).to_array()
    scalar = minkowski_tensor(P, j, 0, 0).coeff((0,) * P.dim)
    assert np.allclose(minkowski_tensor(moved, j, 1, 0).to_array(), base + scalar * t, atol=1e-9)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 2))
def test_rotation_covariance(seed, j):
    P = build(np.random.default_rng(seed).standard_normal((7, 3)))
    R = Rotation.random(random_state=seed).as_matrix()
    before = minkowski_tensor(P, j, 0, 2).to_array()
    after = minkowski_tensor(P.transformed(R), j, 0, 2).to_array()
    assert np.allclose(after, R @ before @ R.T, atol=1e-8)


@settings(max_examples=10, deadline=None)
@given(bodies, st.integers(0, 4))
def test_psi_basis_round_trip(P, s):
    j = 0
    phis = [minkowski_tensor(P, j, 0, s - 2 * m) for m in range(s // 2 + 1)]
    psis = [psi_from_phi(phis[m:], P.dim, s - 2 * m) for m in range(s // 2 + 1)]
    assert approx_eq(phi_from_psi(psis, P.dim, s), phis[0], 1e-9)

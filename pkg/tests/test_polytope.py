import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial import ConvexHull

from tencrofton.polytope import (
    Box,
    DegenerateError,
    FlatFrame,
    build,
    catalog,
    face_moment_tensor,
    face_volume,
    load_body,
    normal_cone,
    slice_polytope,
)


@pytest.mark.parametrize("name,n,counts", [
    ("cube", 3, [8, 12, 6]),
    ("simplex", 3, [4, 6, 4]),
    ("crosspolytope", 3, [6, 12, 8]),
    ("cube", 4, [16, 32, 24, 8]),
    ("simplex", 2, [3, 3]),
])
def test_catalog_face_counts(name, n, counts):
    assert catalog(name, n).face_counts() == counts


def test_unknown_catalog_body():
    with pytest.raises(ValueError):
        catalog("dodecahedron", 3)
    with pytest.raises(ValueError):
        catalog("cube", 7)


def test_degenerate_input_is_rejected():
    with pytest.raises(DegenerateError):
        build([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]])


def test_interior_points_are_dropped():
    P = build([[0, 0], [1, 0], [0, 1], [1, 1], [0.5, 0.5]])
    assert len(P.vertices) == 4


def test_load_body_from_json(tmp_path):
    path = tmp_path / "tri.json"
    path.write_text(json.dumps({"name": "tri", "dim": 2, "vertices": [[0, 0], [2, 0], [0, 2]]}))
    P = load_body(str(path))
    assert P.name == "tri"
    assert face_volume(P, P.faces[2][0]) == pytest.approx(2.0)


def test_box_parsing_and_validation():
    box = Box.parse([0, 1, -2, 2])
    assert box.lo == (0.0, -2.0) and box.hi == (1.0, 2.0)
    with pytest.raises(ValueError):
        Box.parse([0, 1, 2])
    with pytest.raises(ValueError):
        Box((1.0,), (0.0,))


def test_normal_cones_of_cube():
    P = catalog("cube", 3)
    vertex_cone = normal_cone(P, P.faces[0][0])
    assert vertex_cone.dim == 3
    edge_cone = normal_cone(P, P.faces[1][0])
    assert edge_cone.dim == 2
    assert np.allclose(np.linalg.norm(edge_cone.generators, axis=1), 1)


def test_boxed_moment_of_cube():
    P = catalog("cube", 3)
    top = P.faces[3][0]
    box = Box((-1, -1, -1), (0.25, 2, 2))
    assert face_moment_tensor(P, top, 0, box).coeff((0, 0, 0)) == pytest.approx(0.25)
    centroid = face_moment_tensor(P, top, 1, box)
    assert centroid.coeff((1, 0, 0)) == pytest.approx(0.25 * 0.125)
    assert centroid.coeff((0, 1, 0)) == pytest.approx(0.25 * 0.5)


def test_slice_of_cube_by_diagonal_plane():
    P = catalog("cube", 3)
    basis = np.array([[1, -1, 0], [1, 1, -2]], dtype=float).T
    basis /= np.linalg.norm(basis, axis=0)
    center = np.full(3, 0.5)
    result = slice_polytope(P, FlatFrame(basis, center))
    assert result.ok
    assert len(result.polytope.vertices) == 6  # regular hexagon
    assert face_volume(result.polytope, result.polytope.faces[2][0]) == pytest.approx(3 * np.sqrt(3) / 4)


def test_slice_missing_the_body_is_empty():
    P = catalog("cube", 3)
    frame = FlatFrame(np.array([[1.0], [0.0], [0.0]]), np.array([0.0, 5.0, 5.0]))
    assert slice_polytope(P, frame).status == "empty"


def test_frame_rejects_non_orthonormal_basis():
    with pytest.raises(ValueError):
        FlatFrame(np.array([[1.0], [1.0]]), np.zeros(2))


point_clouds = st.tuples(st.integers(2, 4), st.integers(8, 20), st.integers(0, 2**32 - 1)).map(
    lambda a: np.random.default_rng(a[2]).standard_normal((a[1], a[0])))


@settings(max_examples=25, deadline=None)
@given(point_clouds)
def test_hull_agrees_with_qhull(points):
    P = build(points)
    hull = ConvexHull(points)
    assert len(P.vertices) == len(hull.vertices)
    assert face_volume(P, P.faces[P.dim][0]) == pytest.approx(hull.volume, rel=1e-9)


@settings(max_examples=25, deadline=None)
@given(point_clouds)
def test_euler_relation(points):
    P = build(points)
    counts = P.face_counts() + [1]
    assert sum((-1) ** i * f for i, f in enumerate(counts)) == 1


@settings(max_examples=20, deadline=None)
@given(point_clouds)
def test_every_vertex_satisfies_the_facet_inequalities(points):
    P = build(points)
    A, c = P.h_representation()
    assert np.all(P.vertices @ A.T <= c + 1e-9)
    assert np.all(P.contains(points))

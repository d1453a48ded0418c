import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lefschetz.mesh import (
    InvalidStateError,
    TriSurface,
    corner_angles,
    cotan_laplacian,
    cotan_weights,
    total_area,
    validate,
    vertex_areas,
    vertex_curvature,
)
from lefschetz.meshes import mutation_fixtures, regular_tetrahedron, torus_grid


def pillow(a, b, c):
    """Two copies of one triangle glued along their boundary; sides opposite 0, 1, 2."""
    return TriSurface.from_triangles([(0, 1, 2), (0, 2, 1)],
                                     {(1, 2): a, (0, 2): b, (0, 1): c}, declared_genus=0)


# ------------------------------------------------------------------ validate

def test_tetrahedron_validates():
    rep = validate(regular_tetrahedron())
    assert rep.passed and rep.genus == 0 and rep.euler_characteristic == 2


def test_three_by_three_torus_validates():
    rep = validate(torus_grid(3))
    assert rep.passed and rep.euler_characteristic == 0 and rep.genus == 1


def test_oversized_edge_fails_at_two_faces():
    tet = regular_tetrahedron()
    lengths = {tuple(e): 1.0 for e in tet.edges.tolist()}
    lengths[(0, 1)] = 10.0
    rep = validate(TriSurface.from_triangles(tet.triangles, lengths, declared_genus=0))
    bad = [v for v in rep.violations if v.invariant == "triangle-inequality"]
    assert not rep.passed and not rep.triangle_inequality
    assert len(bad) == 2
    assert all({0, 1} <= set(v.simplex) for v in bad)


def test_reference_meshes_validate(meshes):
    for g, surf in meshes.items():
        rep = validate(surf)
        assert rep.passed, rep.summary()
        assert rep.genus == g
        if g >= 2:
            assert surf.n_vertices >= 64


@pytest.mark.parametrize("kind,invariant", [
    ("flipped-triangle", "orientable"),
    ("deleted-face", "closed"),
    ("oversized-edge", "triangle-inequality"),
])
def test_mutations_rejected(genus2, kind, invariant):
    rep = validate(mutation_fixtures(genus2)[kind])
    assert not rep.passed
    assert invariant in {v.invariant for v in rep.violations}


def test_declared_genus_mismatch():
    surf = TriSurface.from_triangles(regular_tetrahedron().triangles, 1.0, declared_genus=1)
    rep = validate(surf)
    assert not rep.passed and "genus" in {v.invariant for v in rep.violations}


# -------------------------------------------------------------------- angles

def test_equilateral_angles():
    ang = corner_angles(pillow(1, 1, 1).state())
    np.testing.assert_allclose(ang, math.pi / 3, atol=1e-15)


def test_right_triangle_angles():
    # sides 3, 4, 5 opposite vertices 0, 1, 2
    ang = corner_angles(pillow(3, 4, 5).state())[0]
    np.testing.assert_allclose(ang, [math.atan(3 / 4), math.atan(4 / 3), math.pi / 2], atol=1e-14)
    assert ang[0] == pytest.approx(0.6435011087932844)


def test_invalid_state_raises():
    surf = pillow(1, 1, 1)
    with pytest.raises(InvalidStateError):
        corner_angles(surf.state([2.0, 2.0, 0.0]))


def test_constant_shift_preserves_angles(genus2, rng):
    u = rng.uniform(-0.3, 0.3, genus2.n_vertices)
    a = corner_angles(genus2.state(u))
    b = corner_angles(genus2.state(u + 0.7))
    np.testing.assert_allclose(a, b, atol=1e-13)


@settings(max_examples=50, deadline=None)
@given(arrays(float, 90, elements=st.floats(-0.3, 0.3)))
def test_angle_sums_and_gauss_bonnet(u):
    from lefschetz.meshes import load_trisurf
    surf = load_trisurf("genus2")
    state = surf.state(u)
    ang = corner_angles(state)
    assert np.all((ang > 0) & (ang < math.pi))
    np.testing.assert_allclose(ang.sum(axis=1), math.pi, atol=1e-12)
    assert abs(vertex_curvature(state).sum() - 2 * math.pi * surf.euler_characteristic) <= 1e-9


# ----------------------------------------------------------------- curvature

def test_tetrahedron_curvature():
    K = vertex_curvature(regular_tetrahedron().state())
    np.testing.assert_allclose(K, math.pi, atol=1e-14)
    assert K.sum() == pytest.approx(4 * math.pi, abs=1e-12)


def test_flat_grid_has_zero_curvature():
    K = vertex_curvature(torus_grid(6).state())
    np.testing.assert_allclose(K, 0.0, atol=1e-14)


def test_genus2_total_curvature(genus2, rng):
    K = vertex_curvature(genus2.state(rng.uniform(-0.3, 0.3, genus2.n_vertices)))
    assert K.sum() == pytest.approx(-4 * math.pi, abs=1e-9)


# ----------------------------------------------------------------- laplacian

def test_laplacian_kills_constants(genus2, rng):
    L = cotan_laplacian(genus2.state(rng.uniform(-0.3, 0.3, genus2.n_vertices)))
    np.testing.assert_allclose(L @ np.ones(genus2.n_vertices), 0.0, atol=1e-12)


def test_laplacian_symmetric(genus2, rng):
    L = cotan_laplacian(genus2.state(rng.uniform(-0.3, 0.3, genus2.n_vertices)))
    f, h = rng.standard_normal((2, genus2.n_vertices))
    assert (L @ f) @ h == pytest.approx((L @ h) @ f, abs=1e-12)


def test_laplacian_spectrum(meshes, rng):
    for surf in meshes.values():
        L = cotan_laplacian(surf.state(rng.uniform(-0.2, 0.2, surf.n_vertices))).toarray()
        ev = np.linalg.eigvalsh(-L)
        assert abs(ev[0]) <= 1e-9
        assert ev[1] >= 1e-6


def _embedded_cot(p, q, r):
    """cot of the angle at p in the planar triangle pqr, from coordinates."""
    u, v = q - p, r - p
    return float(u @ v) / abs(u[0] * v[1] - u[1] * v[0])


def test_flat_patch_linear_function_is_harmonic():
    # unit grid with diagonals (i,j)-(i+1,j+1) is a triangular lattice
    n = 6
    surf = torus_grid(n)
    a, b = np.array([1.0, 0.0]), np.array([-0.5, math.sqrt(3) / 2])
    L = cotan_laplacian(surf.state())
    for coord in (0, 1):
        f = np.array([(i * a + j * b)[coord] for i in range(n) for j in range(n)])
        assert (L @ f)[2 * n + 2] == pytest.approx(0.0, abs=1e-12)
    w = cotan_weights(surf.state())
    np.testing.assert_allclose(w, 1 / math.sqrt(3), rtol=1e-14)


def test_cotan_weights_match_embedded_formula(rng):
    pts = rng.standard_normal((3, 2))
    d = lambda i, j: float(np.linalg.norm(pts[i] - pts[j]))
    surf = TriSurface.from_triangles([(0, 1, 2), (0, 2, 1)],
                                     {(1, 2): d(1, 2), (0, 2): d(0, 2), (0, 1): d(0, 1)})
    w = cotan_weights(surf.state())
    expect = {(0, 1): _embedded_cot(pts[2], pts[0], pts[1]),
              (0, 2): _embedded_cot(pts[1], pts[0], pts[2]),
              (1, 2): _embedded_cot(pts[0], pts[1], pts[2])}
    for k, (i, j) in enumerate(surf.edges.tolist()):
        # each edge sees the same opposite angle from both copies
        assert w[k] == pytest.approx(expect[(i, j)], rel=1e-12)


# --------------------------------------------------------------------- areas

def test_equilateral_vertex_areas():
    A = vertex_areas(pillow(1, 1, 1).state())
    np.testing.assert_allclose(A, 2 * math.sqrt(3) / 4 / 3, rtol=1e-14)


def test_tetrahedron_areas():
    A = vertex_areas(regular_tetrahedron().state())
    np.testing.assert_allclose(A, math.sqrt(3) / 4, rtol=1e-14)
    assert A.sum() == pytest.approx(math.sqrt(3))


def test_area_scaling(genus2, rng):
    u = rng.uniform(-0.3, 0.3, genus2.n_vertices)
    c = 0.37
    np.testing.assert_allclose(vertex_areas(genus2.state(u + c)),
                               math.exp(4 * c) * vertex_areas(genus2.state(u)), rtol=1e-12)
    assert total_area(genus2.state(u)) == pytest.approx(vertex_areas(genus2.state(u)).sum())


def test_curvature_jacobian_is_minus_twice_laplacian(genus2, rng):
    u = rng.uniform(-0.3, 0.3, genus2.n_vertices)
    st0 = genus2.state(u)
    L = cotan_laplacian(st0).toarray()
    h = 1e-6
    for j in rng.choice(genus2.n_vertices, 8, replace=False):
        e = np.zeros(genus2.n_vertices)
        e[j] = h
        col = (vertex_curvature(st0.with_u(u + e)) - vertex_curvature(st0.with_u(u - e))) / (2 * h)
        np.testing.assert_allclose(col, -2 * L[:, j], atol=1e-7)


def test_relabel_preserves_geometry(genus2, rng):
    perm = rng.permutation(genus2.n_vertices)
    other = genus2.relabel(perm)
    u = rng.uniform(-0.3, 0.3, genus2.n_vertices)
    v = np.empty_like(u)
    v[perm] = u
    np.testing.assert_allclose(vertex_curvature(other.state(v))[perm],
                               vertex_curvature(genus2.state(u)), atol=1e-12)

import math

import numpy as np
import pytest

from octantwalk.critical import (
    cholesky_factor,
    cholesky_inverse,
    covariance,
    covariance_from_correlations,
    find_critical_point,
    gradient,
    hessian,
    polar_triangle,
    realize_triangle,
    side_cosines,
    triangle_from_angles,
    triangle_of,
    vertex_angles,
)
from octantwalk.errors import DegenerateCovariance, HalfSpacePrecondition, NotRealizable
from octantwalk.stepset import CELLS, StepSet, half_space_check, inventory, parse_steps

from oracles import (
    EXCEPTIONAL_1,
    EXCEPTIONAL_2,
    HADAMARD_12,
    KREWERAS,
    SCARECROWS,
    SIMPLE,
    angles_from_gram,
    correlations_fd,
    critical_point_scipy,
    hadamard_12_embedding,
)


def _pipeline(s):
    inv = inventory(s)
    cp = find_critical_point(inv)
    return inv, cp, covariance(inv, cp)


def _random_pd(rng):
    while True:
        a, b, c = rng.uniform(-0.99, 0.99, 3)
        if 1 - a * a - b * b - c * c + 2 * a * b * c > 1e-6:
            return a, b, c


def _random_free_step_set(rng):
    while True:
        k = int(rng.integers(3, 12))
        idx = rng.choice(len(CELLS), size=k, replace=False)
        s = StepSet.from_vectors([CELLS[i] for i in idx], [int(w) for w in rng.integers(1, 4, k)])
        if not half_space_check(s).contained:
            return s


def test_simple_walk_critical_point_and_identity_covariance():
    inv, cp, cov = _pipeline(parse_steps(SIMPLE))
    np.testing.assert_allclose(cp.point, 1.0, atol=1e-14)
    assert cp.rho == pytest.approx(6.0, abs=1e-14)
    np.testing.assert_allclose(cov.matrix, np.eye(3), atol=1e-14)


def test_kreweras_critical_point_and_correlations():
    _, cp, cov = _pipeline(parse_steps(KREWERAS))
    np.testing.assert_allclose(cp.point, 1.0, atol=1e-14)
    assert cp.rho == pytest.approx(4.0, abs=1e-14)
    np.testing.assert_allclose(cov.correlations, 0.5, atol=1e-14)
    np.testing.assert_allclose(triangle_of(cov).angles, 2 * math.pi / 3, atol=1e-12)


def test_half_space_raises():
    with pytest.raises(HalfSpacePrecondition):
        find_critical_point(inventory(StepSet.from_vectors([(1, 0, 0), (0, 1, 0), (0, 0, 1)])))


def test_critical_point_matches_generic_optimizer():
    rng = np.random.default_rng(3)
    for _ in range(30):
        s = _random_free_step_set(rng)
        inv = inventory(s)
        cp = find_critical_point(inv)
        point, rho = critical_point_scipy(s.vectors, [float(w) for w in s.weights])
        assert cp.residual <= 1e-12
        assert cp.rho == pytest.approx(rho, rel=1e-9)
        assert cp.rho <= float(s.total_weight()) + 1e-12
        assert cp.rho == inv(cp.point)
        np.testing.assert_allclose(cp.point, point, rtol=1e-5)


def test_gradient_and_hessian_against_finite_differences():
    rng = np.random.default_rng(11)
    h = 1e-6
    for _ in range(100):
        k = int(rng.integers(1, 15))
        idx = rng.choice(len(CELLS), size=k, replace=False)
        inv = inventory(StepSet.from_vectors([CELLS[i] for i in idx], [int(w) for w in rng.integers(1, 5, k)]))
        for x in rng.uniform(0.5, 2.0, size=(100, 3)):
            g = gradient(inv, x)
            hs = hessian(inv, x)
            g_fd = np.empty(3)
            h_fd = np.empty((3, 3))
            for i in range(3):
                e = np.zeros(3)
                e[i] = h
                g_fd[i] = (inv(x + e) - inv(x - e)) / (2 * h)
                h_fd[i] = (gradient(inv, x + e) - gradient(inv, x - e)) / (2 * h)
            assert np.max(np.abs(g - g_fd)) <= 1e-6 * max(1.0, np.max(np.abs(g)))
            assert np.max(np.abs(hs - h_fd)) <= 1e-6 * max(1.0, np.max(np.abs(hs)))


def test_cholesky_identity_random():
    rng = np.random.default_rng(5)
    for _ in range(10_000):
        a, b, c = _random_pd(rng)
        cov = covariance_from_correlations(a, b, c)
        low = cov.cholesky_L
        assert np.max(np.abs(low @ low.T - cov.matrix)) <= 1e-14
        assert np.allclose(np.triu(low, 1), 0.0)


def test_cholesky_inverse_closed_form():
    rng = np.random.default_rng(6)
    for _ in range(1000):
        a, b, c = _random_pd(rng)
        prod = cholesky_inverse(a, b, c) @ cholesky_factor(a, b, c)
        assert np.max(np.abs(prod - np.eye(3))) <= 1e-8 * max(1.0, np.max(np.abs(cholesky_inverse(a, b, c))))


def test_degenerate_covariance_rejected():
    with pytest.raises(DegenerateCovariance):
        covariance_from_correlations(1.0, 0.0, 0.0)
    with pytest.raises(DegenerateCovariance):
        covariance_from_correlations(0.5, 0.5, -0.5)


def test_triangle_examples():
    right = triangle_of(covariance_from_correlations(0, 0, 0))
    np.testing.assert_allclose(right.angles, math.pi / 2, atol=1e-15)
    t = triangle_of(covariance_from_correlations(0, 0, -0.25))
    np.testing.assert_allclose(t.angles, (math.pi / 2, math.pi / 2, math.acos(0.25)), atol=1e-15)


def test_angle_vertex_consistency_and_side_cosine_bound():
    rng = np.random.default_rng(8)
    for _ in range(2000):
        a, b, c = _random_pd(rng)
        t = triangle_of(covariance_from_correlations(a, b, c))
        assert np.allclose(np.linalg.norm(t.vertices, axis=1), 1.0, atol=1e-14)
        assert abs(np.linalg.det(t.vertices)) > 0
        assert t.excess > 0
        expected = (math.acos(-a), math.acos(-b), math.acos(-c))
        np.testing.assert_allclose(vertex_angles(t.vertices), expected, atol=1e-12)
        # side-length cosines lie strictly inside (-1, 1)
        assert all(-1 < v < 1 for v in side_cosines(a, b, c))
        # the law-of-cosines oracle only needs the vertices
        np.testing.assert_allclose(angles_from_gram(t.vertices), expected, atol=1e-7)


def test_realize_triangle_round_trip():
    rng = np.random.default_rng(9)
    for _ in range(2000):
        a, b, c = _random_pd(rng)
        angles = (math.acos(-a), math.acos(-b), math.acos(-c))
        cov, atoms, weights = realize_triangle(angles)
        np.testing.assert_allclose(triangle_of(cov).angles, angles, atol=1e-12)
        emp = (atoms.T * weights) @ atoms
        np.testing.assert_allclose(emp, cov.matrix, atol=1e-14)


def test_realize_examples():
    cov, atoms, _ = realize_triangle((math.pi / 2,) * 3)
    np.testing.assert_allclose(cov.matrix, np.eye(3), atol=1e-15)
    assert {tuple(np.round(p).astype(int)) for p in atoms} == {
        (i, j, k) for i in (-1, 1) for j in (-1, 1) for k in (-1, 1)
    }
    cov, atoms, w = realize_triangle((2 * math.pi / 3,) * 3)
    np.testing.assert_allclose(cov.correlations, 0.5, atol=1e-15)
    with pytest.raises(NotRealizable):
        realize_triangle((math.pi / 6, math.pi / 6, math.pi))
    with pytest.raises(NotRealizable):
        realize_triangle((math.pi / 6, math.pi / 6, math.pi / 6))


def test_polar_triangle_examples_and_involution():
    right = triangle_from_angles((math.pi / 2,) * 3)
    p = polar_triangle(right)
    np.testing.assert_allclose(p.angles, math.pi / 2, atol=1e-14)
    np.testing.assert_allclose(np.abs(p.vertices @ right.vertices.T), np.eye(3), atol=1e-14)

    krew = polar_triangle(triangle_from_angles((2 * math.pi / 3,) * 3))
    np.testing.assert_allclose(krew.angles, math.acos(1 / 3), atol=1e-12)
    np.testing.assert_allclose(vertex_angles(krew.vertices), krew.angles, atol=1e-12)

    rng = np.random.default_rng(10)
    for _ in range(500):
        t = triangle_of(covariance_from_correlations(*_random_pd(rng)))
        p = polar_triangle(t)
        # vertex i of the polar is orthogonal to the other two original vertices
        for i in range(3):
            assert abs(p.vertices[i] @ t.vertices[(i + 1) % 3]) < 1e-12
            assert abs(p.vertices[i] @ t.vertices[(i + 2) % 3]) < 1e-12
            assert p.vertices[i] @ t.vertices[i] > 0
        pp = polar_triangle(p)
        np.testing.assert_allclose(pp.vertices, t.vertices, atol=1e-10)
        np.testing.assert_allclose(pp.angles, t.angles, atol=1e-12)


@pytest.mark.parametrize("key,expected", [(1, -0.25), (2, -0.25), (3, 0.25)])
def test_scarecrow_embeddings(key, expected):
    vecs = hadamard_12_embedding(SCARECROWS[key])
    _, cp, cov = _pipeline(StepSet.from_vectors(vecs))
    assert cov.a == pytest.approx(0, abs=1e-12)
    assert cov.b == pytest.approx(0, abs=1e-12)
    assert cov.c == pytest.approx(expected, abs=1e-12)
    assert correlations_fd(vecs, cp.point)[2] == pytest.approx(expected, abs=1e-5)


def test_type12_model_correlation():
    _, cp, cov = _pipeline(parse_steps(HADAMARD_12))
    assert cov.a == pytest.approx(-0.25, abs=1e-12)
    assert (cov.b, cov.c) == pytest.approx((0, 0), abs=1e-12)
    assert cp.rho == pytest.approx(17.0, abs=1e-12)


def test_exceptional_models():
    _, cp, cov = _pipeline(parse_steps(EXCEPTIONAL_1))
    assert cov.a == pytest.approx(math.sqrt(7) / 3, abs=1e-12)
    assert (cov.b, cov.c) == pytest.approx((0, 0), abs=1e-12)
    vecs = parse_steps(EXCEPTIONAL_1).vectors
    assert correlations_fd(vecs, cp.point)[0] == pytest.approx(math.sqrt(7) / 3, abs=1e-5)

    _, cp, cov = _pipeline(parse_steps(EXCEPTIONAL_2))
    assert cov.b == pytest.approx(math.sqrt(0.7), abs=1e-12)
    assert (cov.a, cov.c) == pytest.approx((0, 0), abs=1e-12)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riemipm.manifold import Euclidean, Product, Sphere

SQ = 1.0 / np.sqrt(2.0)


def rot(t):
    return np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])


class TestInner:
    def test_euclidean_orthogonal(self):
        assert Euclidean(2).inner(np.zeros(2), [1.0, 0.0], [0.0, 1.0]) == 0.0

    def test_sphere_ambient_dot(self):
        S = Sphere(2)
        assert S.inner([1.0, 0.0], [0.0, 2.0], [0.0, 2.0]) == pytest.approx(4.0)
        assert S.inner([0.0, 1.0], [1.0, 0.0], [3.0, 0.0]) == pytest.approx(3.0)

    def test_base_mismatch(self):
        # (1, 0) is normal to the sphere at (1, 0), not tangent
        with pytest.raises(ValueError):
            Sphere(2).inner([1.0, 0.0], [1.0, 0.0], [0.0, 1.0])

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            Euclidean(2).inner(np.zeros(2), [1.0, 0.0, 0.0], [0.0, 1.0])


class TestRetract:
    def test_euclidean_addition(self):
        np.testing.assert_allclose(Euclidean(2).retract([1.0, 2.0], [0.5, -1.0]), [1.5, 1.0])

    def test_sphere_zero(self):
        np.testing.assert_array_equal(Sphere(2).retract([1.0, 0.0], [0.0, 0.0]), [1.0, 0.0])

    def test_sphere_projection(self):
        np.testing.assert_allclose(Sphere(2).retract([1.0, 0.0], [0.0, 1.0]), [SQ, SQ], atol=1e-15)

    def test_first_order(self):
        # slope of log ||(R(tu) - p)/t - u|| against log t is about 1
        rng = np.random.default_rng(3)
        S = Sphere(4)
        ts = np.array([1e-2, 1e-3, 1e-4, 1e-5, 1e-6])
        for _ in range(100):
            p = S.random_point(rng)
            u = S.random_tangent(p, rng)
            errs = np.array([np.linalg.norm((S.retract(p, t * u) - p) / t - u) for t in ts])
            slope = np.polyfit(np.log(ts[:3]), np.log(errs[:3]), 1)[0]
            assert slope >= 0.9
            assert errs[-1] < errs[0]

    def test_second_order_pullback_hessian(self):
        # f(x) = x^T A x / 2 on S^2; FD Hessian of f o R_p at 0 vs ehess2rhess
        rng = np.random.default_rng(7)
        S = Sphere(3)
        A = rng.standard_normal((3, 3))
        A = A + A.T
        f = lambda x: 0.5 * x @ A @ x
        for _ in range(10):
            p = S.random_point(rng)
            B = S.tangent_basis(p).columns
            h = 1e-4
            H_fd = np.empty((2, 2))
            for i in range(2):
                for j in range(2):
                    ui, uj = B[:, i], B[:, j]
                    H_fd[i, j] = (
                        f(S.retract(p, h * ui + h * uj)) - f(S.retract(p, h * ui - h * uj))
                        - f(S.retract(p, -h * ui + h * uj)) + f(S.retract(p, -h * ui - h * uj))
                    ) / (4 * h * h)
            H = np.column_stack([B.T @ S.ehess2rhess(p, A @ p, A @ B[:, j], B[:, j]) for j in range(2)])
            np.testing.assert_allclose(H_fd, H, rtol=1e-5, atol=1e-5 * np.abs(H).max())


class TestTransport:
    def test_euclidean_identity(self):
        np.testing.assert_array_equal(Euclidean(2).transport([0.0, 0.0], [3.0, -1.0], [1.0, 2.0]), [1.0, 2.0])

    def test_sphere_to_self(self):
        np.testing.assert_allclose(Sphere(2).transport([0.0, 1.0], [0.0, 1.0], [3.0, 0.0]), [3.0, 0.0])

    def test_quarter_turn(self):
        # rotating (1,0) -> (0,1) by pi/2 carries (0,1) to (-1,0)
        out = Sphere(2).transport([1.0, 0.0], [0.0, 1.0], [0.0, 1.0])
        np.testing.assert_allclose(out, rot(np.pi / 2) @ [0.0, 1.0], atol=1e-15)
        np.testing.assert_allclose(out, [-1.0, 0.0], atol=1e-15)

    def test_antipodal(self):
        with pytest.raises(ValueError, match="geodesic"):
            Sphere(2).transport([1.0, 0.0], [-1.0, 0.0], [0.0, 1.0])

    def test_round_trip_and_isometry(self):
        rng = np.random.default_rng(11)
        S = Sphere(5)
        for _ in range(50):
            p, q = S.random_point(rng), S.random_point(rng)
            u = S.random_tangent(p, rng)
            v = S.transport(p, q, u)
            assert abs(v @ q) < 1e-12
            assert np.linalg.norm(v) == pytest.approx(np.linalg.norm(u), rel=1e-12)
            np.testing.assert_allclose(S.transport(q, p, v), u, atol=1e-10)


class TestTangentBasis:
    def test_euclidean_standard(self):
        np.testing.assert_array_equal(Euclidean(2).tangent_basis(np.array([3.0, 4.0])).columns, np.eye(2))

    def test_sphere_sign_rule(self):
        B = Sphere(2).tangent_basis(np.array([1.0, 0.0]))
        assert B.dim == 1
        np.testing.assert_allclose(B.columns[:, 0], [0.0, 1.0])

    def test_product_block_diagonal(self):
        M = Product([Euclidean(1), Euclidean(1)])
        np.testing.assert_array_equal(M.tangent_basis(np.array([0.3, -2.0])).columns, np.eye(2))

    def test_product_sphere_euclidean(self):
        M = Product([Sphere(2), Euclidean(1)])
        B = M.tangent_basis(np.array([1.0, 0.0, 5.0])).columns
        np.testing.assert_allclose(B, [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])

    @settings(max_examples=60, deadline=None)
    @given(st.integers(2, 6), st.integers(0, 2**32 - 1))
    def test_orthonormal_and_reconstructs(self, n, seed):
        rng = np.random.default_rng(seed)
        S = Sphere(n)
        p = S.random_point(rng)
        B = S.tangent_basis(p)
        assert B.dim == n - 1
        np.testing.assert_allclose(B.columns.T @ B.columns, np.eye(n - 1), atol=1e-12)
        assert np.abs(B.columns.T @ p).max() < 1e-12
        u = S.random_tangent(p, rng)
        rec = B.vector(B.coefficients(u))
        assert np.linalg.norm(rec - u) <= 1e-12 * max(1.0, np.linalg.norm(u))

    def test_deterministic(self):
        p = Sphere(3).point([0.3, -0.2, 0.9])
        np.testing.assert_array_equal(Sphere(3).tangent_basis(p).columns, Sphere(3).tangent_basis(p).columns)


class TestSphere:
    def test_point_normalizes(self):
        assert np.linalg.norm(Sphere(3).point([3.0, 0.0, 4.0])) == pytest.approx(1.0, abs=1e-15)

    def test_dist(self):
        S = Sphere(2)
        assert S.dist([1.0, 0.0], [0.0, 1.0]) == pytest.approx(np.pi / 2)
        assert S.dist([1.0, 0.0], [1.0, 0.0]) == 0.0

    def test_exp_log_inverse(self):
        rng = np.random.default_rng(5)
        S = Sphere(4)
        p = S.random_point(rng)
        u = 0.5 * S.random_tangent(p, rng)
        np.testing.assert_allclose(S.log(p, S.exp(p, u)), u, atol=1e-12)

    def test_rgrad(self):
        p = np.array([1.0, 0.0])
        np.testing.assert_allclose(Sphere(2).egrad2rgrad(p, [2.0, 3.0]), [0.0, 3.0])


def test_product_dims():
    M = Product([Sphere(3), Euclidean(2)])
    rng = np.random.default_rng(0)
    p = M.random_point(rng)
    assert p.shape == (5,)
    assert M.tangent_basis(p).dim == 4

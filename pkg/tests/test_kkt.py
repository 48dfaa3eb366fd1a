import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riemipm.diagnostics import jacobian_fd_error
from riemipm.exceptions import NearSingularJacobian
from riemipm.kkt import assemble_jacobian, barrier_kkt, extrapolate, kkt_residual, newton_step
from riemipm.problem import BUILTIN_NAMES, PrimalDualPoint, builtin_problem
from riemipm.ripm import OuterConfig, outer_solve


@pytest.fixture
def t1():
    return builtin_problem("T1")[0]


def pd(x, y, z=()):
    return PrimalDualPoint(x, y, z)


class TestBarrierKKT:
    def test_central_path(self, t1):
        F = barrier_kkt(t1, pd([0.3], [1.0]), 0.3)
        assert F.grad_norm == 0.0 and F.compl_norm == 0.0

    def test_unrelaxed(self, t1):
        F = barrier_kkt(t1, pd([1.0], [1.0]), 0.0)
        np.testing.assert_array_equal(F.grad_block, [0.0])
        np.testing.assert_array_equal(F.compl_block, [1.0])

    @pytest.mark.parametrize("name", BUILTIN_NAMES)
    def test_reference_root(self, name):
        prob, ref = builtin_problem(name)
        F = barrier_kkt(prob, ref.point, 0.0)
        assert max(F.grad_norm, F.compl_norm, F.eq_norm) <= 1e-10

    def test_negative_mu(self, t1):
        with pytest.raises(ValueError):
            barrier_kkt(t1, pd([1.0], [1.0]), -1.0)


class TestJacobian:
    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.01, 5), st.floats(0.01, 5))
    def test_t1_closed_form(self, x, y):
        prob = builtin_problem("T1")[0]
        J = assemble_jacobian(prob, pd([x], [y])).matrix
        np.testing.assert_allclose(J, [[0.0, -1.0], [y, x]])

    def test_t3_identity_block(self):
        prob, _ = builtin_problem("T3")
        J = assemble_jacobian(prob, pd([0.3, -1.0], [2.0], [0.7]))
        np.testing.assert_array_equal(J.matrix[:2, :2], np.eye(2))
        assert J.matrix.shape == (4, 4)

    @pytest.mark.parametrize("name", BUILTIN_NAMES)
    def test_matches_fd(self, name):
        prob, _ = builtin_problem(name)
        rng = np.random.default_rng(4)
        for _ in range(5):
            w = pd(prob.sample_interior(rng), rng.uniform(0.1, 2, prob.m), rng.normal(size=prob.p))
            assert jacobian_fd_error(prob, w, float(rng.uniform())) <= 1e-5

    def test_reproducible(self):
        prob, ref = builtin_problem("T4")
        a = assemble_jacobian(prob, ref.point).matrix
        b = assemble_jacobian(prob, ref.point).matrix
        assert a.tobytes() == b.tobytes()

    @pytest.mark.parametrize("name", BUILTIN_NAMES)
    def test_nonsingular_at_reference(self, name):
        prob, ref = builtin_problem(name)
        assert assemble_jacobian(prob, ref.point).condition() <= 1e6


class TestNewtonStep:
    def test_zero_at_root(self, t1):
        step = newton_step(t1, pd([0.2], [1.0]), 0.2)
        assert step.norm() == 0.0

    def test_t3_reference(self):
        prob, ref = builtin_problem("T3")
        assert newton_step(prob, ref.point, 0.0).norm() <= 1e-12

    def test_mu_independent_matrix(self):
        # only the right-hand side depends on mu, so steps are affine in mu
        prob, _ = builtin_problem("T2")
        w = prob.initial
        s0, s1, s2 = (newton_step(prob, w, mu) for mu in (0.0, 0.1, 0.2))
        np.testing.assert_allclose(s2.dx - s1.dx, s1.dx - s0.dx, atol=1e-14)
        np.testing.assert_allclose(s2.dy - s1.dy, s1.dy - s0.dy, atol=1e-14)

    @pytest.mark.parametrize("name", BUILTIN_NAMES)
    def test_residual_small(self, name):
        prob, _ = builtin_problem(name)
        rng = np.random.default_rng(9)
        w = pd(prob.sample_interior(rng), rng.uniform(0.1, 2, prob.m), rng.normal(size=prob.p))
        step = newton_step(prob, w, 0.05)
        assert step.residual <= 1e-10 * max(1.0, barrier_kkt(prob, w, 0.05).norm())

    def test_near_singular(self, t1):
        # det [[0, -1], [y, x]] = y
        with pytest.raises(NearSingularJacobian) as info:
            newton_step(t1, pd([1e-14], [1e-14]), 0.1)
        assert info.value.condition > 1e12

    def test_tangent(self):
        prob, _ = builtin_problem("T2")
        step = newton_step(prob, prob.initial, 0.1)
        assert abs(step.dx @ prob.initial.x) < 1e-14


class TestExtrapolate:
    @pytest.mark.parametrize("mu0,mu1", [(0.5, 0.25), (0.1, 0.01), (0.3, 0.02)])
    def test_central_path(self, t1, mu0, mu1):
        w = extrapolate(t1, pd([mu0], [1.0]), mu1)
        assert abs(w.x[0] - mu1) <= 1e-12
        assert abs(w.y[0] - 1.0) <= 1e-12

    def test_zero_step_unchanged(self, t1):
        w = pd([0.4], [1.0])
        out = extrapolate(t1, w, 0.4)
        np.testing.assert_array_equal(out.x, w.x)
        np.testing.assert_array_equal(out.y, w.y)

    def test_stays_on_sphere(self):
        prob, _ = builtin_problem("T2")
        out = extrapolate(prob, prob.initial, 0.05)
        assert np.linalg.norm(out.x) == pytest.approx(1.0, abs=1e-14)

    def test_propagates_singular(self, t1):
        with pytest.raises(NearSingularJacobian):
            extrapolate(t1, pd([1e-14], [1e-14]), 0.1)


@pytest.mark.parametrize("name", ["T2", "T4"])
def test_step_size_law(name):
    # ||dw_k|| / mu_{k-1} settles to a constant along the run
    prob, _ = builtin_problem(name)
    iterates = [prob.initial]
    mus = []
    for n in range(1, 6):
        rep = outer_solve(prob, config=OuterConfig(max_outer=n))
        iterates.append(rep.point)
        mus.append(rep.trace[-1].mu)
    C = [newton_step(prob, iterates[k], mus[k]).norm() / mus[k - 1] for k in range(1, 5)]
    assert max(C) / min(C) <= 10


def test_kkt_residual_is_unrelaxed(t1):
    assert kkt_residual(t1, pd([0.2], [1.0])) == pytest.approx(0.2)

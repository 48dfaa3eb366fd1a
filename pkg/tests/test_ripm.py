import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riemipm.exceptions import InnerStalled, NearSingularJacobian
from riemipm.kkt import kkt_residual
from riemipm.problem import BUILTIN_NAMES, PrimalDualPoint, builtin_problem
from riemipm.ripm import (
    BarrierSchedule,
    ForcingFunctions,
    OuterConfig,
    barrier_update,
    inner_fallback,
    outer_solve,
    primal_dual_distance,
    stopping_check,
)


@pytest.fixture
def t1():
    return builtin_problem("T1")[0]


def pd(x, y, z=()):
    return PrimalDualPoint(x, y, z)


class TestBarrierUpdate:
    def test_unit(self):
        assert barrier_update(1.0, BarrierSchedule(mu0=1.0, kappa=0.5, theta=0.5)) == 0.5

    def test_quarter(self):
        assert barrier_update(0.25, BarrierSchedule(kappa=0.5, theta=0.5)) == pytest.approx(0.0625, rel=1e-15)

    @pytest.mark.parametrize("mu", [0.0, -0.1, 1.5])
    def test_out_of_range(self, mu):
        with pytest.raises(ValueError):
            barrier_update(mu, BarrierSchedule())

    @pytest.mark.parametrize("kw", [{"mu0": 0.0}, {"mu0": 1.2}, {"kappa": 1.0}, {"kappa": 0.0},
                                    {"theta": 1.5}, {"theta": 0.0}])
    def test_schedule_validation(self, kw):
        with pytest.raises(ValueError):
            BarrierSchedule(**kw)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.01, 1.0), st.floats(0.05, 0.95), st.floats(0.05, 0.95))
    def test_log_sequence_matches_direct(self, mu0, kappa, theta):
        s = BarrierSchedule(mu0=mu0, kappa=kappa, theta=theta)
        mus = [mu0]
        for _ in range(4):
            mus.append(barrier_update(mus[-1], s))
        np.testing.assert_allclose(s.log_sequence(5), np.log(mus), rtol=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(1e-6, 1.0), st.floats(0.05, 0.95), st.floats(0.05, 0.95))
    def test_superlinear_decrease(self, mu, kappa, theta):
        s = BarrierSchedule(kappa=kappa, theta=theta)
        nxt = barrier_update(mu, s)
        assert 0 < nxt < mu


class TestForcing:
    def test_linear(self):
        f = ForcingFunctions(c_grad=2.0, c_compl=3.0, c_eq=4.0, c_sosp=5.0)
        assert (f.grad(0.1), f.compl(0.1), f.eq(0.1), f.sosp(0.1)) == pytest.approx((0.2, 0.3, 0.4, 0.5))

    def test_witnesses(self):
        for c in (0.1, 1.0, 7.0):
            f = ForcingFunctions(c, c, c, c)
            for lo, hi in f.bound_witnesses().values():
                assert 0 < lo < 1 < hi
                assert lo * 0.3 <= f.grad(0.3) <= hi * 0.3

    def test_positive(self):
        with pytest.raises(ValueError):
            ForcingFunctions(c_grad=0.0)


class TestConfig:
    @pytest.mark.parametrize("tau", [0.9, 0.5, 1.0])
    def test_tau_range(self, tau):
        with pytest.raises(ValueError):
            OuterConfig(tau=tau)

    def test_caps(self):
        with pytest.raises(ValueError):
            OuterConfig(max_outer=0)
        with pytest.raises(ValueError):
            OuterConfig(kkt_stop_tol=0.0)


class TestStoppingCheck:
    @pytest.mark.parametrize("mu", [0.5, 0.1, 1e-4])
    def test_central_path(self, t1, mu):
        r = stopping_check(t1, pd([mu], [1.0]), mu, ForcingFunctions())
        assert r.passed
        assert (r.grad_norm, r.compl_norm) == (0.0, 0.0)

    def test_grad_block_too_large(self, t1):
        r = stopping_check(t1, pd([0.1], [0.5]), 0.1, ForcingFunctions())
        assert not r.passed
        assert r.grad_norm == pytest.approx(0.5)

    def test_zero_multiplier(self, t1):
        # residual tests alone would pass with generous constants
        r = stopping_check(t1, pd([0.1], [0.0]), 0.1, ForcingFunctions(100.0, 100.0, 100.0, 100.0))
        assert not r.passed

    def test_infeasible(self, t1):
        assert not stopping_check(t1, pd([-1e-3], [1.0]), 0.1, ForcingFunctions(100.0, 100.0, 100.0, 100.0))


class TestInnerFallback:
    def test_already_passing(self, t1):
        w = pd([0.1], [1.0])
        res = inner_fallback(t1, w, 0.1, ForcingFunctions(), OuterConfig())
        assert res.iterations == 0
        assert res.point is w

    def test_t1_to_central_path(self, t1):
        res = inner_fallback(t1, pd([1.0], [1.0]), 0.1, ForcingFunctions(), OuterConfig())
        assert res.iterations <= 10
        assert all(b < a for a, b in zip(res.merits, res.merits[1:]))
        assert stopping_check(t1, res.point, 0.1, ForcingFunctions()).passed

    def test_t1_tight_forcing_hits_target(self, t1):
        tight = ForcingFunctions(1e-10, 1e-10, 1e-10, 1e-10)
        res = inner_fallback(t1, pd([1.0], [1.0]), 0.1, tight, OuterConfig())
        assert res.iterations <= 10
        np.testing.assert_allclose([res.point.x[0], res.point.y[0]], [0.1, 1.0], atol=1e-10)
        assert all(b < a for a, b in zip(res.merits, res.merits[1:]))

    def test_infeasible_start(self, t1):
        with pytest.raises(ValueError):
            inner_fallback(t1, pd([0.0], [1.0]), 0.1, ForcingFunctions(), OuterConfig())

    def test_cap(self, t1):
        # (1, 1) is one exact Newton step from (0.1, 1); (1, 0.5) is not
        tight = ForcingFunctions(1e-12, 1e-12, 1e-12, 1e-12)
        with pytest.raises(InnerStalled):
            inner_fallback(t1, pd([1.0], [0.5]), 0.1, tight, OuterConfig(inner_max=1))

    def test_keeps_interior(self):
        prob, _ = builtin_problem("T2")
        rng = np.random.default_rng(0)
        for _ in range(10):
            t = rng.uniform(-np.pi / 3 + 0.05, 0.0)
            w = pd([np.cos(t), np.sin(t)], rng.uniform(0.2, 2.0, 1))
            res = inner_fallback(prob, w, 0.05, ForcingFunctions(), OuterConfig())
            assert res.point.is_interior(prob)
            assert res.point.x[1] < 0

    def test_upper_arc_stalls(self):
        # the barrier field has a second root near (1/2, sqrt(3)/2) with y < 0;
        # the positivity safeguard blocks it and the fallback reports a stall
        prob, _ = builtin_problem("T2")
        w = pd([0.75, np.sqrt(1 - 0.75**2)], [1.0])
        with pytest.raises(InnerStalled):
            inner_fallback(prob, w, 0.05, ForcingFunctions(), OuterConfig())


class TestOuterSolve:
    def test_t1_example(self, t1):
        cfg = OuterConfig(schedule=BarrierSchedule(mu0=0.5, kappa=0.5, theta=0.9))
        rep = outer_solve(t1, pd([0.8], [1.2]), cfg)
        assert rep.converged
        assert abs(rep.point.x[0]) <= 1e-10
        assert all(t.inner_iters == 0 for t in rep.trace if t.mu <= 1e-2)

    def test_t3(self):
        prob, ref = builtin_problem("T3")
        rep = outer_solve(prob)
        assert rep.converged
        np.testing.assert_allclose(rep.point.x, [0.5, 0.5], atol=1e-8)
        np.testing.assert_allclose(rep.point.y, [0.0], atol=1e-8)
        np.testing.assert_allclose(rep.point.z, [-0.5], atol=1e-8)

    @pytest.mark.parametrize("name", BUILTIN_NAMES)
    def test_builtins_converge(self, name):
        prob, ref = builtin_problem(name)
        rep = outer_solve(prob)
        assert rep.converged
        assert kkt_residual(prob, rep.point) <= 1e-10
        assert primal_dual_distance(prob, rep.point, ref.point) <= 1e-8
        assert len(rep.trace) == len(rep.errors)
        assert rep.reference_mode == "reference"

    def test_infeasible_start(self, t1):
        with pytest.raises(ValueError):
            outer_solve(t1, pd([-0.1], [1.0]))

    def test_zero_multiplier_start(self, t1):
        with pytest.raises(ValueError):
            outer_solve(t1, pd([0.5], [0.0]))

    def test_max_outer(self, t1):
        rep = outer_solve(t1, config=OuterConfig(max_outer=2))
        assert rep.status == "MaxOuter"
        assert len(rep.trace) == 2

    def test_singular_status(self, t1):
        rep = outer_solve(t1, config=OuterConfig(condition_cap=1.0 + 1e-9))
        assert rep.status == "SingularJacobian"
        assert rep.events

    def test_singular_raises_on_request(self, t1):
        with pytest.raises(NearSingularJacobian) as info:
            outer_solve(t1, config=OuterConfig(condition_cap=1.0 + 1e-9), raise_errors=True)
        assert info.value.report.status == "SingularJacobian"

    def test_stalled(self, t1):
        cfg = OuterConfig(forcing=ForcingFunctions(1e-12, 1e-12, 1e-12, 1e-12), inner_max=1)
        rep = outer_solve(t1, pd([1.0], [0.5]), cfg)
        assert rep.status == "InnerStalled"
        with pytest.raises(InnerStalled):
            outer_solve(t1, pd([1.0], [0.5]), cfg, raise_errors=True)

    def test_self_reference_mode(self):
        prob, _ = builtin_problem("T2")
        prob.reference = None
        rep = outer_solve(prob)
        assert rep.reference_mode == "self"
        assert rep.errors[-1] == 0.0

    def test_infeasible_extrapolation_flagged(self, t1):
        # from far off the path, the full Newton step leaves the interior
        rep = outer_solve(t1, pd([5.0], [0.05]), OuterConfig(schedule=BarrierSchedule(mu0=0.01)))
        assert rep.converged
        assert any("not strictly feasible" in e for e in rep.events)

    def test_deterministic(self):
        prob, _ = builtin_problem("T4")
        a = outer_solve(prob)
        b = outer_solve(prob)
        assert [vars(r) for r in a.trace] == [vars(r) for r in b.trace]

    def test_trace_finite(self):
        prob, _ = builtin_problem("T3")
        rep = outer_solve(prob)
        for row in rep.trace:
            for v in (row.mu, row.grad_norm, row.compl_norm, row.eq_norm, row.min_g, row.min_y, row.err_to_ref):
                assert math.isfinite(v)


class TestRates:
    @pytest.mark.parametrize("name", BUILTIN_NAMES)
    def test_ratio_and_order(self, name):
        from riemipm.diagnostics import convergence_order

        prob, _ = builtin_problem(name)
        rep = outer_solve(prob)
        rr = convergence_order(rep.errors)
        assert rr.ratios.min() < 0.1
        assert rr.order >= 1.5

    def test_extrapolation_regime_at_smaller_theta(self):
        # with a gentler schedule the extrapolated point already passes the
        # stopping tests once the iterates are close
        prob, _ = builtin_problem("T2")
        rep = outer_solve(prob, config=OuterConfig(schedule=BarrierSchedule(mu0=0.1, kappa=0.5, theta=0.3)))
        assert rep.converged
        inner = [t.inner_iters for t in rep.trace]
        assert inner[-3:] == [0, 0, 0]


class TestRoundoffTail:
    DISK = {
        "dimension": 2,
        "objective": {"terms": [
            {"coef": 1.0, "powers": [2, 0]}, {"coef": -4.0, "powers": [1, 0]},
            {"coef": 1.0, "powers": [0, 2]}, {"coef": -4.0, "powers": [0, 1]},
            {"coef": 8.0, "powers": [0, 0]},
        ]},
        "inequalities": [{"terms": [
            {"coef": 1.0, "powers": [0, 0]}, {"coef": -1.0, "powers": [2, 0]}, {"coef": -1.0, "powers": [0, 2]},
        ]}],
        "initial": {"x": [0.0, 0.0], "y": [1.0]},
    }

    def test_disk_corner_converges(self):
        # the last mu is ~1e-17, where g = 1 - |x|^2 is pure roundoff
        from riemipm.problem import problem_from_dict

        prob = problem_from_dict(self.DISK)
        rep = outer_solve(prob)
        assert rep.converged
        np.testing.assert_allclose(rep.point.x, [2**-0.5, 2**-0.5], atol=1e-9)
        assert kkt_residual(prob, rep.point) <= 1e-10

    def test_fallback_terminal_rule(self, t1):
        # mu far below what the barrier tests can resolve; the near-KKT start is accepted
        w = pd([1e-12], [1.0])
        res = inner_fallback(t1, w, 1e-30, ForcingFunctions(), OuterConfig())
        assert res.iterations == 0

"""Property checks run by ``riemipm suite`` and the acceptance tests.

Every ``criterion_*`` function returns a :class:`CriterionResult` holding
the pass/fail decision together with the measured quantities, so callers
can print or assert on the numbers rather than just a boolean.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import convergence_order, fd_validate, regularity_check, schedule_check, theta_band
from .exceptions import NearSingularJacobian, NotInterior
from .kkt import extrapolate, kkt_residual
from .manifold import Euclidean
from .problem import (
    BUILTIN_NAMES,
    ConstrainedProblem,
    PrimalDualPoint,
    SmoothFunction,
    builtin_problem,
)
from .ripm import BarrierSchedule, OuterConfig, SolveReport, outer_solve
from .riptrm import newton_equivalence_check, riptrm_solve
from .trs import solve_trs_exact, trs_objective

__all__ = [
    "CriterionResult",
    "RunRecord",
    "RATE_RUNS",
    "run_rate_suite",
    "sc_fault_fixture",
    "licq_fault_fixture",
    "random_trs_instances",
    "CRITERIA",
    "run_all",
]

# (algorithm, problem) pairs used for the rate, tail and Theta-law criteria.
# The trust-region variant is defined for inequality-only problems, so it
# skips T3 and T4.
RATE_RUNS = (
    ("ripm", "T1"), ("ripm", "T2"), ("ripm", "T3"), ("ripm", "T4"),
    ("riptrm", "T1"), ("riptrm", "T2"),
)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        parts = []
        for k, v in self.measured.items():
            if isinstance(v, float):
                parts.append(f"{k}={v:.3g}")
            elif isinstance(v, (int, str, bool)):
                parts.append(f"{k}={v}")
        return f"[{tag}] {self.number:2d}. {self.name}: " + ", ".join(parts)


@dataclass
class RunRecord:
    algorithm: str
    problem: str
    report: SolveReport
    seconds: float
    kkt: float

    @property
    def label(self) -> str:
        return f"{self.algorithm}/{self.problem}"


def _solve(algorithm: str, name: str, config: OuterConfig | None = None) -> RunRecord:
    prob, ref = builtin_problem(name)
    config = config or OuterConfig(schedule=BarrierSchedule(mu0=0.1, kappa=0.5, theta=0.9))
    t0 = time.perf_counter()
    if algorithm == "ripm":
        rep = outer_solve(prob, config=config, reference=ref)
    else:
        rep = riptrm_solve(prob, config=config, reference=ref)
    dt = time.perf_counter() - t0
    return RunRecord(algorithm, name, rep, dt, kkt_residual(prob, rep.point))


def run_rate_suite(jobs: int = 1, runs=RATE_RUNS) -> list[RunRecord]:
    """Solve every ``(algorithm, problem)`` pair; results come back in input order."""
    if jobs <= 1:
        return [_solve(a, p) for a, p in runs]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda ap: _solve(*ap), runs))


# ---------------------------------------------------------------------------
# Fixtures
# ---------------------------------------------------------------------------
def _quad_1d():
    man = Euclidean(1)
    f = SmoothFunction.from_euclidean(man, lambda x: float(x[0] ** 2), lambda x: 2.0 * x, lambda x, v: 2.0 * np.asarray(v))
    g = SmoothFunction.from_euclidean(man, lambda x: float(x[0]), lambda x: np.ones(1), lambda x, v: np.zeros(1))
    return man, f, g


def sc_fault_fixture() -> tuple[ConstrainedProblem, PrimalDualPoint]:
    """``min x^2 s.t. x >= 0`` at ``(x, y) = (0, 0)``: KKT holds with ``y = g = 0``."""
    man, f, g = _quad_1d()
    prob = ConstrainedProblem(man, f, [g], [], name="sc-fault")
    return prob, PrimalDualPoint([0.0], [0.0], [])


def licq_fault_fixture() -> tuple[ConstrainedProblem, PrimalDualPoint]:
    """``min x_1 + x_2^2/2`` with ``x_1 >= 0`` stated twice, at the origin with ``y = (1/2, 1/2)``."""
    man = Euclidean(2)
    f = SmoothFunction.from_euclidean(
        man, lambda x: float(x[0] + 0.5 * x[1] ** 2), lambda x: np.array([1.0, x[1]]),
        lambda x, v: np.array([0.0, v[1]]),
    )
    gs = [
        SmoothFunction.from_euclidean(man, lambda x: float(x[0]), lambda x: np.array([1.0, 0.0]), lambda x, v: np.zeros(2))
        for _ in range(2)
    ]
    prob = ConstrainedProblem(man, f, gs, [], name="licq-fault")
    return prob, PrimalDualPoint([0.0, 0.0], [0.5, 0.5], [])


def random_trs_instances(count: int = 100, hard: int = 10, seed: int = 0):
    """Seeded ``(H, psi, delta, forced_hard)`` tuples with ``d <= 8`` and spectrum in ``[-2, 2]``.

    The first ``hard`` instances are built to fall in the hard case: ``psi``
    has no component on a simple negative bottom eigenvector and the radius
    is large enough that the step on the other eigenspaces stays inside.
    """
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        forced = i < hard
        d = int(rng.integers(2 if forced else 1, 9))
        Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
        lam = np.sort(rng.uniform(-2.0, 2.0, size=d))
        if forced:
            lam[0] = -1.5
            lam[1:] = np.sort(rng.uniform(-1.0, 2.0, size=d - 1))
            c = np.zeros(d)
            c[1:] = rng.uniform(-0.05, 0.05, size=d - 1)
            psi = Q @ c
            delta = 10.0
        else:
            psi = rng.standard_normal(d)
            delta = float(rng.choice([0.1, 1.0, 10.0]))
        H = Q @ np.diag(lam) @ Q.T
        out.append((0.5 * (H + H.T), psi, delta, forced))
    return out


def _ball_samples(rng, d, delta, n):
    v = rng.standard_normal((n, d))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    r = delta * rng.uniform(0.0, 1.0, size=(n, 1)) ** (1.0 / d)
    return v * r


# ---------------------------------------------------------------------------
# Criteria
# ---------------------------------------------------------------------------
def criterion_1(seed: int = 0, samples: int = 20) -> CriterionResult:
    t0 = time.perf_counter()
    grad_err = jac_err = 0.0
    for j, name in enumerate(BUILTIN_NAMES):
        prob, _ = builtin_problem(name)
        rep = fd_validate(prob, samples=samples, seed=seed + j)
        grad_err = max(grad_err, rep.grad_error)
        jac_err = max(jac_err, rep.jacobian_error)
    dt = time.perf_counter() - t0
    ok = jac_err <= 1e-5 and grad_err <= 1e-5 and dt < 5.0
    return CriterionResult(1, "derivative/Jacobian consistency", ok,
                           {"max_jacobian_rel_err": jac_err, "max_grad_rel_err": grad_err, "seconds": dt})


def criterion_2() -> CriterionResult:
    prob, _ = builtin_problem("T1")
    worst = 0.0
    for mu0, mu1 in ((0.5, 0.25), (0.1, 0.01)):
        w = extrapolate(prob, PrimalDualPoint([mu0], [1.0], []), mu1)
        worst = max(worst, abs(w.x[0] - mu1), abs(w.y[0] - 1.0))
    return CriterionResult(2, "central-path exactness", worst <= 1e-12, {"max_abs_err": worst})


def criterion_3(seed: int = 0, count: int = 100, hard: int = 10, oracle_points: int = 10_000) -> CriterionResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed + 1)
    worst_cert = 0.0
    worst_gap = -math.inf
    detected = 0
    for H, psi, delta, forced in random_trs_instances(count, hard, seed):
        sol = solve_trs_exact(H, psi, delta)
        detected += int(sol.hard_case)
        worst_cert = max(worst_cert, sol.stationarity, sol.complementarity, sol.feasibility, max(0.0, -sol.psd_margin))
        S = _ball_samples(rng, psi.size, delta, oracle_points)
        sampled = np.min(0.5 * np.einsum("ij,jk,ik->i", S, H, S) + S @ psi)
        worst_gap = max(worst_gap, trs_objective(H, psi, sol.d) - sampled)
    dt = time.perf_counter() - t0
    ok = worst_cert <= 1e-8 and worst_gap <= 1e-9 and detected >= 5 and dt < 10.0
    return CriterionResult(3, "TRS optimality certificates", ok, {
        "max_certificate_residual": worst_cert, "max_objective_minus_sampled": float(worst_gap),
        "hard_cases": detected, "seconds": dt,
    })


def equivalence_cases(count: int = 20, seed: int = 0):
    """Seeded interior cases ``(problem_name, w, mu, delta)`` alternating between T1 and T2."""
    rng = np.random.default_rng(seed)
    cases = []
    tries = 0
    while len(cases) < count:
        tries += 1
        if tries > 100 * count:
            raise RuntimeError("could not generate interior equivalence cases")
        name = ("T1", "T2")[len(cases) % 2]
        prob, _ = builtin_problem(name)
        w = PrimalDualPoint(prob.sample_interior(rng), rng.uniform(0.2, 2.0, size=1), [])
        mu = float(rng.uniform(1e-3, 0.5))
        try:
            newton_equivalence_check(prob, w, mu, 10.0)
        except (NotInterior, NearSingularJacobian):
            continue
        cases.append((name, w, mu, 10.0))
    return cases


def criterion_4(seed: int = 0) -> CriterionResult:
    worst = 0.0
    for name, w, mu, delta in equivalence_cases(20, seed):
        prob, _ = builtin_problem(name)
        worst = max(worst, newton_equivalence_check(prob, w, mu, delta).max_diff)
    return CriterionResult(4, "Newton/TRS equivalence", worst <= 1e-8, {"max_blockwise_diff": worst, "cases": 20})


def _rate_metrics(rec: RunRecord) -> dict:
    rr = convergence_order(rec.report.errors)
    return {"order": rr.order, "min_ratio": float(rr.ratios.min())}


def criterion_5(runs: list[RunRecord]) -> CriterionResult:
    ok = True
    measured: dict = {}
    worst_order = math.inf
    worst_ratio = 0.0
    worst_time = 0.0
    for rec in runs:
        rep = rec.report
        try:
            m = _rate_metrics(rec)
        except ValueError:
            m = {"order": math.nan, "min_ratio": math.nan}
        run_ok = (
            rep.converged and len(rep.trace) <= 30 and rec.kkt <= 1e-10
            and m["order"] >= 1.5 and m["min_ratio"] < 0.1 and rec.seconds < 1.0
        )
        ok &= bool(run_ok)
        measured[rec.label] = (
            f"{rep.status}/outer={len(rep.trace)}/kkt={rec.kkt:.1e}/order={m['order']:.3f}"
            f"/min_ratio={m['min_ratio']:.2e}/t={rec.seconds:.3f}s"
        )
        worst_order = min(worst_order, m["order"]) if not math.isnan(m["order"]) else -math.inf
        worst_ratio = max(worst_ratio, m["min_ratio"]) if not math.isnan(m["min_ratio"]) else math.inf
        worst_time = max(worst_time, rec.seconds)
    return CriterionResult(5, "superlinear and near-quadratic rate", ok, {
        "min_order": worst_order, "max_of_min_ratio": worst_ratio, "max_seconds": worst_time, **measured,
    })


def tail_start(inner_iters) -> int:
    """Smallest ``K`` with ``inner_iters[k] == 0`` for every ``k >= K``."""
    K = len(inner_iters)
    while K > 0 and inner_iters[K - 1] == 0:
        K -= 1
    return K


def criterion_6(runs: list[RunRecord]) -> CriterionResult:
    ok = True
    measured: dict = {}
    for rec in runs:
        inner = [t.inner_iters for t in rec.report.trace]
        K = tail_start(inner)
        run_ok = rec.report.converged and K <= 10 and K < len(inner)
        ok &= bool(run_ok)
        measured[rec.label] = f"K={K}/tail={len(inner) - K}/inner={inner}"
    return CriterionResult(6, "zero-inner-iteration tail", ok, measured)


def criterion_7(runs: list[RunRecord]) -> CriterionResult:
    ok = True
    worst = 0.0
    measured: dict = {}
    for rec in runs:
        band = theta_band(rec.report.errors, rec.report.mus, last=5)
        if not math.isfinite(band):
            band = math.inf
        ok &= band <= 100.0
        worst = max(worst, band)
        measured[rec.label] = f"band={band:.3g}"
    return CriterionResult(7, "Theta(mu) error law", ok, {"max_band": worst, **measured})


def criterion_8(runs: list[RunRecord]) -> CriterionResult:
    ok = True
    checked = 0
    lam = math.inf
    for rec in runs:
        if rec.algorithm != "riptrm" or rec.problem not in ("T1", "T2"):
            continue
        for row in rec.report.trace:
            if row.err_to_ref <= 1e-3:
                checked += 1
                lam = min(lam, row.lambda_min)
                ok &= row.lambda_min > 0
    ok &= checked > 0
    return CriterionResult(8, "H positive definite near the solution", ok,
                           {"min_lambda_min": lam, "iterates_checked": checked})


def criterion_9() -> CriterionResult:
    ok = True
    measured = {}
    for theta in (0.5, 0.9):
        rep = schedule_check(BarrierSchedule(mu0=0.1, kappa=0.5, theta=theta), steps=20)
        ok &= rep.passed
        measured[f"theta={theta}"] = f"pass={rep.passed}/log10(final mu)={rep.final_log_mu / math.log(10):.4g}"
    return CriterionResult(9, "schedule assumptions", ok, measured)


def criterion_10() -> CriterionResult:
    ok = True
    measured = {}
    for name in BUILTIN_NAMES:
        prob, ref = builtin_problem(name)
        rep = regularity_check(prob, ref.point)
        ok &= rep.passed
        measured[name] = f"licq={rep.licq.passed}/sc={rep.sc.passed}/sosc={rep.sosc.status}"
    prob, w = sc_fault_fixture()
    rep = regularity_check(prob, w)
    ok &= not rep.sc.passed
    measured["sc_fault"] = f"sc={rep.sc.passed}"
    prob, w = licq_fault_fixture()
    rep = regularity_check(prob, w)
    ok &= not rep.licq.passed
    measured["licq_fault"] = f"licq={rep.licq.passed}"
    return CriterionResult(10, "regularity suite", ok, measured)


def criterion_11(jobs: int = 1) -> CriterionResult:
    from .tracefile import format_trace

    first = [format_trace(r.report, r.algorithm) for r in run_rate_suite(jobs)]
    second = [format_trace(r.report, r.algorithm) for r in run_rate_suite(jobs)]
    same = first == second
    return CriterionResult(11, "determinism", same, {"traces_compared": len(first), "identical": same})


def run_all(seed: int = 0, jobs: int = 1, runs: list[RunRecord] | None = None) -> list[CriterionResult]:
    """Run criteria 1 through 11 and return their results in order."""
    if runs is None:
        runs = run_rate_suite(jobs)
    return [
        criterion_1(seed),
        criterion_2(),
        criterion_3(seed),
        criterion_4(seed),
        criterion_5(runs),
        criterion_6(runs),
        criterion_7(runs),
        criterion_8(runs),
        criterion_9(),
        criterion_10(),
        criterion_11(jobs),
    ]


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 9: criterion_9, 10: criterion_10,
}

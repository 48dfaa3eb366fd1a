"""Primal-dual interior point trust-region method for inequality-constrained problems.

The inner loop solves the trust-region subproblem exactly on the condensed
Hessian ``H(x, y)`` and barrier gradient ``psi_mu(x)``, derives the
multiplier step, and returns as soon as the full step satisfies the
first-order barrier tests and the second-order stationarity test. Steps
that do not are accepted or rejected by a ratio test on the log-barrier
merit ``f - mu * sum(log g_i)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InnerStalled, NonpositiveConstraint, NotInterior
from .kkt import hessian_matrix, kkt_residual, newton_step
from .manifold import TangentBasis
from .problem import ConstrainedProblem, PrimalDualPoint, ReferenceSolution
from .ripm import (
    CONVERGED,
    INNER_STALLED,
    MAX_OUTER,
    ForcingFunctions,
    IterationTrace,
    OuterConfig,
    SolveReport,
    _fraction_to_boundary,
    barrier_update,
    finalize_trace,
    stopping_check,
)
from .trs import TRSSolution, solve_trs_exact

__all__ = [
    "CondensedHessian",
    "TrustRegionSettings",
    "SospResult",
    "EquivalenceReport",
    "condensed_hessian",
    "barrier_gradient",
    "barrier_merit",
    "y_step",
    "sosp_check",
    "riptrm_solve",
    "newton_equivalence_check",
    "solve_trs_exact",
    "TRSSolution",
]

Y_FLOOR = 1e-12


@dataclass(frozen=True)
class CondensedHessian:
    """``Hess f - sum y_i Hess g_i + A_g Y S^{-1} A_g^*`` in the tangent basis at ``x``."""

    matrix: np.ndarray
    basis: TangentBasis
    lambda_min: float


@dataclass(frozen=True)
class TrustRegionSettings:
    """Radius bookkeeping: ``delta_max``, the initial radius, and the floor for restarts."""

    delta_max: float = 10.0
    delta_init: float = 1.0
    delta_min_init: float = 0.1
    eta_accept: float = 0.1
    eta_shrink: float = 0.25
    eta_grow: float = 0.75
    shrink: float = 0.25
    grow: float = 2.0

    def __post_init__(self):
        if not 0 < self.delta_init <= self.delta_max:
            raise ValueError("need 0 < delta_init <= delta_max")
        if not 0 < self.delta_min_init <= self.delta_max:
            raise ValueError("need 0 < delta_min_init <= delta_max")
        if not 0 < self.eta_accept <= self.eta_shrink < self.eta_grow < 1:
            raise ValueError("need 0 < eta_accept <= eta_shrink < eta_grow < 1")
        if not (0 < self.shrink < 1 < self.grow):
            raise ValueError("need 0 < shrink < 1 < grow")


def _require_interior(problem, x):
    g = problem.g(x)
    if np.any(g <= 0):
        raise NonpositiveConstraint(f"g(x) must be strictly positive, min g = {g.min():.3e}")
    return g


def condensed_hessian(problem: ConstrainedProblem, x, y, basis: TangentBasis | None = None) -> CondensedHessian:
    g = _require_interior(problem, x)
    y = np.asarray(y, dtype=float)
    if basis is None:
        basis = problem.manifold.tangent_basis(x)
    w = PrimalDualPoint(x, y, np.zeros(problem.p))
    Gg = basis.coefficients(problem.ineq_grads(x))
    H = hessian_matrix(problem, w, basis) + Gg @ np.diag(y / g) @ Gg.T
    H = 0.5 * (H + H.T)
    lam_min = float(np.linalg.eigvalsh(H)[0]) if H.size else math.inf
    return CondensedHessian(H, basis, lam_min)


def barrier_gradient(problem: ConstrainedProblem, x, mu: float) -> np.ndarray:
    """``grad f(x) - mu * sum_i grad g_i(x) / g_i(x)``, a tangent vector at ``x``."""
    g = _require_interior(problem, x)
    return problem.objective.grad(x) - mu * (problem.ineq_grads(x) @ (1.0 / g))


def barrier_merit(problem: ConstrainedProblem, x, mu: float) -> float:
    g = problem.g(x)
    if np.any(g <= 0):
        return math.inf
    return problem.f(x) - mu * float(np.sum(np.log(g)))


def y_step(problem: ConstrainedProblem, x, y, mu: float, d) -> np.ndarray:
    """Multiplier step ``-y + mu S^{-1} 1 - Y S^{-1} A_g^*[d]`` paired with ``d``."""
    g = _require_interior(problem, x)
    y = np.asarray(y, dtype=float)
    return -y + mu / g - (y / g) * (problem.ineq_grads(x).T @ d)


@dataclass(frozen=True)
class SospResult:
    passed: bool
    lambda_min: float

    def __bool__(self):
        return self.passed


def sosp_check(problem: ConstrainedProblem, x, y, mu: float, forcing: ForcingFunctions) -> SospResult:
    lam = condensed_hessian(problem, x, y).lambda_min
    return SospResult(bool(lam >= -forcing.sosp(mu)), lam)


# ---------------------------------------------------------------------------
# Newton / trust-region equivalence
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class EquivalenceReport:
    dx_diff: float
    dy_diff: float
    trs: TRSSolution

    @property
    def max_diff(self) -> float:
        return max(self.dx_diff, self.dy_diff)


def _trs_step(problem, x, y, mu, delta):
    H = condensed_hessian(problem, x, y)
    psi = barrier_gradient(problem, x, mu)
    sol = solve_trs_exact(H.matrix, H.basis.coefficients(psi), delta)
    d = H.basis.vector(sol.d)
    return H, psi, sol, d


def newton_equivalence_check(problem: ConstrainedProblem, w: PrimalDualPoint, mu: float, delta: float) -> EquivalenceReport:
    """Compare the exact trust-region step with the Newton step on ``F(.; mu)``.

    Raises
    ------
    NotInterior
        If the trust-region step has norm ``>= delta - 1e-12``.
    """
    if problem.p:
        raise ValueError("trust-region variant handles inequality constraints only")
    H, psi, sol, d = _trs_step(problem, w.x, w.y, mu, delta)
    if np.linalg.norm(sol.d) >= delta - 1e-12:
        raise NotInterior(f"trust-region step has norm {np.linalg.norm(sol.d):.6g} >= delta = {delta}")
    dy = y_step(problem, w.x, w.y, mu, d)
    newton = newton_step(problem, w, mu)
    return EquivalenceReport(
        float(np.max(np.abs(d - newton.dx), initial=0.0)),
        float(np.max(np.abs(dy - newton.dy), initial=0.0)),
        sol,
    )


# ---------------------------------------------------------------------------
# Solver
# ---------------------------------------------------------------------------
@dataclass
class _InnerOutcome:
    x: np.ndarray
    y: np.ndarray
    delta: float
    updates: int
    nu: float
    log: list[dict] = field(default_factory=list)


def _inner(problem, x, y, mu, delta, config: OuterConfig, region: TrustRegionSettings, k: int):
    man = problem.manifold
    forcing = config.forcing
    tau = config.tau
    log = []
    merit = barrier_merit(problem, x, mu)
    for ell in range(config.inner_max + 1):
        H, psi, sol, d = _trs_step(problem, x, y, mu, delta)
        dy = y_step(problem, x, y, mu, d)
        cand = PrimalDualPoint(man.retract(x, d), y + dy, np.zeros(0))
        entry = {"k": k, "ell": ell, "delta": delta, "nu": sol.nu, "lambda_min": H.lambda_min,
                 "rho": math.nan, "merit": merit}
        first_order = stopping_check(problem, cand, mu, forcing)
        if first_order.passed and sosp_check(problem, cand.x, cand.y, mu, forcing).passed:
            log.append(entry)
            return _InnerOutcome(cand.x, cand.y, delta, ell, sol.nu, log)
        if cand.is_interior(problem) and kkt_residual(problem, cand) <= config.kkt_stop_tol:
            entry["terminal"] = True
            log.append(entry)
            return _InnerOutcome(cand.x, cand.y, delta, ell, sol.nu, log)
        if ell == config.inner_max:
            log.append(entry)
            break

        # Damped trial point: fraction to the boundary on the x-arc and on y.
        g0 = problem.g(x)
        alpha = 1.0
        while alpha >= 1e-12 and not np.all(problem.g(man.retract(x, alpha * d)) >= (1.0 - tau) * g0):
            alpha *= 0.5
        c = sol.d
        pred = -(alpha * (H.basis.coefficients(psi) @ c) + 0.5 * alpha**2 * (c @ H.matrix @ c))
        x_trial = man.retract(x, alpha * d)
        new_merit = barrier_merit(problem, x_trial, mu)
        ared = merit - new_merit
        if pred <= 1e-15 * max(1.0, abs(merit)):
            # Model sees no decrease: x is stationary for the merit at this radius.
            rho = 1.0 if abs(ared) <= 1e-15 * max(1.0, abs(merit)) else -math.inf
        else:
            rho = ared / pred
        entry["rho"] = float(rho)
        log.append(entry)

        if rho >= region.eta_accept and alpha >= 1e-12:
            alpha_y = _fraction_to_boundary(y, dy, tau)
            x = x_trial
            y = np.maximum(y + alpha_y * dy, Y_FLOOR)
            merit = new_merit
        if rho < region.eta_shrink:
            delta = region.shrink * delta
        elif rho > region.eta_grow and sol.on_boundary:
            delta = min(region.grow * delta, region.delta_max)
        if delta < 1e-14:
            break
    raise InnerStalled(f"trust-region inner iteration failed at mu={mu:.3e} (delta={delta:.3e})")


def riptrm_solve(
    problem: ConstrainedProblem,
    w0: PrimalDualPoint | None = None,
    config: OuterConfig | None = None,
    region: TrustRegionSettings | None = None,
    reference: ReferenceSolution | None = None,
    raise_errors: bool = False,
) -> SolveReport:
    """Outer barrier loop with the trust-region inner iteration.

    Only inequality-constrained problems are accepted. Failure handling
    follows :func:`riemipm.ripm.outer_solve`.
    """
    config = config or OuterConfig()
    region = region or TrustRegionSettings()
    if problem.p:
        raise ValueError("trust-region variant handles inequality constraints only (p = 0)")
    w = w0 if w0 is not None else problem.initial
    if w is None:
        raise ValueError("no initial point given and the problem has none")
    problem.check_multipliers(w)
    if not w.is_interior(problem):
        raise ValueError("initial point must be strictly feasible (g(x) > 0, y > 0)")
    if reference is None:
        reference = problem.reference

    x, y = w.x, w.y
    delta_init = region.delta_init
    trace: list[IterationTrace] = []
    iterates: list[PrimalDualPoint] = []
    events: list[str] = []
    inner_log: list[dict] = []
    status = MAX_OUTER
    failure = None
    mu = config.schedule.mu0
    for k in range(config.max_outer):
        if k > 0:
            mu = barrier_update(mu, config.schedule)
        try:
            out = _inner(problem, x, y, mu, delta_init, config, region, k)
        except InnerStalled as exc:
            events.append(f"k={k}: {exc}")
            status, failure = INNER_STALLED, exc
            break
        inner_log.extend(out.log)
        x, y = out.x, out.y
        delta_init = max(out.delta, region.delta_min_init)
        cur = PrimalDualPoint(x, y, np.zeros(0))
        iterates.append(cur)
        check = stopping_check(problem, cur, mu, config.forcing)
        trace.append(IterationTrace(
            k=k, mu=mu, grad_norm=check.grad_norm, compl_norm=check.compl_norm,
            eq_norm=check.eq_norm, min_g=check.min_g, min_y=check.min_y,
            inner_iters=out.updates, err_to_ref=math.nan,
            delta=out.delta, nu=out.nu,
            lambda_min=condensed_hessian(problem, x, y).lambda_min,
        ))
        if kkt_residual(problem, cur) <= config.kkt_stop_tol:
            status = CONVERGED
            break
    report = SolveReport(PrimalDualPoint(x, y, np.zeros(0)), status, trace, events=events, inner_log=inner_log)
    report = finalize_trace(problem, report, reference, iterates)
    if raise_errors and failure is not None:
        failure.report = report
        raise failure
    return report

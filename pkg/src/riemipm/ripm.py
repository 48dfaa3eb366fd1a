"""Outer interior point iteration with Newton extrapolation.

Each outer iteration lowers the barrier parameter, takes one Newton step
on the barrier KKT field from the current iterate, and keeps the result
if it already meets the stopping conditions. Otherwise a damped Newton
inner iteration (:func:`inner_fallback`) is run at the new parameter.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InnerStalled, NearSingularJacobian
from .kkt import DEFAULT_CONDITION_CAP, barrier_kkt, extrapolate, kkt_residual, newton_step
from .problem import ConstrainedProblem, PrimalDualPoint, ReferenceSolution

__all__ = [
    "ForcingFunctions",
    "BarrierSchedule",
    "OuterConfig",
    "IterationTrace",
    "SolveReport",
    "StoppingResult",
    "InnerResult",
    "barrier_update",
    "stopping_check",
    "inner_fallback",
    "outer_solve",
    "primal_dual_distance",
]

_log = logging.getLogger(__name__)

CONVERGED = "Converged"
MAX_OUTER = "MaxOuter"
SINGULAR_JACOBIAN = "SingularJacobian"
INNER_STALLED = "InnerStalled"


@dataclass(frozen=True)
class ForcingFunctions:
    """Linear forcing functions ``eps(mu) = c * mu`` for each stopping test."""

    c_grad: float = 1.0
    c_compl: float = 1.0
    c_eq: float = 1.0
    c_sosp: float = 1.0

    def __post_init__(self):
        for name in ("c_grad", "c_compl", "c_eq", "c_sosp"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def grad(self, mu):
        return self.c_grad * mu

    def compl(self, mu):
        return self.c_compl * mu

    def eq(self, mu):
        return self.c_eq * mu

    def sosp(self, mu):
        return self.c_sosp * mu

    def bound_witnesses(self) -> dict[str, tuple[float, float]]:
        """Constants ``(lo, hi)`` with ``0 < lo < 1 < hi`` and ``lo*mu <= eps(mu) <= hi*mu``."""
        return {
            name: (min(c, 0.5), max(c, 2.0))
            for name, c in (("grad", self.c_grad), ("compl", self.c_compl), ("eq", self.c_eq), ("sosp", self.c_sosp))
        }


@dataclass(frozen=True)
class BarrierSchedule:
    """Barrier update ``mu_{k+1} = kappa * mu_k ** (1 + theta)``."""

    mu0: float = 0.1
    kappa: float = 0.5
    theta: float = 0.9

    def __post_init__(self):
        if not 0.0 < self.mu0 <= 1.0:
            raise ValueError(f"mu0 must lie in (0, 1], got {self.mu0}")
        if not 0.0 < self.kappa < 1.0:
            raise ValueError(f"kappa must lie in (0, 1), got {self.kappa}")
        if not 0.0 < self.theta < 1.0:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta}")

    def update(self, mu: float) -> float:
        return barrier_update(mu, self)

    def log_sequence(self, steps: int) -> np.ndarray:
        """``log mu_k`` for ``k < steps``; stays finite long after ``mu_k`` underflows."""
        out = np.empty(steps)
        out[0] = math.log(self.mu0)
        for k in range(1, steps):
            out[k] = math.log(self.kappa) + (1.0 + self.theta) * out[k - 1]
        return out


def barrier_update(mu: float, schedule: BarrierSchedule) -> float:
    if not 0.0 < mu <= 1.0:
        raise ValueError(f"barrier parameter must lie in (0, 1], got {mu}")
    return schedule.kappa * mu ** (1.0 + schedule.theta)


@dataclass(frozen=True)
class OuterConfig:
    schedule: BarrierSchedule = field(default_factory=BarrierSchedule)
    forcing: ForcingFunctions = field(default_factory=ForcingFunctions)
    max_outer: int = 50
    kkt_stop_tol: float = 1e-10
    condition_cap: float = DEFAULT_CONDITION_CAP
    tau: float = 0.995
    inner_max: int = 100

    def __post_init__(self):
        if not 0.9 < self.tau < 1.0:
            raise ValueError(f"fraction-to-boundary tau must lie in (0.9, 1), got {self.tau}")
        if self.max_outer < 1 or self.inner_max < 1:
            raise ValueError("iteration caps must be positive")
        if not self.kkt_stop_tol > 0:
            raise ValueError("kkt_stop_tol must be positive")
        if not self.condition_cap > 1:
            raise ValueError("condition_cap must exceed 1")


@dataclass
class IterationTrace:
    """One row per outer iteration.

    Residual norms, ``min_g``, ``min_y`` and ``err_to_ref`` describe the
    iterate produced by iteration ``k`` at barrier parameter ``mu``.
    ``delta``, ``nu`` and ``lambda_min`` are filled by the trust-region
    variant only.
    """

    k: int
    mu: float
    grad_norm: float
    compl_norm: float
    eq_norm: float
    min_g: float
    min_y: float
    inner_iters: int
    err_to_ref: float
    order: float | None = None
    delta: float | None = None
    nu: float | None = None
    lambda_min: float | None = None


@dataclass
class SolveReport:
    point: PrimalDualPoint
    status: str
    trace: list[IterationTrace]
    reference_mode: str = "reference"
    events: list[str] = field(default_factory=list)
    inner_log: list[dict] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED

    @property
    def errors(self) -> np.ndarray:
        return np.array([t.err_to_ref for t in self.trace])

    @property
    def mus(self) -> np.ndarray:
        return np.array([t.mu for t in self.trace])


@dataclass(frozen=True)
class StoppingResult:
    passed: bool
    grad_norm: float
    compl_norm: float
    eq_norm: float
    min_g: float
    min_y: float

    def __bool__(self):
        return self.passed


def stopping_check(problem: ConstrainedProblem, w: PrimalDualPoint, mu: float, forcing: ForcingFunctions) -> StoppingResult:
    """Residual tests against the forcing functions plus strict feasibility."""
    F = barrier_kkt(problem, w, mu)
    g = problem.g(w.x)
    min_g = float(g.min()) if g.size else math.inf
    min_y = float(w.y.min()) if w.y.size else math.inf
    passed = (
        F.grad_norm <= forcing.grad(mu)
        and F.compl_norm <= forcing.compl(mu)
        and F.eq_norm <= forcing.eq(mu)
        and min_g > 0
        and min_y > 0
    )
    return StoppingResult(bool(passed), F.grad_norm, F.compl_norm, F.eq_norm, min_g, min_y)


def _fraction_to_boundary(v, dv, tau):
    """Largest ``a <= 1`` with ``v + a dv >= (1 - tau) v``."""
    neg = dv < 0
    if not np.any(neg):
        return 1.0
    return float(min(1.0, np.min(-tau * v[neg] / dv[neg])))


def _terminal(problem, w, config) -> bool:
    # Once mu is below roundoff the barrier tests cannot pass in floating
    # point; a strictly feasible point meeting the final KKT tolerance ends
    # the run instead of sending the inner iteration after noise.
    return w.is_interior(problem) and kkt_residual(problem, w) <= config.kkt_stop_tol


@dataclass(frozen=True)
class InnerResult:
    point: PrimalDualPoint
    iterations: int
    merits: tuple[float, ...]


def inner_fallback(
    problem: ConstrainedProblem,
    w_init: PrimalDualPoint,
    mu: float,
    forcing: ForcingFunctions,
    config: OuterConfig,
) -> InnerResult:
    """Damped Newton on ``F(.; mu)`` with merit ``0.5 ||F(w; mu)||^2``.

    The step length is capped by fraction-to-boundary rules for ``y`` and
    for ``g`` along the retracted arc, then halved until an Armijo decrease
    of the merit holds. Locally convergent only. A strictly feasible
    iterate whose unrelaxed KKT residual is within ``config.kkt_stop_tol``
    is returned even if the barrier tests fail, which matters once ``mu``
    is below roundoff.

    Raises
    ------
    ValueError
        If ``w_init`` is not strictly feasible.
    InnerStalled
        If no step of length at least 1e-12 is acceptable or the iteration
        cap is reached.
    """
    if not w_init.is_interior(problem):
        raise ValueError("inner iteration needs a strictly feasible start (g(x) > 0, y > 0)")
    man = problem.manifold
    tau = config.tau
    w = w_init
    merit = 0.5 * barrier_kkt(problem, w, mu).norm() ** 2
    merits = [merit]
    for it in range(config.inner_max + 1):
        if stopping_check(problem, w, mu, forcing) or _terminal(problem, w, config):
            return InnerResult(w, it, tuple(merits))
        if it == config.inner_max:
            break
        step = newton_step(problem, w, mu, config.condition_cap)
        g0 = problem.g(w.x)
        alpha = _fraction_to_boundary(w.y, step.dy, tau)
        while alpha >= 1e-12 and not np.all(problem.g(man.retract(w.x, alpha * step.dx)) >= (1.0 - tau) * g0):
            alpha *= 0.5
        while alpha >= 1e-12:
            trial = PrimalDualPoint(man.retract(w.x, alpha * step.dx), w.y + alpha * step.dy, w.z + alpha * step.dz)
            if trial.is_interior(problem):
                trial_merit = 0.5 * barrier_kkt(problem, trial, mu).norm() ** 2
                if trial_merit <= (1.0 - 2e-4 * alpha) * merit:
                    break
            alpha *= 0.5
        else:
            raise InnerStalled(f"no acceptable step length at inner iteration {it} (mu={mu:.3e})")
        w, merit = trial, trial_merit
        merits.append(merit)
    raise InnerStalled(f"inner iteration cap {config.inner_max} reached at mu={mu:.3e}")


def primal_dual_distance(problem: ConstrainedProblem, w: PrimalDualPoint, ref: PrimalDualPoint) -> float:
    """Manifold distance on ``x`` combined with Euclidean distance on ``(y, z)``."""
    dx = problem.manifold.dist(w.x, ref.x)
    return float(np.sqrt(dx**2 + np.sum((w.y - ref.y) ** 2) + np.sum((w.z - ref.z) ** 2)))


def _order_at(errors, k):
    if k < 2:
        return None
    e0, e1, e2 = errors[k - 2], errors[k - 1], errors[k]
    if min(e0, e1, e2) <= 1e-14 or e1 == e0:
        return None
    return math.log(e2 / e1) / math.log(e1 / e0)


def finalize_trace(problem, report: SolveReport, reference: ReferenceSolution | None, iterates):
    """Fill ``err_to_ref`` and ``order`` once the run is over."""
    if reference is not None:
        target = reference.point
        report.reference_mode = "reference"
    else:
        target = report.point
        report.reference_mode = "self"
        report.events.append("no reference solution: errors measured against the final iterate")
    errors = [primal_dual_distance(problem, w, target) for w in iterates]
    for row, e in zip(report.trace, errors):
        row.err_to_ref = e
    for k, row in enumerate(report.trace):
        row.order = _order_at(errors, k)
    return report


def outer_solve(
    problem: ConstrainedProblem,
    w0: PrimalDualPoint | None = None,
    config: OuterConfig | None = None,
    reference: ReferenceSolution | None = None,
    raise_errors: bool = False,
) -> SolveReport:
    """Run the outer iteration until the KKT residual drops below ``config.kkt_stop_tol``.

    ``w0`` defaults to ``problem.initial`` and ``reference`` to
    ``problem.reference``. Solver failures (near-singular Jacobian, stalled
    inner iteration, iteration cap) are reported through ``status``. With
    ``raise_errors=True`` the first two are re-raised instead, carrying the
    partial report as ``exc.report``.
    """
    config = config or OuterConfig()
    w = w0 if w0 is not None else problem.initial
    if w is None:
        raise ValueError("no initial point given and the problem has none")
    problem.check_multipliers(w)
    if not w.is_interior(problem):
        raise ValueError("initial point must be strictly feasible (g(x) > 0, y > 0)")
    if reference is None:
        reference = problem.reference
    forcing = config.forcing

    trace: list[IterationTrace] = []
    iterates: list[PrimalDualPoint] = []
    events: list[str] = []
    status = MAX_OUTER
    failure = None
    mu = config.schedule.mu0
    for k in range(config.max_outer):
        if k > 0:
            mu = barrier_update(mu, config.schedule)
        try:
            candidate = extrapolate(problem, w, mu, config.condition_cap)
            check = stopping_check(problem, candidate, mu, forcing)
            if check.passed or _terminal(problem, candidate, config):
                w_next, inner_iters = candidate, 0
            else:
                if candidate.is_interior(problem):
                    start = candidate
                else:
                    start = w
                    events.append(f"k={k}: extrapolated point not strictly feasible; inner iteration restarted from previous iterate")
                inner = inner_fallback(problem, start, mu, forcing, config)
                w_next, inner_iters = inner.point, inner.iterations
                check = stopping_check(problem, w_next, mu, forcing)
        except NearSingularJacobian as exc:
            events.append(f"k={k}: {exc}")
            status, failure = SINGULAR_JACOBIAN, exc
            break
        except InnerStalled as exc:
            events.append(f"k={k}: {exc}")
            status, failure = INNER_STALLED, exc
            break
        w = w_next
        iterates.append(w)
        trace.append(IterationTrace(
            k=k, mu=mu, grad_norm=check.grad_norm, compl_norm=check.compl_norm,
            eq_norm=check.eq_norm, min_g=check.min_g, min_y=check.min_y,
            inner_iters=inner_iters, err_to_ref=math.nan,
        ))
        _log.debug("k=%d mu=%.3e inner=%d", k, mu, inner_iters)
        if kkt_residual(problem, w) <= config.kkt_stop_tol:
            status = CONVERGED
            break
    report = finalize_trace(problem, SolveReport(w, status, trace, events=events), reference, iterates)
    if raise_errors and failure is not None:
        failure.report = report
        raise failure
    return report

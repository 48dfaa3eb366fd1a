"""Regularity checks, barrier-schedule checks, rate estimation and finite-difference validation."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import NotApproximatelyKKT
from .kkt import assemble_jacobian, barrier_kkt, hessian_matrix, kkt_residual
from .problem import ConstrainedProblem, PrimalDualPoint
from .ripm import BarrierSchedule

__all__ = [
    "LicqResult",
    "ScResult",
    "SoscResult",
    "RegularityReport",
    "ScheduleReport",
    "RateReport",
    "FDReport",
    "regularity_check",
    "schedule_check",
    "convergence_order",
    "theta_band",
    "fd_validate",
    "jacobian_fd_error",
    "NOISE_FLOOR",
]

NOISE_FLOOR = 1e-14


# ---------------------------------------------------------------------------
# Regularity
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class LicqResult:
    passed: bool
    sigma_min: float


@dataclass(frozen=True)
class ScResult:
    passed: bool
    margin: float  # min_i max(y_i, g_i)


@dataclass(frozen=True)
class SoscResult:
    status: str  # "pass", "fail", "vacuous" or "inconclusive"
    min_rayleigh: float

    @property
    def passed(self) -> bool:
        return self.status in ("pass", "vacuous")


@dataclass(frozen=True)
class RegularityReport:
    licq: LicqResult
    sc: ScResult
    sosc: SoscResult
    active: tuple[int, ...]

    @property
    def passed(self) -> bool:
        return self.licq.passed and self.sc.passed and self.sosc.passed


def regularity_check(problem: ConstrainedProblem, w: PrimalDualPoint, tol: float = 1e-6) -> RegularityReport:
    """LICQ, strict complementarity and second-order sufficiency at an approximate KKT point.

    The LICQ decision uses the active-gradient matrix with unit-normalized
    columns, so rescaling one constraint by a positive factor changes the
    reported ``sigma_min`` but not the verdict. The SOSC test is run on the
    null space of the strongly active and equality gradients; if some active
    constraint has a zero multiplier the cone is not a subspace and the
    result is ``"inconclusive"``.
    """
    res = kkt_residual(problem, w)
    if res > 1e-6:
        raise NotApproximatelyKKT(f"KKT residual {res:.3e} exceeds 1e-6")
    x, y = w.x, w.y
    basis = problem.manifold.tangent_basis(x)
    g = problem.g(x)
    active = tuple(int(i) for i in np.flatnonzero(g <= tol))

    Gg = basis.coefficients(problem.ineq_grads(x))
    Gh = basis.coefficients(problem.eq_grads(x))
    M = np.column_stack([Gg[:, list(active)], Gh]) if (active or problem.p) else np.zeros((basis.dim, 0))
    if M.shape[1] == 0:
        licq = LicqResult(True, math.inf)
    elif M.shape[1] > M.shape[0]:
        licq = LicqResult(False, 0.0)
    else:
        sigma = float(np.linalg.svd(M, compute_uv=False)[-1])
        norms = np.linalg.norm(M, axis=0)
        Mn = M / np.where(norms > 0, norms, 1.0)
        sigma_n = float(np.linalg.svd(Mn, compute_uv=False)[-1])
        licq = LicqResult(bool(sigma_n > tol), sigma)

    if problem.m:
        sc_ok = all((y[i] <= tol) != (g[i] <= tol) for i in range(problem.m))
        sc = ScResult(bool(sc_ok), float(np.min(np.maximum(y, g))))
    else:
        sc = ScResult(True, math.inf)

    strong = [i for i in active if y[i] > tol]
    weak = [i for i in active if y[i] <= tol]
    rows = np.column_stack([Gg[:, strong], Gh]) if (strong or problem.p) else np.zeros((basis.dim, 0))
    Z = scipy.linalg.null_space(rows.T) if rows.shape[1] else np.eye(basis.dim)
    if weak:
        sosc = SoscResult("inconclusive", math.nan)
    elif Z.shape[1] == 0:
        sosc = SoscResult("vacuous", math.inf)
    else:
        Hl = hessian_matrix(problem, w, basis)
        red = Z.T @ (0.5 * (Hl + Hl.T)) @ Z
        rq = float(np.linalg.eigvalsh(red)[0])
        sosc = SoscResult("pass" if rq > tol else "fail", rq)
    return RegularityReport(licq, sc, sosc, active)


# ---------------------------------------------------------------------------
# Barrier schedule
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class ScheduleReport:
    passed: bool
    log_mu: np.ndarray
    log_sq_ratio: np.ndarray  # log(mu_k^2 / mu_{k+1})
    log_ratio: np.ndarray  # log(mu_{k+1} / mu_k)

    @property
    def final_log_mu(self) -> float:
        return float(self.log_mu[-1])


def schedule_check(schedule, steps: int = 20) -> ScheduleReport:
    """Numerical check that ``mu_k^2 = o(mu_{k+1})``, ``mu_{k+1} = o(mu_k)`` and monotonicity.

    ``schedule`` is a :class:`BarrierSchedule` or an explicit sequence of
    barrier parameters. Everything is evaluated in log space since the
    superlinear schedules underflow doubles within a few dozen steps.
    """
    if steps < 3:
        raise ValueError("need at least 3 steps")
    if isinstance(schedule, BarrierSchedule):
        L = schedule.log_sequence(steps)
    else:
        mus = np.asarray(schedule, dtype=float)[:steps]
        if mus.size < 3 or np.any(mus <= 0):
            raise ValueError("explicit schedule needs at least 3 positive values")
        L = np.log(mus)
    sq = 2.0 * L[:-1] - L[1:]
    rt = L[1:] - L[:-1]
    passed = (
        bool(np.all(np.diff(sq) < 0))
        and bool(np.all(np.diff(rt) < 0))
        and sq[-1] < math.log(1e-3)
        and rt[-1] < rt[0]
        and bool(np.all(np.diff(L) < 0))
    )
    return ScheduleReport(bool(passed), L, sq, rt)


# ---------------------------------------------------------------------------
# Rates
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class RateReport:
    errors: np.ndarray  # as given
    usable: np.ndarray  # after dropping trailing sub-floor entries
    ratios: np.ndarray  # e_{k+1} / e_k
    orders: np.ndarray  # log(e_{k+1}/e_k) / log(e_k/e_{k-1})
    order: float  # median of the last three orders
    theta_ratios: np.ndarray | None = None  # e_k / mu_k, when mus are supplied


def convergence_order(errors, mus=None, floor: float = NOISE_FLOOR) -> RateReport:
    e = np.asarray(errors, dtype=float)
    n = e.size
    while n and not e[n - 1] > floor:
        n -= 1
    usable = e[:n]
    if usable.size < 3:
        raise ValueError("need at least 3 errors above the noise floor")
    if np.any(usable <= floor):
        raise ValueError("errors below the noise floor before the end of the sequence")
    logs = np.log(usable)
    steps = np.diff(logs)
    ratios = np.exp(steps)
    orders = steps[1:] / steps[:-1]
    theta = None
    if mus is not None:
        mus = np.asarray(mus, dtype=float)
        if mus.shape != e.shape:
            raise ValueError("mus and errors must have the same length")
        theta = usable / mus[:n]
    return RateReport(e, usable, ratios, orders, float(np.median(orders[-3:])), theta)


def theta_band(errors, mus, last: int = 5) -> float:
    """``max/min`` of ``e_k / mu_k`` over the last ``last`` entries (``inf`` if any is zero)."""
    r = np.asarray(errors, dtype=float)[-last:] / np.asarray(mus, dtype=float)[-last:]
    if r.size == 0 or not r.min() > 0:
        return math.inf
    return float(r.max() / r.min())


# ---------------------------------------------------------------------------
# Finite differences
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class FDReport:
    grad_error: float
    jacobian_error: float
    samples: int
    tol: float = 1e-5

    @property
    def passed(self) -> bool:
        return self.grad_error <= self.tol and self.jacobian_error <= self.tol


def _random_pd_point(problem, rng):
    x = problem.sample_interior(rng)
    y = rng.uniform(0.1, 2.0, size=problem.m)
    z = rng.standard_normal(problem.p)
    return PrimalDualPoint(x, y, z)


def jacobian_fd_error(problem: ConstrainedProblem, w: PrimalDualPoint, mu: float, h: float | None = None) -> float:
    """Max relative deviation of the assembled Jacobian from central differences of ``F(.; mu)``.

    ``x`` is perturbed along basis directions through the retraction and the
    gradient block of the perturbed fields is read back in the basis at
    ``x``; multipliers are perturbed directly.
    """
    man = problem.manifold
    jac = assemble_jacobian(problem, w)
    B = jac.basis
    d, m, p = jac.d, jac.m, jac.p
    if h is None:
        h = 1e-6 * max(1.0, float(np.sqrt(w.x @ w.x + w.y @ w.y + w.z @ w.z)))

    def field(pt):
        return barrier_kkt(problem, pt, mu).coefficients(B)

    fd = np.empty_like(jac.matrix)
    for j in range(d):
        u = B.columns[:, j]
        plus = w.replace(x=man.retract(w.x, h * u))
        minus = w.replace(x=man.retract(w.x, -h * u))
        fd[:, j] = (field(plus) - field(minus)) / (2 * h)
    for j in range(m):
        e = np.zeros(m)
        e[j] = h
        fd[:, d + j] = (field(w.replace(y=w.y + e)) - field(w.replace(y=w.y - e))) / (2 * h)
    for j in range(p):
        e = np.zeros(p)
        e[j] = h
        fd[:, d + m + j] = (field(w.replace(z=w.z + e)) - field(w.replace(z=w.z - e))) / (2 * h)
    scale = max(1.0, float(np.max(np.abs(jac.matrix))))
    return float(np.max(np.abs(fd - jac.matrix)) / scale)


def _grad_fd_error(problem, fun, x, u, h=1e-6):
    man = problem.manifold
    fd = (fun.value(man.retract(x, h * u)) - fun.value(man.retract(x, -h * u))) / (2 * h)
    an = float(fun.grad(x) @ u)
    return abs(fd - an) / max(1.0, abs(an))


def fd_validate(problem: ConstrainedProblem, samples: int = 20, seed: int = 0, tol: float = 1e-5) -> FDReport:
    """Finite-difference checks of every gradient oracle and of the Jacobian at random interior points."""
    rng = np.random.default_rng(seed)
    funcs = (problem.objective, *problem.inequalities, *problem.equalities)
    gmax = 0.0
    jmax = 0.0
    for _ in range(samples):
        w = _random_pd_point(problem, rng)
        u = problem.manifold.random_tangent(w.x, rng)
        u /= max(np.linalg.norm(u), 1e-300)
        for fun in funcs:
            gmax = max(gmax, _grad_fd_error(problem, fun, w.x, u))
        mu = float(rng.uniform(0.0, 1.0))
        jmax = max(jmax, jacobian_fd_error(problem, w, mu))
    return FDReport(gmax, jmax, samples, tol)

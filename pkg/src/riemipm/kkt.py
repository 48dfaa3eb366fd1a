"""Barrier KKT vector field, its Jacobian in a tangent basis, and the Newton step."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import NearSingularJacobian
from .manifold import TangentBasis
from .problem import ConstrainedProblem, PrimalDualPoint, lagrangian_grad, lagrangian_hess_vec

__all__ = [
    "BarrierKKTValue",
    "JacobianMatrix",
    "NewtonStep",
    "barrier_kkt",
    "kkt_residual",
    "assemble_jacobian",
    "newton_step",
    "extrapolate",
    "DEFAULT_CONDITION_CAP",
]

DEFAULT_CONDITION_CAP = 1e12


@dataclass(frozen=True)
class BarrierKKTValue:
    """``F(w; mu)`` split into its three blocks.

    ``grad_block`` is a tangent vector at ``x`` (ambient coordinates),
    ``compl_block`` is ``S(x) y - mu 1`` and ``eq_block`` is ``h(x)``.
    """

    grad_block: np.ndarray
    compl_block: np.ndarray
    eq_block: np.ndarray

    @property
    def grad_norm(self) -> float:
        return float(np.linalg.norm(self.grad_block))

    @property
    def compl_norm(self) -> float:
        return float(np.linalg.norm(self.compl_block))

    @property
    def eq_norm(self) -> float:
        return float(np.linalg.norm(self.eq_block))

    def norm(self) -> float:
        return float(np.sqrt(self.grad_norm**2 + self.compl_norm**2 + self.eq_norm**2))

    def coefficients(self, basis: TangentBasis) -> np.ndarray:
        """Stacked vector ``[B^T grad; compl; eq]`` of length ``d + m + p``."""
        return np.concatenate([basis.coefficients(self.grad_block), self.compl_block, self.eq_block])


def barrier_kkt(problem: ConstrainedProblem, w: PrimalDualPoint, mu: float) -> BarrierKKTValue:
    if mu < 0:
        raise ValueError("barrier parameter must be nonnegative")
    return BarrierKKTValue(
        lagrangian_grad(problem, w),
        problem.g(w.x) * w.y - mu,
        problem.h(w.x),
    )


def kkt_residual(problem: ConstrainedProblem, w: PrimalDualPoint) -> float:
    """Norm of the unrelaxed KKT field ``F(w; 0)``."""
    return barrier_kkt(problem, w, 0.0).norm()


@dataclass(frozen=True)
class JacobianMatrix:
    """Dense Jacobian of ``F(.; mu)`` in the tangent basis at ``x``.

    Block layout, with ``G_g``/``G_h`` the basis coefficients of the
    constraint gradients::

        [ Hess_x L   -G_g   G_h ]
        [ Y G_g^T    S(x)   0   ]
        [ G_h^T      0      0   ]
    """

    matrix: np.ndarray
    basis: TangentBasis
    d: int
    m: int
    p: int

    def split(self, vec):
        d, m = self.d, self.m
        return vec[:d], vec[d:d + m], vec[d + m:]

    def condition(self) -> float:
        if self.matrix.size == 0:
            return 1.0
        return float(np.linalg.cond(self.matrix))


def hessian_matrix(problem: ConstrainedProblem, w: PrimalDualPoint, basis: TangentBasis) -> np.ndarray:
    """``Hess_x L(w)`` in the basis (columns built from Hessian-vector products)."""
    cols = basis.columns
    d = cols.shape[1]
    out = np.empty((d, d))
    for j in range(d):
        out[:, j] = basis.coefficients(lagrangian_hess_vec(problem, w, cols[:, j]))
    return out


def assemble_jacobian(problem: ConstrainedProblem, w: PrimalDualPoint, basis: TangentBasis | None = None) -> JacobianMatrix:
    problem.check_multipliers(w)
    x = w.x
    if basis is None:
        basis = problem.manifold.tangent_basis(x)
    d, m, p = basis.dim, problem.m, problem.p
    Gg = basis.coefficients(problem.ineq_grads(x))
    Gh = basis.coefficients(problem.eq_grads(x))
    J = np.zeros((d + m + p, d + m + p))
    J[:d, :d] = hessian_matrix(problem, w, basis)
    J[:d, d:d + m] = -Gg
    J[:d, d + m:] = Gh
    J[d:d + m, :d] = w.y[:, None] * Gg.T
    J[d:d + m, d:d + m] = np.diag(problem.g(x))
    J[d + m:, :d] = Gh.T
    return JacobianMatrix(J, basis, d, m, p)


@dataclass(frozen=True)
class NewtonStep:
    dx: np.ndarray
    dy: np.ndarray
    dz: np.ndarray
    condition_estimate: float
    residual: float

    def norm(self) -> float:
        return float(np.sqrt(self.dx @ self.dx + self.dy @ self.dy + self.dz @ self.dz))


def newton_step(
    problem: ConstrainedProblem,
    w: PrimalDualPoint,
    mu: float,
    condition_cap: float = DEFAULT_CONDITION_CAP,
) -> NewtonStep:
    """Solve ``J(w) dw = -F(w; mu)`` by a pivoted LU factorization.

    Raises
    ------
    NearSingularJacobian
        If the 2-norm condition number of the Jacobian exceeds ``condition_cap``.
    """
    jac = assemble_jacobian(problem, w)
    cond = jac.condition()
    if not np.isfinite(cond) or cond > condition_cap:
        raise NearSingularJacobian(cond, condition_cap)
    rhs = -barrier_kkt(problem, w, mu).coefficients(jac.basis)
    if rhs.size == 0:
        sol = rhs
    else:
        sol = scipy.linalg.lu_solve(scipy.linalg.lu_factor(jac.matrix), rhs)
    residual = float(np.linalg.norm(jac.matrix @ sol - rhs))
    cx, dy, dz = jac.split(sol)
    dx = jac.basis.vector(cx)
    return NewtonStep(dx, dy.copy(), dz.copy(), cond, residual)


def extrapolate(
    problem: ConstrainedProblem,
    w: PrimalDualPoint,
    mu: float,
    condition_cap: float = DEFAULT_CONDITION_CAP,
) -> PrimalDualPoint:
    """Newton step on ``F(.; mu)`` from ``w`` followed by the retraction.

    No feasibility safeguard is applied; callers decide what to do when the
    result is not strictly feasible.
    """
    step = newton_step(problem, w, mu, condition_cap)
    return PrimalDualPoint(problem.manifold.retract(w.x, step.dx), w.y + step.dy, w.z + step.dz)

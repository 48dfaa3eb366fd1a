"""Exact solver for the trust-region subproblem

    min  0.5 d^T H d + psi^T d   s.t.  ||d|| <= delta

by eigendecomposition of ``H`` and a safeguarded Newton iteration on the
secular equation ``1/||d(nu)|| = 1/delta``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["TRSSolution", "solve_trs_exact", "trs_objective"]


@dataclass(frozen=True)
class TRSSolution:
    """Global minimizer ``d`` with multiplier ``nu`` and its optimality residuals."""

    d: np.ndarray
    nu: float
    on_boundary: bool
    hard_case: bool
    stationarity: float
    complementarity: float
    feasibility: float
    psd_margin: float

    def certificate_ok(self, tol: float = 1e-8) -> bool:
        return (
            self.stationarity <= tol
            and self.complementarity <= tol
            and self.feasibility <= tol
            and self.psd_margin >= -tol
        )


def trs_objective(H, psi, d) -> float:
    return float(0.5 * d @ H @ d + psi @ d)


def _certify(H, psi, delta, d, nu, on_boundary, hard_case, lam_min):
    nd = np.linalg.norm(d)
    return TRSSolution(
        d=d,
        nu=float(nu),
        on_boundary=bool(on_boundary),
        hard_case=bool(hard_case),
        stationarity=float(np.linalg.norm(H @ d + nu * d + psi)),
        complementarity=float(abs(nu * (delta - nd))),
        feasibility=float(max(0.0, nd - delta)),
        psd_margin=float(lam_min + nu),
    )


def _first_positive(v):
    nz = np.flatnonzero(np.abs(v) > 1e-14)
    if nz.size and v[nz[0]] < 0:
        return -v
    return v


def solve_trs_exact(H, psi, delta, tol: float = 1e-12, maxiter: int = 200) -> TRSSolution:
    """Global solution of the trust-region subproblem.

    Parameters
    ----------
    H : (n, n) array_like
        Symmetric model Hessian (symmetrized internally).
    psi : (n,) array_like
        Model gradient.
    delta : float
        Trust-region radius, positive.

    Notes
    -----
    In the hard case (``psi`` orthogonal to the eigenspace of the smallest
    eigenvalue) the step is completed to the boundary with the eigenvector
    whose first nonzero entry is positive, using a nonnegative coefficient.
    """
    H = np.asarray(H, dtype=float)
    psi = np.asarray(psi, dtype=float)
    if not delta > 0:
        raise ValueError("trust-region radius must be positive")
    n = psi.shape[0]
    if n == 0:
        return _certify(H, psi, delta, psi.copy(), 0.0, False, False, 0.0)
    H = 0.5 * (H + H.T)
    lam, Q = np.linalg.eigh(H)
    a = Q.T @ psi
    lam1 = lam[0]
    scale = max(1.0, np.max(np.abs(lam)))

    def step(nu):
        return -(Q @ (a / (lam + nu)))

    # Interior Newton point.
    if lam1 > 0:
        d = step(0.0)
        if np.linalg.norm(d) <= delta:
            return _certify(H, psi, delta, d, 0.0, False, False, lam1)

    nu_lo = max(0.0, -lam1)
    # Hard case: psi has (numerically) no weight on the bottom eigenspace and
    # the step at nu_lo, taken on the remaining eigenspaces, is too short.
    bottom = np.abs(lam - lam1) <= 1e-10 * scale
    if np.linalg.norm(a[bottom]) <= 1e-12 * max(1.0, np.linalg.norm(psi)):
        rest = ~bottom
        c = np.zeros(n)
        c[rest] = -a[rest] / (lam[rest] + nu_lo)
        d_rest = Q @ c
        nr = np.linalg.norm(d_rest)
        if nr <= delta:
            t = np.sqrt(max(delta**2 - nr**2, 0.0))
            v = _first_positive(Q[:, np.flatnonzero(bottom)[0]])
            d = d_rest + t * v
            return _certify(H, psi, delta, d, nu_lo, True, True, lam1)

    # Easy case: phi(nu) = 1/||d(nu)|| - 1/delta has a root in (nu_lo, nu_hi].
    pnorm = np.linalg.norm(psi)
    lo = nu_lo
    hi = max(nu_lo, pnorm / delta - lam1) + 1e-12 * scale
    while np.linalg.norm(step(hi)) > delta:
        hi = 2.0 * hi + 1.0
    nu = hi
    for _ in range(maxiter):
        denom = lam + nu
        q = a / denom
        dn = np.linalg.norm(q)
        if abs(dn - delta) <= tol * delta:
            break
        phi = 1.0 / dn - 1.0 / delta
        if phi < 0:
            lo = nu
        else:
            hi = nu
        dphi = np.sum(q**2 / denom) / dn**3
        nu_new = nu - phi / dphi
        if not lo < nu_new < hi:
            nu_new = 0.5 * (lo + hi)
        if hi - lo <= tol * max(1.0, hi):
            nu = nu_new
            break
        nu = nu_new
    d = step(nu)
    return _certify(H, psi, delta, d, nu, True, False, lam1)

"""Geometry kernel: Euclidean space, the unit sphere and product manifolds.

Points and tangent vectors are plain 1-D numpy arrays in ambient
coordinates. Every shipped manifold is embedded with the ambient dot
product as its metric, so a tangent basis with orthonormal columns turns
tangent vectors into coefficient vectors by a single matrix product.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Manifold",
    "Euclidean",
    "Sphere",
    "Product",
    "TangentBasis",
]

# Tangency / unit-norm tolerance used by the point and vector checks.
_ATOL = 1e-10


@dataclass(frozen=True)
class TangentBasis:
    """Orthonormal basis of the tangent space at ``base``.

    ``columns`` has shape ``(ambient_dim, dim)``.
    """

    base: np.ndarray
    columns: np.ndarray

    @property
    def dim(self) -> int:
        return self.columns.shape[1]

    def coefficients(self, u: np.ndarray) -> np.ndarray:
        return self.columns.T @ u

    def vector(self, c: np.ndarray) -> np.ndarray:
        return self.columns @ c


class Manifold:
    """Base class. Subclasses implement the geometry of a concrete manifold."""

    kind: str = "abstract"
    dim: int
    ambient_dim: int

    # -- validation ---------------------------------------------------------
    def check_point(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if p.shape != (self.ambient_dim,):
            raise ValueError(
                f"point has shape {p.shape}, expected ({self.ambient_dim},)"
            )
        return p

    def check_tangent(self, p, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.ambient_dim,):
            raise ValueError(
                f"tangent vector has shape {u.shape}, expected ({self.ambient_dim},)"
            )
        resid = np.linalg.norm(u - self.proj(p, u))
        if resid > _ATOL * max(1.0, np.linalg.norm(u)):
            raise ValueError(
                f"vector is not tangent at the given base point (normal part {resid:.3e})"
            )
        return u

    # -- metric -------------------------------------------------------------
    def inner(self, p, u, v) -> float:
        """Riemannian metric at ``p``; raises if ``u`` or ``v`` is not based at ``p``."""
        p = self.check_point(p)
        u = self.check_tangent(p, u)
        v = self.check_tangent(p, v)
        return float(u @ v)

    def norm(self, p, u) -> float:
        return float(np.sqrt(self.inner(p, u, u)))

    # -- geometry, overridden ----------------------------------------------
    def proj(self, p, u) -> np.ndarray:
        raise NotImplementedError

    def retract(self, p, u) -> np.ndarray:
        raise NotImplementedError

    def transport(self, p, q, u) -> np.ndarray:
        raise NotImplementedError

    def dist(self, p, q) -> float:
        raise NotImplementedError

    def tangent_basis(self, p) -> TangentBasis:
        raise NotImplementedError

    def egrad2rgrad(self, p, egrad) -> np.ndarray:
        """Riemannian gradient from the gradient of a smooth ambient extension."""
        raise NotImplementedError

    def ehess2rhess(self, p, egrad, ehess_v, v) -> np.ndarray:
        """Riemannian Hessian-vector product from ambient first/second derivatives."""
        raise NotImplementedError

    def random_point(self, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def random_tangent(self, p, rng: np.random.Generator) -> np.ndarray:
        return self.proj(p, rng.standard_normal(self.ambient_dim))

    def zero_vector(self, p) -> np.ndarray:
        return np.zeros(self.ambient_dim)


class Euclidean(Manifold):
    """``R^n`` with the standard inner product."""

    kind = "euclidean"

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("Euclidean dimension must be >= 1")
        self.n = int(n)
        self.dim = self.n
        self.ambient_dim = self.n

    def __repr__(self):
        return f"Euclidean({self.n})"

    def __eq__(self, other):
        return isinstance(other, Euclidean) and other.n == self.n

    def __hash__(self):
        return hash(("euclidean", self.n))

    def proj(self, p, u):
        return np.asarray(u, dtype=float).copy()

    def retract(self, p, u):
        return np.asarray(p, dtype=float) + np.asarray(u, dtype=float)

    def transport(self, p, q, u):
        return np.asarray(u, dtype=float).copy()

    def dist(self, p, q):
        return float(np.linalg.norm(np.asarray(p) - np.asarray(q)))

    def tangent_basis(self, p):
        return TangentBasis(np.asarray(p, dtype=float), np.eye(self.n))

    def egrad2rgrad(self, p, egrad):
        return np.asarray(egrad, dtype=float)

    def ehess2rhess(self, p, egrad, ehess_v, v):
        return np.asarray(ehess_v, dtype=float)

    def random_point(self, rng):
        return rng.standard_normal(self.n)


class Sphere(Manifold):
    """Unit sphere in ``R^n`` (intrinsic dimension ``n - 1``).

    The retraction is the metric projection ``(p + u) / ||p + u||``, which is
    second order. Parallel transport follows the minimizing great circle and
    is undefined between antipodal points.
    """

    kind = "sphere"

    def __init__(self, n: int):
        if n < 2:
            raise ValueError("sphere ambient dimension must be >= 2")
        self.n = int(n)
        self.dim = self.n - 1
        self.ambient_dim = self.n

    def __repr__(self):
        return f"Sphere({self.n})"

    def __eq__(self, other):
        return isinstance(other, Sphere) and other.n == self.n

    def __hash__(self):
        return hash(("sphere", self.n))

    def point(self, coords) -> np.ndarray:
        """Project ambient coordinates onto the sphere."""
        p = np.asarray(coords, dtype=float)
        nrm = np.linalg.norm(p)
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero vector onto the sphere")
        return p / nrm

    def check_point(self, p):
        p = super().check_point(p)
        if abs(np.linalg.norm(p) - 1.0) > _ATOL:
            raise ValueError("point is not on the unit sphere")
        return p

    def proj(self, p, u):
        p = np.asarray(p, dtype=float)
        u = np.asarray(u, dtype=float)
        return u - (p @ u) * p

    def retract(self, p, u):
        return self.point(np.asarray(p, dtype=float) + np.asarray(u, dtype=float))

    def exp(self, p, u):
        p = np.asarray(p, dtype=float)
        u = np.asarray(u, dtype=float)
        t = np.linalg.norm(u)
        if t == 0.0:
            return p.copy()
        return self.point(np.cos(t) * p + np.sin(t) * (u / t))

    def log(self, p, q):
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        c = float(np.clip(p @ q, -1.0, 1.0))
        if c <= -1.0 + 1e-12:
            raise ValueError("no unique minimizing geodesic between antipodal points")
        w = q - c * p
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return np.zeros_like(p)
        # arctan2 stays accurate for nearby points where arccos loses digits
        return np.arctan2(nw, c) * (w / nw)

    def dist(self, p, q):
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        return float(2.0 * np.arctan2(np.linalg.norm(p - q), np.linalg.norm(p + q)))

    def transport(self, p, q, u):
        v = self.log(p, q)
        theta = np.linalg.norm(v)
        u = np.asarray(u, dtype=float)
        if theta == 0.0:
            return u.copy()
        e = v / theta
        a = e @ u
        return u + (np.cos(theta) - 1.0) * a * e - np.sin(theta) * a * np.asarray(p)

    def tangent_basis(self, p):
        p = np.asarray(p, dtype=float)
        cols = []
        # Standard basis vectors least aligned with p go first.
        for i in np.argsort(np.abs(p), kind="stable"):
            v = np.zeros(self.n)
            v[i] = 1.0
            for _ in range(2):
                v = v - (p @ v) * p
                for c in cols:
                    v = v - (c @ v) * c
            nv = np.linalg.norm(v)
            if nv < 1e-3:
                continue
            cols.append(v / nv)
            if len(cols) == self.dim:
                break
        columns = np.column_stack([_fix_sign(c) for c in cols])
        return TangentBasis(p, columns)

    def egrad2rgrad(self, p, egrad):
        return self.proj(p, egrad)

    def ehess2rhess(self, p, egrad, ehess_v, v):
        p = np.asarray(p, dtype=float)
        return self.proj(p, ehess_v) - (p @ np.asarray(egrad)) * np.asarray(v, dtype=float)

    def random_point(self, rng):
        return self.point(rng.standard_normal(self.n))


class Product(Manifold):
    """Cartesian product; coordinates are the concatenation of the factors'."""

    kind = "product"

    def __init__(self, factors):
        factors = list(factors)
        if not factors:
            raise ValueError("product manifold needs at least one factor")
        self.factors = factors
        self.dim = sum(f.dim for f in factors)
        self.ambient_dim = sum(f.ambient_dim for f in factors)
        bounds = np.cumsum([0] + [f.ambient_dim for f in factors])
        self._slices = [slice(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]

    def __repr__(self):
        return "Product(" + ", ".join(repr(f) for f in self.factors) + ")"

    def __eq__(self, other):
        return isinstance(other, Product) and other.factors == self.factors

    def __hash__(self):
        return hash(("product", tuple(self.factors)))

    def split(self, u):
        u = np.asarray(u, dtype=float)
        return [u[s] for s in self._slices]

    def _map(self, name, *arrays):
        parts = zip(*(self.split(a) for a in arrays))
        return np.concatenate([getattr(f, name)(*args) for f, args in zip(self.factors, parts)])

    def check_point(self, p):
        p = Manifold.check_point(self, p)
        for f, part in zip(self.factors, self.split(p)):
            f.check_point(part)
        return p

    def proj(self, p, u):
        return self._map("proj", p, u)

    def retract(self, p, u):
        return self._map("retract", p, u)

    def transport(self, p, q, u):
        return self._map("transport", p, q, u)

    def dist(self, p, q):
        return float(np.sqrt(sum(
            f.dist(a, b) ** 2 for f, a, b in zip(self.factors, self.split(p), self.split(q))
        )))

    def tangent_basis(self, p):
        p = np.asarray(p, dtype=float)
        cols = np.zeros((self.ambient_dim, self.dim))
        j = 0
        for f, s, part in zip(self.factors, self._slices, self.split(p)):
            b = f.tangent_basis(part).columns
            cols[s, j:j + f.dim] = b
            j += f.dim
        return TangentBasis(p, cols)

    def egrad2rgrad(self, p, egrad):
        return self._map("egrad2rgrad", p, egrad)

    def ehess2rhess(self, p, egrad, ehess_v, v):
        return self._map("ehess2rhess", p, egrad, ehess_v, v)

    def random_point(self, rng):
        return np.concatenate([f.random_point(rng) for f in self.factors])


def _fix_sign(v):
    nz = np.flatnonzero(np.abs(v) > 1e-14)
    if nz.size and v[nz[0]] < 0:
        return -v
    return v

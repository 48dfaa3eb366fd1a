"""Constrained problems on manifolds, Lagrangian calculus and built-in test problems.

A problem is ``min f(x)`` over a manifold subject to ``g_i(x) >= 0`` and
``h_j(x) = 0``. Each function is a :class:`SmoothFunction` carrying its
value, Riemannian gradient and Riemannian Hessian-vector product.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .manifold import Euclidean, Manifold, Product, Sphere

__all__ = [
    "SmoothFunction",
    "ConstrainedProblem",
    "PrimalDualPoint",
    "ReferenceSolution",
    "Polynomial",
    "lagrangian_grad",
    "lagrangian_hess_vec",
    "active_set",
    "builtin_problem",
    "load_problem",
    "BUILTIN_NAMES",
]


@dataclass(frozen=True)
class SmoothFunction:
    """Value, Riemannian gradient and Riemannian Hessian-vector oracles."""

    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    hess_vec: Callable[[np.ndarray, np.ndarray], np.ndarray]

    @classmethod
    def from_euclidean(cls, manifold: Manifold, value, egrad, ehess_vec):
        """Wrap ambient derivatives of a smooth extension into Riemannian oracles."""

        def grad(x):
            return manifold.egrad2rgrad(x, egrad(x))

        def hess_vec(x, v):
            return manifold.ehess2rhess(x, egrad(x), ehess_vec(x, v), v)

        return cls(lambda x: float(value(x)), grad, hess_vec)


@dataclass(frozen=True)
class PrimalDualPoint:
    """Primal-dual iterate ``(x, y, z)``.

    ``y`` holds the inequality multipliers and ``z`` the equality ones.
    """

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float).copy())
        object.__setattr__(self, "y", np.atleast_1d(np.asarray(self.y, dtype=float)).copy())
        object.__setattr__(self, "z", np.atleast_1d(np.asarray(self.z, dtype=float)).copy())

    def replace(self, x=None, y=None, z=None) -> "PrimalDualPoint":
        return PrimalDualPoint(
            self.x if x is None else x,
            self.y if y is None else y,
            self.z if z is None else z,
        )

    def is_interior(self, problem: "ConstrainedProblem") -> bool:
        """Strict feasibility: ``g(x) > 0`` and ``y > 0`` componentwise."""
        return bool(np.all(problem.g(self.x) > 0) and np.all(self.y > 0))


@dataclass(frozen=True)
class ReferenceSolution:
    x_star: np.ndarray
    y_star: np.ndarray
    z_star: np.ndarray
    provenance: str = ""

    @property
    def point(self) -> PrimalDualPoint:
        return PrimalDualPoint(self.x_star, self.y_star, self.z_star)


@dataclass
class ConstrainedProblem:
    """``min f(x)`` on ``manifold`` s.t. ``g_i(x) >= 0``, ``h_j(x) = 0``."""

    manifold: Manifold
    objective: SmoothFunction
    inequalities: Sequence[SmoothFunction] = ()
    equalities: Sequence[SmoothFunction] = ()
    name: str = "problem"
    initial: PrimalDualPoint | None = None
    reference: ReferenceSolution | None = None
    sampler: Callable[[np.random.Generator], np.ndarray] | None = field(default=None, repr=False)

    def __post_init__(self):
        self.inequalities = tuple(self.inequalities)
        self.equalities = tuple(self.equalities)

    @property
    def m(self) -> int:
        return len(self.inequalities)

    @property
    def p(self) -> int:
        return len(self.equalities)

    def f(self, x) -> float:
        return self.objective.value(x)

    def g(self, x) -> np.ndarray:
        return np.array([c.value(x) for c in self.inequalities], dtype=float)

    def h(self, x) -> np.ndarray:
        return np.array([c.value(x) for c in self.equalities], dtype=float)

    def ineq_grads(self, x) -> np.ndarray:
        """Gradients of ``g_i`` as columns, shape ``(ambient_dim, m)``."""
        return _stack([c.grad(x) for c in self.inequalities], self.manifold.ambient_dim)

    def eq_grads(self, x) -> np.ndarray:
        return _stack([c.grad(x) for c in self.equalities], self.manifold.ambient_dim)

    def check_multipliers(self, w: PrimalDualPoint):
        if w.y.shape != (self.m,):
            raise ValueError(f"y has shape {w.y.shape}, problem has m={self.m}")
        if w.z.shape != (self.p,):
            raise ValueError(f"z has shape {w.z.shape}, problem has p={self.p}")

    def sample_interior(self, rng: np.random.Generator, max_tries: int = 10_000) -> np.ndarray:
        """Random point with ``g(x) > 0``, by the problem's sampler or rejection."""
        for _ in range(max_tries):
            x = self.sampler(rng) if self.sampler is not None else self.manifold.random_point(rng)
            if self.m == 0 or np.all(self.g(x) > 0):
                return x
        raise RuntimeError(f"no strictly feasible sample found for {self.name}")


def _stack(cols, n):
    if not cols:
        return np.zeros((n, 0))
    return np.column_stack(cols)


def lagrangian_grad(problem: ConstrainedProblem, w: PrimalDualPoint) -> np.ndarray:
    """``grad f - sum y_i grad g_i + sum z_j grad h_j`` at ``w.x``."""
    problem.check_multipliers(w)
    x = w.x
    out = np.array(problem.objective.grad(x), dtype=float)
    for yi, c in zip(w.y, problem.inequalities):
        out -= yi * c.grad(x)
    for zj, c in zip(w.z, problem.equalities):
        out += zj * c.grad(x)
    return out


def lagrangian_hess_vec(problem: ConstrainedProblem, w: PrimalDualPoint, v) -> np.ndarray:
    problem.check_multipliers(w)
    x = w.x
    v = problem.manifold.check_tangent(x, v)
    out = np.array(problem.objective.hess_vec(x, v), dtype=float)
    for yi, c in zip(w.y, problem.inequalities):
        out -= yi * c.hess_vec(x, v)
    for zj, c in zip(w.z, problem.equalities):
        out += zj * c.hess_vec(x, v)
    return out


def active_set(problem: ConstrainedProblem, x, tol: float) -> list[int]:
    """Indices ``i`` with ``g_i(x) <= tol``."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    return [int(i) for i in np.flatnonzero(problem.g(x) <= tol)]


# ---------------------------------------------------------------------------
# Polynomials (used by the problem-file loader and the Euclidean test problems)
# ---------------------------------------------------------------------------
class Polynomial:
    """Sparse polynomial ``sum_t c_t prod_i x_i^{k_{t,i}}`` with exact derivatives."""

    def __init__(self, coefs, powers):
        self.coefs = np.asarray(coefs, dtype=float).reshape(-1)
        self.powers = np.asarray(powers, dtype=int).reshape(len(self.coefs), -1)
        if np.any(self.powers < 0):
            raise ValueError("polynomial exponents must be nonnegative")
        self.n = self.powers.shape[1]

    @classmethod
    def from_terms(cls, terms, n):
        if not terms:
            return cls(np.zeros(0), np.zeros((0, n), dtype=int))
        coefs = [float(t["coef"]) for t in terms]
        powers = [list(t["powers"]) for t in terms]
        for pw in powers:
            if len(pw) != n:
                raise ValueError(f"term exponent list {pw} does not have length {n}")
        return cls(coefs, powers)

    @staticmethod
    def _pow(x, k):
        # x**0 == 1 even at x == 0; negative exponents are clamped to zero terms
        return np.where(k >= 0, np.power(x, np.maximum(k, 0)), 0.0)

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(np.sum(self.coefs * np.prod(self._pow(x, self.powers), axis=1)))

    def grad(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(self.n)
        for i in range(self.n):
            k = self.powers.copy()
            lead = k[:, i].astype(float)
            k[:, i] -= 1
            out[i] = np.sum(self.coefs * lead * np.prod(self._pow(x, k), axis=1))
        return out

    def hessian(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        hess = np.zeros((self.n, self.n))
        for i in range(self.n):
            for j in range(i, self.n):
                k = self.powers.copy()
                lead = k[:, i].astype(float)
                k[:, i] -= 1
                lead = lead * np.where(k[:, j] > 0, k[:, j], 0).astype(float)
                k[:, j] -= 1
                hess[i, j] = hess[j, i] = np.sum(self.coefs * lead * np.prod(self._pow(x, k), axis=1))
        return hess

    def hess_vec(self, x, v) -> np.ndarray:
        return self.hessian(x) @ np.asarray(v, dtype=float)

    def as_function(self, manifold: Manifold) -> SmoothFunction:
        return SmoothFunction.from_euclidean(manifold, self.value, self.grad, self.hess_vec)


# ---------------------------------------------------------------------------
# Built-in problems
# ---------------------------------------------------------------------------
def _linear(manifold, a, b=0.0):
    """``<a, x> + b`` as a function on ``manifold``."""
    a = np.asarray(a, dtype=float)
    zero = np.zeros_like(a)
    return SmoothFunction.from_euclidean(
        manifold, lambda x: a @ x + b, lambda x: a, lambda x, v: zero
    )


def _t1():
    man = Euclidean(1)
    f = _linear(man, [1.0])
    g = _linear(man, [1.0])
    ref = ReferenceSolution(np.array([0.0]), np.array([1.0]), np.zeros(0), "hand KKT solve")
    return ConstrainedProblem(
        man, f, [g], [], name="T1",
        initial=PrimalDualPoint([0.8], [1.2], []),
        reference=ref,
        sampler=lambda rng: rng.uniform(0.05, 2.0, size=1),
    )


def _sphere_arc(rng, lo):
    t = rng.uniform(-np.arccos(lo) + 0.05, np.arccos(lo) - 0.05)
    return np.array([np.cos(t), np.sin(t)])


def _t2():
    man = Sphere(2)
    f = _linear(man, [0.0, 1.0])
    g = _linear(man, [1.0, 0.0], -0.5)
    ref = ReferenceSolution(
        np.array([0.5, -np.sqrt(3.0) / 2.0]),
        np.array([1.0 / np.sqrt(3.0)]),
        np.zeros(0),
        "tangent-projection algebra: P e2 = y P e1 at x*",
    )
    return ConstrainedProblem(
        man, f, [g], [], name="T2",
        initial=PrimalDualPoint(man.point([1.0, -1.0]), [1.0], []),
        reference=ref,
        sampler=lambda rng: _sphere_arc(rng, 0.5),
    )


def _t3():
    man = Euclidean(2)
    f = SmoothFunction.from_euclidean(
        man, lambda x: 0.5 * x @ x, lambda x: np.array(x, dtype=float), lambda x, v: np.array(v, dtype=float)
    )
    g = _linear(man, [1.0, 0.0])
    h = _linear(man, [1.0, 1.0], -1.0)
    ref = ReferenceSolution(np.array([0.5, 0.5]), np.array([0.0]), np.array([-0.5]), "linear KKT system")
    return ConstrainedProblem(
        man, f, [g], [h], name="T3",
        initial=PrimalDualPoint([0.6, 0.2], [1.0], [0.0]),
        reference=ref,
        sampler=lambda rng: np.array([rng.uniform(0.05, 2.0), rng.normal()]),
    )


def _t4():
    # T2 with the inequality moved onto a slack variable s:
    #   min a_2  s.t.  s >= 0,  a_1 - 1/2 - s = 0,  (a, s) in S^1 x R
    man = Product([Sphere(2), Euclidean(1)])
    f = _linear(man, [0.0, 1.0, 0.0])
    g = _linear(man, [0.0, 0.0, 1.0])
    h = _linear(man, [1.0, 0.0, -1.0], -0.5)
    ys = 1.0 / np.sqrt(3.0)
    ref = ReferenceSolution(
        np.array([0.5, -np.sqrt(3.0) / 2.0, 0.0]),
        np.array([ys]),
        np.array([-ys]),
        "T2 solution with s* = 0, z* = -y*",
    )
    a0 = Sphere(2).point([1.0, -1.0])
    return ConstrainedProblem(
        man, f, [g], [h], name="T4",
        initial=PrimalDualPoint(np.r_[a0, 0.2], [1.0], [0.0]),
        reference=ref,
        sampler=lambda rng: np.r_[_sphere_arc(rng, 0.0), rng.uniform(0.05, 2.0)],
    )


_BUILTINS = {"T1": _t1, "T2": _t2, "T3": _t3, "T4": _t4}
BUILTIN_NAMES = tuple(_BUILTINS)


def builtin_problem(name: str) -> tuple[ConstrainedProblem, ReferenceSolution]:
    """Return one of the shipped test problems with its reference solution."""
    try:
        prob = _BUILTINS[name]()
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; choose from {', '.join(BUILTIN_NAMES)}") from None
    return prob, prob.reference


def load_problem(path) -> ConstrainedProblem:
    """Load a polynomial problem on ``R^n`` from a JSON problem file.

    Schema::

        {
          "name": "my-problem",                  # optional
          "dimension": n,
          "objective":   {"terms": [{"coef": c, "powers": [k_1, ..., k_n]}, ...]},
          "inequalities": [{"terms": [...]}, ...],   # g_i(x) >= 0, optional
          "equalities":   [{"terms": [...]}, ...],   # h_j(x) = 0, optional
          "initial":   {"x": [...], "y": [...], "z": [...]},   # optional
          "reference": {"x": [...], "y": [...], "z": [...]}    # optional
        }

    Each term contributes ``coef * prod_i x_i ** powers[i]``.
    """
    path = Path(path)
    spec = json.loads(path.read_text())
    return problem_from_dict(spec, default_name=path.stem)


def problem_from_dict(spec: dict, default_name: str = "file-problem") -> ConstrainedProblem:
    try:
        n = int(spec["dimension"])
        obj_terms = spec["objective"]["terms"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"problem file is missing required field: {exc}") from None
    man = Euclidean(n)
    f = Polynomial.from_terms(obj_terms, n).as_function(man)
    ineq = [Polynomial.from_terms(c["terms"], n).as_function(man) for c in spec.get("inequalities", [])]
    eq = [Polynomial.from_terms(c["terms"], n).as_function(man) for c in spec.get("equalities", [])]

    def _pd(block):
        if block is None:
            return None
        return PrimalDualPoint(block["x"], block.get("y", []), block.get("z", []))

    initial = _pd(spec.get("initial"))
    ref_block = spec.get("reference")
    reference = None
    if ref_block is not None:
        reference = ReferenceSolution(
            np.asarray(ref_block["x"], dtype=float),
            np.asarray(ref_block.get("y", []), dtype=float).reshape(-1),
            np.asarray(ref_block.get("z", []), dtype=float).reshape(-1),
            "problem file",
        )
    prob = ConstrainedProblem(man, f, ineq, eq, name=spec.get("name", default_name),
                              initial=initial, reference=reference)
    for w in (initial, reference.point if reference else None):
        if w is not None:
            if w.x.shape != (n,):
                raise ValueError("point in problem file has wrong dimension")
            prob.check_multipliers(w)
    return prob

"""Riemannian interior point methods with Newton extrapolation.

The outer loop drives a barrier parameter to zero superlinearly and, once
close to a regular KKT point, advances with a single Newton step on the
barrier KKT field per outer iteration. Two inner solvers are provided: a
damped Newton iteration (:func:`outer_solve`) and an exact trust-region
iteration for inequality-only problems (:func:`riptrm_solve`).
"""
from .diagnostics import (
    FDReport,
    RateReport,
    RegularityReport,
    ScheduleReport,
    convergence_order,
    fd_validate,
    regularity_check,
    schedule_check,
)
from .exceptions import (
    InnerStalled,
    NearSingularJacobian,
    NonpositiveConstraint,
    NotApproximatelyKKT,
    NotInterior,
)
from .kkt import assemble_jacobian, barrier_kkt, extrapolate, kkt_residual, newton_step
from .manifold import Euclidean, Manifold, Product, Sphere, TangentBasis
from .problem import (
    BUILTIN_NAMES,
    ConstrainedProblem,
    Polynomial,
    PrimalDualPoint,
    ReferenceSolution,
    SmoothFunction,
    active_set,
    builtin_problem,
    load_problem,
)
from .ripm import (
    BarrierSchedule,
    ForcingFunctions,
    IterationTrace,
    OuterConfig,
    SolveReport,
    barrier_update,
    inner_fallback,
    outer_solve,
    stopping_check,
)
from .riptrm import (
    TrustRegionSettings,
    condensed_hessian,
    newton_equivalence_check,
    riptrm_solve,
    sosp_check,
    y_step,
)
from .trs import TRSSolution, solve_trs_exact

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

"""
Trust-region inner iteration
============================

For inequality-only problems the inner step can instead come from an exact
trust-region subproblem built from the condensed Hessian. When the
subproblem solution is strictly inside the region it coincides with the
Newton step on the barrier field.
"""

import numpy as np

from riemipm import PrimalDualPoint, builtin_problem, newton_equivalence_check, riptrm_solve, solve_trs_exact

prob, ref = builtin_problem("T2")
w = PrimalDualPoint(prob.manifold.point([0.7, -0.6]), [0.8], [])
eq = newton_equivalence_check(prob, w, mu=0.05, delta=10.0)
print("interior TRS step vs Newton step: dx diff", eq.dx_diff, " dy diff", eq.dy_diff)

# %%
# The subproblem solver handles the hard case: here ``psi`` has no
# component along the negative-curvature direction.

sol = solve_trs_exact(np.diag([-1.0, 1.0]), np.array([0.0, 1.0]), 1.0)
print("hard case:", sol.hard_case, "nu =", sol.nu, "d =", sol.d)

# %%
# Full solve. The trace carries the radius, the subproblem multiplier and
# the smallest eigenvalue of the condensed Hessian.

report = riptrm_solve(prob)
print(report.status)
for row in report.trace:
    print(f"k={row.k} mu={row.mu:.2e} inner={row.inner_iters} delta={row.delta} "
          f"nu={row.nu:.1e} lambda_min={row.lambda_min:.3e} err={row.err_to_ref:.1e}")

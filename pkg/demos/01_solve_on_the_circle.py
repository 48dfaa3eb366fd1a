"""
Minimizing height on a circle with a half-plane constraint
==========================================================

We minimize ``x_2`` over the unit circle subject to ``x_1 >= 1/2``. The
unconstrained minimizer ``(0, -1)`` is cut off, so the solution sits on
the constraint boundary at ``(1/2, -sqrt(3)/2)`` with multiplier
``1/sqrt(3)``.
"""

import numpy as np

from riemipm import OuterConfig, builtin_problem, kkt_residual, outer_solve

prob, ref = builtin_problem("T2")
print(prob.manifold, "m =", prob.m, "p =", prob.p)
print("start:", prob.initial.x, "y =", prob.initial.y)

# %%
# Solve with the default schedule ``mu_{k+1} = 0.5 mu_k^1.9`` starting at 0.1.

report = outer_solve(prob, config=OuterConfig())
print(report.status, "after", len(report.trace), "outer iterations")
print("x =", report.point.x, " y =", report.point.y)
print("distance to reference:", np.linalg.norm(report.point.x - ref.x_star))
print("KKT residual:", kkt_residual(prob, report.point))

# %%
# Each trace row is one outer iteration. The barrier parameter collapses
# superlinearly and the error follows it.

print(f"{'k':>2} {'mu':>10} {'inner':>5} {'error':>10}")
for row in report.trace:
    print(f"{row.k:>2} {row.mu:>10.2e} {row.inner_iters:>5} {row.err_to_ref:>10.2e}")

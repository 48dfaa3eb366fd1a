"""
One Newton step per barrier parameter
=====================================

On ``min x s.t. x >= 0`` the central path is ``(x, y) = (mu, 1)``. Because
the barrier field is bilinear there, a single Newton step from one point
of the path lands exactly on the next, whatever the new parameter.
"""

from riemipm import PrimalDualPoint, barrier_kkt, builtin_problem, extrapolate

prob, _ = builtin_problem("T1")

for mu0, mu1 in [(0.5, 0.25), (0.1, 0.01), (0.1, 1e-6)]:
    w = extrapolate(prob, PrimalDualPoint([mu0], [1.0], []), mu1)
    print(f"({mu0}, 1) -> target {mu1}: x = {w.x[0]:.3e}, y = {w.y[0]:.15f}, "
          f"|F| = {barrier_kkt(prob, w, mu1).norm():.1e}")

# %%
# On a curved problem the step is no longer exact, but the extrapolated
# point is already close enough that the barrier stopping tests pass once
# the iterates are near the solution. A gentler schedule (smaller theta)
# makes that visible: the tail of the run needs no inner iterations.

from riemipm import BarrierSchedule, OuterConfig, outer_solve

prob2, _ = builtin_problem("T2")
for theta in (0.3, 0.5, 0.9):
    cfg = OuterConfig(schedule=BarrierSchedule(mu0=0.1, kappa=0.5, theta=theta))
    rep = outer_solve(prob2, config=cfg)
    print(f"theta={theta}: inner iterations per outer step {[t.inner_iters for t in rep.trace]}")

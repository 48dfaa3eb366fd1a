"""
Measuring the convergence order
===============================

The fitted order ``log(e_{k+1}/e_k) / log(e_k/e_{k-1})`` approaches
``1 + theta`` for the schedule ``mu_{k+1} = kappa mu_k^(1 + theta)``.
We also check the regularity conditions at the computed solution.
"""

from riemipm import (
    BarrierSchedule,
    OuterConfig,
    builtin_problem,
    convergence_order,
    outer_solve,
    regularity_check,
    schedule_check,
)

prob, ref = builtin_problem("T4")
for theta in (0.5, 0.9):
    cfg = OuterConfig(schedule=BarrierSchedule(mu0=0.1, kappa=0.5, theta=theta))
    rep = outer_solve(prob, config=cfg)
    rr = convergence_order(rep.errors)
    print(f"theta={theta}: {len(rep.trace)} outer iterations, fitted orders {rr.orders.round(3)}")
    print("   e_k / mu_k:", (rep.errors / rep.mus).round(3))

# %%
# The schedule itself is checked in log space, since ``mu_k`` underflows
# after a handful of steps.

for theta in (0.5, 0.9):
    sc = schedule_check(BarrierSchedule(mu0=0.1, kappa=0.5, theta=theta), steps=20)
    print(f"theta={theta}: pass={sc.passed}, log10(mu_19) = {sc.final_log_mu / 2.302585:.1f}")

# %%
# LICQ, strict complementarity and second-order sufficiency at the reference.

reg = regularity_check(prob, ref.point)
print("LICQ", reg.licq, "\nSC", reg.sc, "\nSOSC", reg.sosc)

"""
Checking the learner against its own guarantees
===============================================

The scalar test family (losses (x - c_t)^2, constraints x <= d_t,
action set [0, 1]) has closed-form hindsight optima at every prefix, so
every explicit inequality the analysis promises can be checked with
exact comparators rather than estimates:

* prefix regret against the schedule-specific bound curve,
* the three per-run distance/violation inequalities,
* the composed squared-violation bound on a grid of horizons,
* and, for the t^-beta schedule, the fitted growth exponent of the
  squared-violation sum.

Run with:  python3 demos/verify_bounds_demo.py
"""

from cocobench.bounds import verify_synthetic1d
from cocobench.clasp import ConvexStepSchedule, StronglyConvexStepSchedule

T = 2 ** 12

print("=" * 70)
print("convex schedule  eta_t = t^(-1/2),  T = %d" % T)
print("=" * 70)
report = verify_synthetic1d(ConvexStepSchedule(0.5), T=T)
print(report)
print("-> all %d checks passed: %s" % (len(report.checks),
                                       report.all_passed))

print()
print("=" * 70)
print("strongly convex schedule  eta_t = 1/(2t),  T = %d" % T)
print("=" * 70)
report = verify_synthetic1d(StronglyConvexStepSchedule(2.0), T=T)
print(report)
print("-> all %d checks passed: %s" % (len(report.checks),
                                       report.all_passed))

print()
print("the same checks are available from the command line:")
print("  cocobench verify --problem synthetic-1d --rounds %d" % T)
print("  cocobench verify --problem synthetic-1d "
      "--schedule strongly-convex --rounds %d" % T)

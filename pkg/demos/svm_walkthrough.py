"""
Online margin classification walkthrough
========================================

The margin problem treats each labelled sample (u_t, v_t) as one
online round: the loss regularises the weight block, (1/2)||w||^2, and
the round's constraint demands the margin, v_t(w . u_t - b) >= 1.  The
action set is the ball of radius 70 sqrt(11) in R^12 (11 weights plus
the bias).

When the classes overlap, no fixed (w, b) satisfies every margin
constraint: the hindsight comparator does not exist, so regret is
undefined and the benchmark reports cumulative loss and the violation
sums instead.  This demo builds a small overlapping-class dataset in
the wine-file format, shows the loader, the infeasibility verdict, and
a short learning run.

With the real combined wine file (red + white, semicolon-separated,
6497 rows), point --dataset at it for the full-size benchmark.

Run with:  python3 demos/svm_walkthrough.py
"""

import tempfile
from pathlib import Path

import numpy as np

from cocobench.bounds import comparator_solve
from cocobench.clasp import ConstraintMode, ConvexStepSchedule
from cocobench.problems import WineSvmProblem, load_wine_dataset
from cocobench.runner import run_single_trial, trial_rng

HEADER = (
    '"fixed acidity";"volatile acidity";"citric acid";"residual sugar";'
    '"chlorides";"free sulfur dioxide";"total sulfur dioxide";"density";'
    '"pH";"sulphates";"alcohol";"quality"'
)

print("=" * 70)
print("1. Dataset format and ingestion")
print("=" * 70)

rng = np.random.default_rng(7)
lines = [HEADER]
for i in range(30):
    features = np.round(rng.uniform(0.0, 12.0, 11), 3)
    quality = int(rng.integers(3, 10))
    lines.append(";".join(str(v) for v in features) + ";%d" % quality)
# duplicate one row with a quality on the other side of the threshold:
# identical features, opposite labels -> provably overlapping classes
lines.append(lines[1].rsplit(";", 1)[0] + ";8")
lines.append(lines[1].rsplit(";", 1)[0] + ";3")

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "demo-wine.csv"
    path.write_text("\n".join(lines) + "\n")
    samples = load_wine_dataset(path)

print("parsed %d samples, %d features each" % (len(samples),
                                               samples[0][0].shape[0]))
labels = np.array([v for _, v in samples])
print("labels: %+d x %d, %+d x %d  (quality >= 7 is the positive class)"
      % (1, int(np.sum(labels == 1)), -1, int(np.sum(labels == -1))))
print("sulfur-dioxide columns are rescaled to the units the radius",
      "bound assumes; sample feature vector:")
print(np.round(samples[0][0], 4))

problem = WineSvmProblem(np.vstack([u for u, _ in samples]), labels)
print("action set: ball of radius %.4f = 70 sqrt(11)"
      % problem.action_set().radius)

print()
print("=" * 70)
print("2. The hindsight comparator does not exist here")
print("=" * 70)

rng = trial_rng(0, 0)
problem.init_action(rng)
rounds = list(problem.rounds(rng, 64))
result = comparator_solve(rounds, problem.action_set())
print("comparator feasible:", result.feasible,
      " (residual %s)" % ("inf" if result.residual == np.inf
                          else "%.3g" % result.residual))
print("-> regret is undefined; the benchmark reports cumulative loss")

print()
print("=" * 70)
print("3. A short online run")
print("=" * 70)

record = run_single_trial(problem, "clasp", ConvexStepSchedule(0.5),
                          ConstraintMode.TRANSIENT, T=200,
                          master_seed=0, trial_index=0)
for t in (50, 100, 150, 200):
    print("t=%3d   cum_loss %10.2f   ccv1 %8.3f   ccv2 %8.3f"
          % (t, record.cum_loss[t - 1], record.ccv1[t - 1],
             record.ccv2[t - 1]))
print("per-round margin constraints are enforced exactly: worst")
print("enforced-constraint value at the next action = %.2e"
      % float(np.max(record.next_violations)))

print()
print("command-line equivalents:")
print("  cocobench run    --problem svm --dataset wine.csv "
      "--rounds 1000 --trials 10 --out out/")
print("  cocobench verify --problem svm --dataset wine.csv --rounds 200")

"""A small version of the SCARA Monte-Carlo study.

Each trial perturbs the kinematics of the shipped SCARA model, generates a
training and a test trajectory from sums of sinusoids, labels them with the
perturbed robot, and scores every estimator on the test set.  The full study
(20 trials) is ``gipkernel monte-carlo --config src/gipkernel/configs/scara_benchmark.json``;
here two trials keep the runtime to a few minutes.

Run with ``python demos/03_scara_benchmark.py [out_dir]``.
"""

import sys

import numpy as np

from gipkernel.bench import ExperimentConfig, run_monte_carlo

out_dir = sys.argv[1] if len(sys.argv) > 1 else None
config = ExperimentConfig(trials=2, estimators=["FE", "PP", "SP", "RBF", "GIP"], out_dir=out_dir)
result = run_monte_carlo(config)

# %%
# Median nMSE per joint.  Joint 3 is the prismatic axis.

print(f"{'':>4s}" + "".join(f"{'joint ' + str(j):>11s}" for j in range(1, 5)) + f"{'GMSE':>11s}")
for name in config.estimators:
    per_joint = [np.median(result.values(name, joint=j)) for j in range(1, 5)]
    total = np.median(result.values(name, "gmse", joint=1))
    print(f"{name:>4s}" + "".join(f"{v:11.2e}" for v in per_joint) + f"{total:11.2e}")

# %%
# Every record carries the seeds that reproduce it.

first = result.records[0]
print("first record:", {k: first[k] for k in ("trial", "estimator", "joint", "trial_seeds", "seconds")})
if out_dir:
    print("wrote", out_dir + "/monte_carlo.csv and monte_carlo_summary.json")

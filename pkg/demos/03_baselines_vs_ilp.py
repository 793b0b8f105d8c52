"""Compare the optimizer against canary cohorts and interpolated scores.

All three methods see the same catalog and the same login trace.
"""
import numpy as np

from rollout import RunConfig, run

SEEDS = range(3)
print("method     upsilon    pi       z     mean utility std")
for method in ("ilp", "cand", "irf"):
    reports = [run(RunConfig(method=method, seed=s)) for s in SEEDS]
    ups = np.mean([r.metrics["upsilon"] for r in reports])
    pi = np.mean([r.metrics["pi"] for r in reports])
    z = np.mean([r.metrics["z"] for r in reports])
    std = np.mean([np.mean(r.metrics["utility"]["std"]) for r in reports])
    print(f"{method:8s} {ups:8.3f} {pi:8.3f} {z:7.3f} {std:12.3f}")

# Canary cohorts move exposure in lumps when a frequent visitor switches,
# and leave customers who have not switched yet on stale slates.

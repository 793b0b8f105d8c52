"""Longer rollouts make each step cheaper for producers."""
from rollout import RunConfig
from rollout.runner import sweep

result = sweep(RunConfig(), etas=[1, 2, 5, 10], seeds=range(5))
print("eta   upsilon    pi      z")
for row in result["mean"]:
    z = "-" if row["z"] is None else f"{row['z']:.3f}"
    print(f"{row['eta']:3d}   {row['upsilon']:7.3f}  {row['pi']:6.3f}  {z}")

"""Walk one slate-optimizing rollout step by step.

Each step reports the exposure change from the previous step, and the
utility customers saw relative to their best possible slate.
"""
from rollout import RunConfig, run

report = run(RunConfig(n_customers=100, n_items=20, k=10, eta=10, seed=0))
m = report.metrics
u = m["utility"]

print(f"direct change EC(0, eta) = {m['ec_immediate']:.3f}")
print("step   EC(i-1,i)  mean util  min util")
for i, ec in enumerate(m["step_ec"], start=1):
    mean = u["mean"][i - 1]
    low = u["min"][i - 1]
    print(f"{i:4d}   {ec:9.4f}  {mean:9.3f}  {low:8.3f}")

print(f"\npath length {m['upsilon']:.3f}, max step cost {m['pi']:.3f}, evenness {m['z']:.3f}")
if report.flags:
    print("flags:", ", ".join(report.flags))

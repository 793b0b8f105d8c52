"""How much would producer exposure move if we swapped models overnight?

Serves the warm-up logins once with each model and compares the resulting
exposure distributions.
"""
from rollout import RunConfig
from rollout.runner import immediate_impact

config = RunConfig(n_customers=100, n_items=20, k=10, seed=0)
out = immediate_impact(config)

print(f"warm-up logins: {out['arrivals']}")
print(f"exposure change of an instant switch: {out['ec']:.3f} (max 2)")
for bucket, share in out["histogram"].items():
    print(f"  items with {bucket:>8} relative change: {share:6.1%}")

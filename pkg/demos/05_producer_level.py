"""Steer exposure per producer instead of per item.

Items are grouped into five producers. The producer objective only tracks
how much each producer receives, so exposure can shift freely between items
of the same producer: the producer-level step cost stays low while the
item-level one grows.
"""
from rollout import RunConfig, run

base = dict(n_customers=100, n_items=40, k=5, eta=5, n_producers=5, seed=1)
for producer_level in (False, True):
    report = run(RunConfig(producer_level=producer_level, prefilter=True, **base))
    p = report.metrics["producer"]
    mean_util = sum(report.metrics["utility"]["mean"]) / base["eta"]
    label = "producer objective" if producer_level else "item objective"
    print(f"{label:18s}: producer pi {p['pi']:.3f}, item pi {report.metrics['pi']:.3f}, "
          f"mean utility {mean_util:.3f}")

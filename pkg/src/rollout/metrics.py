"""Producer-side transition metrics and customer utility statistics.

All producer metrics are built from the per-step exposure changes
``EC(i-1, i)`` and the direct change ``EC(0, eta)``:

* path length: total step change relative to the direct change
* max transition cost: largest step change relative to the direct change
* transition inequality: base-10 entropy of the step changes' shares
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class DegenerateRunError(ValueError):
    """A metric's denominator is zero, so the metric is undefined."""


@dataclass
class StepSeries:
    step_ec: list
    ec_immediate: float
    utility: list = field(default_factory=list)

    def __post_init__(self):
        self.step_ec = [float(x) for x in self.step_ec]
        if any(x < 0 for x in self.step_ec) or self.ec_immediate < 0:
            raise ValueError("exposure changes must be non-negative")


def path_length(series: StepSeries) -> float:
    if series.ec_immediate <= 0:
        raise DegenerateRunError("direct exposure change is zero")
    return math.fsum(series.step_ec) / series.ec_immediate


def max_transition_cost(series: StepSeries) -> float:
    if series.ec_immediate <= 0:
        raise DegenerateRunError("direct exposure change is zero")
    return max(series.step_ec) / series.ec_immediate


def transition_inequality(series: StepSeries) -> float:
    total = math.fsum(series.step_ec)
    if total <= 0:
        raise DegenerateRunError("no exposure change across the steps")
    z = 0.0
    for ec in series.step_ec:
        if ec > 0:
            p = ec / total
            z -= p * math.log10(p)
    return z


def utility_stats(samples) -> dict:
    """Population mean, std and min of each step's utility samples.

    Steps without samples come back as ``None`` rather than zero.
    """
    mean, std, low = [], [], []
    for step in samples:
        arr = np.asarray(step, dtype=float)
        if arr.size == 0:
            mean.append(None)
            std.append(None)
            low.append(None)
            continue
        mean.append(float(arr.mean()))
        std.append(float(arr.std()))
        low.append(float(arr.min()))
    return {"mean": mean, "std": std, "min": low}


def metrics_block(series: StepSeries) -> dict:
    """Metrics dictionary for the run report; undefined metrics are ``None``."""
    out = {}
    for name, fn in (("upsilon", path_length), ("pi", max_transition_cost), ("z", transition_inequality)):
        try:
            out[name] = fn(series)
        except DegenerateRunError:
            out[name] = None
    out["ec_immediate"] = series.ec_immediate
    out["step_ec"] = list(series.step_ec)
    out["utility"] = utility_stats(series.utility)
    return out

"""Reference rollout strategies: canary cohorts and interpolated relevance."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .catalog import Recommendation, top_k


@dataclass(frozen=True)
class CanaryAssignment:
    """``switch_step[u]`` is the first step (1..eta) in which ``u`` sees the new model."""

    switch_step: np.ndarray
    eta: int

    def switched(self, step: int) -> np.ndarray:
        return self.switch_step <= step


def cand_assign(customers, eta: int, seed) -> CanaryAssignment:
    """Shuffle customers into ``eta`` cohorts whose sizes differ by at most one.

    ``customers`` is either a count or a sequence of customer indices.
    """
    if eta < 1:
        raise ValueError("eta must be >= 1")
    n = customers if isinstance(customers, (int, np.integer)) else len(customers)
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    switch = np.empty(n, dtype=np.intp)
    for step, cohort in enumerate(np.array_split(order, eta), start=1):
        switch[cohort] = step
    return CanaryAssignment(switch, eta)


def cand_recommend(u: int, current_step: int, assignment: CanaryAssignment, pair, k: int) -> Recommendation:
    """Top-k under the new model once ``u``'s cohort has switched, else the old one."""
    if current_step >= assignment.switch_step[u]:
        scores = pair.v_new[u]
    else:
        scores = pair.v_old[u]
    return Recommendation(u, top_k(scores, k).tolist())


def irf_relevance(pair, i: int, eta: int) -> np.ndarray:
    """Relevance interpolated ``i/eta`` of the way from the old to the new model."""
    if eta < 1 or not 0 <= i <= eta:
        raise ValueError(f"step {i} outside 0..{eta}")
    if i == 0:
        return pair.v_old.copy()
    if i == eta:
        return pair.v_new.copy()
    w = i / eta
    return (1 - w) * pair.v_old + w * pair.v_new


def irf_recommend(u: int, current_step: int, pair, k: int, eta: int) -> Recommendation:
    if current_step == eta:
        row = pair.v_new[u]
    elif current_step == 0:
        row = pair.v_old[u]
    else:
        w = current_step / eta
        row = (1 - w) * pair.v_old[u] + w * pair.v_new[u]
    return Recommendation(u, top_k(row, k).tolist())

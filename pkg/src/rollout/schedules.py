"""Per-step exposure targets and utility floors for an ``eta``-step rollout."""
from __future__ import annotations

import numpy as np

from .catalog import top_k
from .exposure import Distribution, EmptyWindowError, ExposureLedger

ESTIMATED = "estimated"
PRESERVING = "preserving"
LINEAR = "linear"
GEOMETRIC = "geometric"


def _check_step(i: int, eta: int) -> None:
    if eta < 1:
        raise ValueError("eta must be >= 1")
    if not 1 <= i <= eta:
        raise ValueError(f"step {i} outside 1..{eta}")


def theta_linear(i: int, eta: int) -> float:
    _check_step(i, eta)
    return i / eta


def theta_geometric(i: int, eta: int) -> float:
    """Floor that halves the remaining gap to 1 every step; the last step is 1."""
    _check_step(i, eta)
    if i == eta:
        return 1.0
    return 1.0 - 2.0 ** -i


THETA_SCHEDULES = {LINEAR: theta_linear, GEOMETRIC: theta_geometric}


def predict_final_distribution(pair, warmup_customers, k: int) -> Distribution:
    """Exposure the warm-up arrivals would have produced under the new model."""
    warmup_customers = np.asarray(warmup_customers, dtype=np.intp)
    if warmup_customers.size == 0:
        raise EmptyWindowError("warm-up window has no arrivals")
    ledger = ExposureLedger(pair.shape[1], k)
    for u in warmup_customers:
        ledger.record(top_k(pair.v_new[u], k))
    return ledger.distribution()


def estimated_targets(d0: Distribution, dpred: Distribution, eta: int) -> list:
    """Equal straight-line steps from ``d0`` to ``dpred``; the last target is ``dpred``."""
    if eta < 1:
        raise ValueError("eta must be >= 1")
    if len(d0) != len(dpred):
        raise ValueError("d0 and dpred cover different item sets")
    delta = (dpred.mass - d0.mass) / eta
    targets = [Distribution(d0.mass + i * delta) for i in range(1, eta)]
    targets.append(Distribution(dpred.mass.copy()))
    return targets


def preserving_target(previous_observed: Distribution) -> Distribution:
    return previous_observed


class RolloutPlan:
    """Targets and floors for steps ``1..eta``.

    Estimated plans know every target up front. Preserving plans are filled
    one step at a time with the previous step's observed distribution.
    """

    def __init__(self, eta: int, targets_mode: str, theta_mode: str, estimated=None):
        if eta < 1:
            raise ValueError("eta must be >= 1")
        if targets_mode not in (ESTIMATED, PRESERVING):
            raise ValueError(f"unknown targets mode {targets_mode!r}")
        if theta_mode not in THETA_SCHEDULES:
            raise ValueError(f"unknown theta mode {theta_mode!r}")
        self.eta = eta
        self.targets_mode = targets_mode
        self.theta_mode = theta_mode
        self.theta = [THETA_SCHEDULES[theta_mode](i, eta) for i in range(1, eta + 1)]
        self._targets = {}
        if targets_mode == ESTIMATED:
            if estimated is None or len(estimated) != eta:
                raise ValueError("estimated plans need exactly eta targets")
            self._targets = {i: d for i, d in enumerate(estimated, start=1)}

    @classmethod
    def estimated(cls, d0, dpred, eta, theta_mode=LINEAR):
        return cls(eta, ESTIMATED, theta_mode, estimated_targets(d0, dpred, eta))

    @classmethod
    def preserving(cls, eta, theta_mode=LINEAR):
        return cls(eta, PRESERVING, theta_mode)

    def floor(self, i: int) -> float:
        _check_step(i, self.eta)
        return self.theta[i - 1]

    def target(self, i: int) -> Distribution:
        _check_step(i, self.eta)
        try:
            return self._targets[i]
        except KeyError:
            raise KeyError(f"no target set for step {i}") from None

    def set_observed(self, i: int, observed: Distribution) -> None:
        """Feed the distribution observed in step ``i`` (0 = warm-up)."""
        if self.targets_mode == PRESERVING and i < self.eta:
            self._targets[i + 1] = preserving_target(observed)

    def has_target(self, i: int) -> bool:
        return i in self._targets

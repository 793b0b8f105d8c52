"""Exposure bookkeeping and distances between exposure distributions.

Every arrival hands out ``k`` slots of equal attention, each worth ``1/k``,
so one arrival contributes exactly one unit of exposure in total. Slot
counts are kept as integers; the ``1/k`` scaling happens on read.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .catalog import Recommendation

BUCKETS = ("<50%", "50-100%", "100+%")


class EmptyWindowError(ValueError):
    """Raised when a distribution is requested from a window without arrivals."""


@dataclass(frozen=True)
class Distribution:
    mass: np.ndarray

    def __post_init__(self):
        mass = np.array(self.mass, dtype=float)
        if mass.ndim != 1:
            raise ValueError("distribution mass must be 1-D")
        if np.any(mass < 0) or not np.all(np.isfinite(mass)):
            raise ValueError("distribution mass must be finite and non-negative")
        if mass.size and abs(mass.sum() - 1.0) > 1e-9:
            raise ValueError(f"distribution mass sums to {mass.sum()!r}, not 1")
        mass.setflags(write=False)
        object.__setattr__(self, "mass", mass)

    def __len__(self):
        return self.mass.size

    def aggregate(self, groups, n_groups=None) -> "Distribution":
        """Sum item mass into groups (e.g. producers)."""
        groups = np.asarray(groups, dtype=np.intp)
        n_groups = int(groups.max()) + 1 if n_groups is None else n_groups
        return Distribution(np.bincount(groups, weights=self.mass, minlength=n_groups))


class ExposureLedger:
    """Accumulated exposure per item over one time window."""

    def __init__(self, n_items: int, k: int, window=(None, None)):
        if k < 1 or k > n_items:
            raise ValueError(f"k={k} must be in [1, {n_items}]")
        self.k = k
        self.window = window
        self.slots = np.zeros(n_items, dtype=np.int64)
        self.arrivals_seen = 0

    @property
    def n_items(self) -> int:
        return self.slots.size

    @property
    def counts(self) -> np.ndarray:
        """Exposure E_s in arrival units (slot count / k)."""
        return self.slots / self.k

    def record(self, rec) -> "ExposureLedger":
        items = np.asarray(rec.items if isinstance(rec, Recommendation) else rec, dtype=np.intp)
        if items.size != self.k or np.unique(items).size != self.k:
            raise ValueError(f"recommendation must hold {self.k} distinct items, got {items.tolist()}")
        if items.min() < 0 or items.max() >= self.n_items:
            raise ValueError(f"recommended item outside catalog: {items.tolist()}")
        self.slots[items] += 1
        self.arrivals_seen += 1
        return self

    def distribution(self) -> Distribution:
        return distribution(self)

    def copy(self) -> "ExposureLedger":
        other = ExposureLedger(self.n_items, self.k, self.window)
        other.slots = self.slots.copy()
        other.arrivals_seen = self.arrivals_seen
        return other


def record(ledger: ExposureLedger, rec) -> ExposureLedger:
    return ledger.record(rec)


def distribution(ledger: ExposureLedger) -> Distribution:
    if ledger.arrivals_seen == 0:
        raise EmptyWindowError(f"no arrivals in window {ledger.window}")
    return Distribution(ledger.slots / ledger.slots.sum())


def _masses(a, b):
    a = a.mass if isinstance(a, Distribution) else np.asarray(a, dtype=float)
    b = b.mass if isinstance(b, Distribution) else np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"distributions cover different item sets: {a.shape} vs {b.shape}")
    return a, b


def exposure_change(a, b) -> float:
    """L1 distance between two exposure distributions, in [0, 2]."""
    a, b = _masses(a, b)
    return math.fsum(np.abs(b - a).tolist())


def percent_change(old, new) -> np.ndarray:
    """Per-item relative exposure change in percent; inf where old mass is 0."""
    old, new = _masses(old, new)
    diff = np.abs(new - old)
    out = np.full(old.shape, np.inf)
    nz = old > 0
    out[nz] = diff[nz] / old[nz] * 100.0
    out[(old == 0) & (new == 0)] = 0.0
    return out


def impact_histogram(old, new) -> dict:
    """Fraction of items whose exposure moved <50%, 50-100% or more than 100%."""
    pct = percent_change(old, new)
    n = pct.size
    low = int(np.count_nonzero(pct < 50))
    high = int(np.count_nonzero(pct > 100))
    return {
        BUCKETS[0]: low / n,
        BUCKETS[1]: (n - low - high) / n,
        BUCKETS[2]: high / n,
    }

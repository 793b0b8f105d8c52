"""Customers, items, producers and the two relevance models being swapped.

Relevance matrices are dense ``(n_customers, n_items)`` arrays. Customer and
item positions are the internal indices used everywhere else in the package;
external string ids live on :class:`Catalog`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np


class DegenerateCustomerError(ValueError):
    """Raised when a customer's best achievable utility is negative."""


@dataclass(frozen=True)
class Catalog:
    customers: tuple
    items: tuple
    producer_of: Optional[Mapping] = None

    def __post_init__(self):
        object.__setattr__(self, "customers", tuple(self.customers))
        object.__setattr__(self, "items", tuple(self.items))
        if len(set(self.customers)) != len(self.customers):
            raise ValueError("customer ids must be unique")
        if len(set(self.items)) != len(self.items):
            raise ValueError("item ids must be unique")
        if self.producer_of is not None:
            missing = [s for s in self.items if s not in self.producer_of]
            if missing:
                raise ValueError(f"items without a producer: {missing[:5]}")
            object.__setattr__(self, "producer_of", dict(self.producer_of))

    @property
    def n_customers(self) -> int:
        return len(self.customers)

    @property
    def n_items(self) -> int:
        return len(self.items)

    def producer_index(self):
        """Return ``(producer_ids, groups)``.

        ``groups[s]`` is the position in ``producer_ids`` of the producer
        owning item ``s``. Producer ids are sorted so the mapping is stable.
        """
        if self.producer_of is None:
            raise ValueError("catalog has no producer map")
        producer_ids = sorted({self.producer_of[s] for s in self.items})
        position = {p: j for j, p in enumerate(producer_ids)}
        groups = np.array([position[self.producer_of[s]] for s in self.items], dtype=np.intp)
        return producer_ids, groups


@dataclass(frozen=True)
class RelevancePair:
    """Old and new relevance scores over the same customers x items grid."""

    v_old: np.ndarray
    v_new: np.ndarray

    def __post_init__(self):
        v_old = np.array(self.v_old, dtype=float)
        v_new = np.array(self.v_new, dtype=float)
        if v_old.ndim != 2 or v_old.shape != v_new.shape:
            raise ValueError(f"relevance shapes differ or are not 2-D: {v_old.shape} vs {v_new.shape}")
        for name, v in (("v_old", v_old), ("v_new", v_new)):
            if not np.all(np.isfinite(v)):
                raise ValueError(f"{name} contains non-finite scores")
            if np.any(v < 0):
                raise ValueError(f"{name} contains negative scores")
            v.setflags(write=False)
        object.__setattr__(self, "v_old", v_old)
        object.__setattr__(self, "v_new", v_new)

    @property
    def shape(self):
        return self.v_old.shape

    def check_catalog(self, catalog: Catalog) -> None:
        if self.shape != (catalog.n_customers, catalog.n_items):
            raise ValueError(
                f"relevance shape {self.shape} does not match catalog "
                f"({catalog.n_customers} customers, {catalog.n_items} items)"
            )


@dataclass(frozen=True)
class Recommendation:
    customer: object
    items: tuple = field(default=())

    def __post_init__(self):
        items = tuple(sorted(int(s) for s in self.items))
        if not items:
            raise ValueError("a recommendation needs at least one item")
        if len(set(items)) != len(items):
            raise ValueError(f"duplicate items in recommendation: {items}")
        object.__setattr__(self, "items", items)

    @property
    def k(self) -> int:
        return len(self.items)


def top_k(scores, k: int) -> np.ndarray:
    """Indices of the ``k`` highest scores, ties broken by lower index.

    The result is ordered by rank (best first).
    """
    scores = np.asarray(scores, dtype=float)
    if k < 1 or k > scores.shape[-1]:
        raise ValueError(f"k={k} must be in [1, {scores.shape[-1]}]")
    # stable sort on the negated scores keeps equal scores in index order
    return np.argsort(-scores, kind="stable")[:k]


def utility(rec, scores) -> float:
    items = rec.items if isinstance(rec, Recommendation) else rec
    scores = np.asarray(scores, dtype=float)
    return math.fsum(scores[list(items)])


def max_utility(scores, k: int) -> float:
    return utility(top_k(scores, k), scores)


def normalized_utility(rec, scores, k: Optional[int] = None) -> float:
    """Utility of ``rec`` relative to the best ``k``-set for the same row.

    A customer whose best ``k``-set scores zero is satisfied by anything, so
    the normalized utility is 1 in that case.
    """
    items = rec.items if isinstance(rec, Recommendation) else tuple(rec)
    k = len(items) if k is None else k
    best = max_utility(scores, k)
    if best < 0:
        raise DegenerateCustomerError(f"best achievable utility is negative ({best})")
    if best == 0:
        return 1.0
    return utility(items, scores) / best


def rating_distance_scores(ratings, distances) -> RelevancePair:
    """Old model scores by item rating; new model divides by customer distance."""
    ratings = np.asarray(ratings, dtype=float)
    distances = np.asarray(distances, dtype=float)
    if distances.ndim != 2 or distances.shape[1] != ratings.shape[0]:
        raise ValueError(
            f"distances must be (n_customers, {ratings.shape[0]}), got {distances.shape}"
        )
    if np.any(~(distances > 0)):
        raise ValueError("distances must be strictly positive")
    v_old = np.broadcast_to(ratings, distances.shape).copy()
    return RelevancePair(v_old=v_old, v_new=ratings / distances)


def synthetic_pair(n_customers: int, n_items: int, seed: int):
    """Independent uniform [0, 1) old and new scores, reproducible per seed."""
    if n_customers < 1 or n_items < 1:
        raise ValueError("need at least one customer and one item")
    rng = np.random.default_rng(seed)
    v_old = rng.random((n_customers, n_items))
    v_new = rng.random((n_customers, n_items))
    catalog = Catalog(customers=range(n_customers), items=range(n_items))
    return catalog, RelevancePair(v_old=v_old, v_new=v_new)

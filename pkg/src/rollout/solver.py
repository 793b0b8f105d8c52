"""Exact per-arrival slate selection under a minimum-utility floor.

For an arrival at time ``t`` in step ``i`` the slate ``X`` (exactly ``k``
items) minimises

    sum_s | E_s + X_s / k - (n + 1) * target_s |

subject to ``sum_s X_s * v_s >= floor``, where ``E_s`` is the exposure
accumulated since the start of the step, ``n`` the number of arrivals seen
so far in the step and ``v`` the customer's new-model relevance row.

The objective separates over items: selecting ``s`` changes the total by
``delta_s = |E_s + 1/k - T_s| - |E_s - T_s|``. The search works on these
deltas in slot units (multiplied by ``k``), converted to exact rationals
and scaled to a common integer denominator, so equal-cost slates compare
equal and ties are resolved by the lexicographically smallest sorted item
list. Relevance feasibility uses ``math.fsum`` against ``floor - FLOOR_TOL``.

The producer-level variant groups items and charges
``|E_p + n_p / k - T_p|`` per producer, ``n_p`` being the number of
selected items from producer ``p``.
"""
from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

import numpy as np

from .catalog import Recommendation, max_utility, top_k

FLOOR_TOL = 1e-9
BRUTE_FORCE_LIMIT = 10**6


class SolverError(RuntimeError):
    """The search found no feasible slate; only possible with a broken instance."""


class SizeLimitError(ValueError):
    pass


@dataclass(frozen=True)
class SelectionInstance:
    """One arrival's selection problem.

    ``exposure``, ``target`` and ``relevance`` are indexed by instance
    position; ``items`` maps positions back to catalog item ids. ``offset``
    is the fixed objective contribution of items removed by prefiltering.
    For producer-level solves ``groups`` maps positions to producers and
    ``producer_exposure`` / ``producer_target`` cover every producer in the
    full catalog.
    """

    exposure: np.ndarray
    target: np.ndarray
    n_arrivals: int
    relevance: np.ndarray
    k: int
    floor: float
    items: Optional[np.ndarray] = None
    offset: float = 0.0
    groups: Optional[np.ndarray] = None
    producer_exposure: Optional[np.ndarray] = None
    producer_target: Optional[np.ndarray] = None
    customer: object = None

    def __post_init__(self):
        exposure = np.asarray(self.exposure, dtype=float)
        n = exposure.size
        for name in ("target", "relevance"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != exposure.shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {exposure.shape}")
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "exposure", exposure)
        if np.any(exposure < 0):
            raise ValueError("exposure must be non-negative")
        if not 1 <= self.k <= n:
            raise ValueError(f"k={self.k} must be in [1, {n}]")
        if self.n_arrivals < 0:
            raise ValueError("n_arrivals must be non-negative")
        items = np.arange(n) if self.items is None else np.asarray(self.items, dtype=np.intp)
        if items.shape != (n,) or np.any(np.diff(items) <= 0):
            raise ValueError("items must be strictly increasing catalog ids, one per position")
        object.__setattr__(self, "items", items)
        if self.groups is not None:
            groups = np.asarray(self.groups, dtype=np.intp)
            if groups.shape != (n,):
                raise ValueError("groups must give one producer per position")
            object.__setattr__(self, "groups", groups)
            n_producers = int(groups.max()) + 1
            if self.producer_exposure is None:
                object.__setattr__(
                    self, "producer_exposure",
                    np.bincount(groups, weights=exposure, minlength=n_producers),
                )
            if self.producer_target is None:
                object.__setattr__(
                    self, "producer_target",
                    np.bincount(groups, weights=self.target, minlength=n_producers),
                )
        best = max_utility(self.relevance, self.k)
        if self.floor > best + FLOOR_TOL:
            raise ValueError(f"floor {self.floor} exceeds the best achievable utility {best}")

    @property
    def n_items(self) -> int:
        return self.exposure.size

    @property
    def slot_target(self) -> np.ndarray:
        """Target exposure T_s for the window including this arrival."""
        return (self.n_arrivals + 1) * self.target

    def selection_delta(self) -> np.ndarray:
        """Float change in the objective from selecting each item."""
        e, t = self.exposure, self.slot_target
        return np.abs(e + 1.0 / self.k - t) - np.abs(e - t)


def build_instance(ledger, plan, step: int, customer: int, pair, k: int, groups=None) -> SelectionInstance:
    """Selection problem for ``customer`` arriving in ``step``.

    ``ledger`` must hold the exposure recorded since the start of the step.
    """
    target = plan.target(step).mass
    row = pair.v_new[customer]
    if ledger.k != k or ledger.n_items != row.size:
        raise ValueError("ledger does not match k or the item universe")
    floor = plan.floor(step) * max_utility(row, k)
    return SelectionInstance(
        exposure=ledger.counts,
        target=target,
        n_arrivals=ledger.arrivals_seen,
        relevance=row,
        k=k,
        floor=floor,
        groups=groups,
        customer=customer,
    )


def _feasible(inst, positions) -> bool:
    return math.fsum(inst.relevance[list(positions)]) >= inst.floor - FLOOR_TOL


# exact objective -------------------------------------------------------------

def _exact_item_terms(inst):
    """Per-position exact objective terms for x = 0 and x = 1."""
    k = inst.k
    n1 = inst.n_arrivals + 1
    step = Fraction(1, k)
    off, on = [], []
    for e, d in zip(inst.exposure.tolist(), inst.target.tolist()):
        gap = Fraction(e) - n1 * Fraction(d)
        off.append(abs(gap))
        on.append(abs(gap + step))
    return off, on


def _exact_producer_objective(inst, positions) -> Fraction:
    counts = np.bincount(inst.groups[list(positions)], minlength=inst.producer_exposure.size)
    n1 = inst.n_arrivals + 1
    total = Fraction(0)
    for e, d, c in zip(inst.producer_exposure.tolist(), inst.producer_target.tolist(), counts.tolist()):
        total += abs(Fraction(e) + Fraction(int(c), inst.k) - n1 * Fraction(d))
    return total


def _exact_objective(inst, positions, producer_level=False) -> Fraction:
    if producer_level:
        return _exact_producer_objective(inst, positions)
    off, on = _exact_item_terms(inst)
    chosen = set(positions)
    return sum((on[j] if j in chosen else off[j] for j in range(inst.n_items)), Fraction(0))


def _positions(inst, rec) -> list:
    items = rec.items if isinstance(rec, Recommendation) else rec
    lookup = {int(s): j for j, s in enumerate(inst.items.tolist())}
    try:
        return sorted(lookup[int(s)] for s in items)
    except KeyError as err:
        raise ValueError(f"item {err.args[0]} is not part of this instance") from None


def objective(inst: SelectionInstance, rec, producer_level: bool = False) -> float:
    """Objective value of a slate (catalog item ids), in arrival units."""
    pos = _positions(inst, rec)
    if producer_level:
        return float(_exact_producer_objective(inst, pos))
    return inst.offset + float(_exact_objective(inst, pos))


# integer cost tables ---------------------------------------------------------

def _to_integers(values):
    scale = 1
    for v in values:
        scale = math.lcm(scale, v.denominator)
    return [int(v * scale) for v in values]


def _item_costs(inst):
    """Integer selection costs, proportional to the exact deltas."""
    off, on = _exact_item_terms(inst)
    return _to_integers([b - a for a, b in zip(off, on)])


def _producer_cost_tables(inst):
    """``table[p][j]`` = exact cost of adding ``j`` items from producer ``p``."""
    n1 = inst.n_arrivals + 1
    avail = np.bincount(inst.groups, minlength=inst.producer_exposure.size)
    raw = []
    for e, d, a in zip(inst.producer_exposure.tolist(), inst.producer_target.tolist(), avail.tolist()):
        gap = Fraction(e) - n1 * Fraction(d)
        base = abs(gap)
        raw.append([abs(gap + Fraction(j, inst.k)) - base for j in range(min(a, inst.k) + 1)])
    flat = _to_integers([c for row in raw for c in row])
    tables, pos = [], 0
    for row in raw:
        tables.append(flat[pos : pos + len(row)])
        pos += len(row)
    return tables


def _prune_slack(inst) -> float:
    return FLOOR_TOL + 1e-12 * max(1.0, abs(inst.floor))


# item-level search -----------------------------------------------------------

class _ItemSearch:
    def __init__(self, inst, costs):
        self.inst = inst
        self.costs = costs
        self.rel = inst.relevance.tolist()
        self.k = inst.k
        self.need = inst.floor - _prune_slack(inst)

    def best(self, pool, m, prefix, budget=None):
        """Cheapest ``m``-subset of ``pool`` completing ``prefix`` feasibly.

        With ``budget`` the search stops at the first completion costing at
        most ``budget``. Returns ``(cost, positions)`` or ``None``.
        """
        inst, costs, rel = self.inst, self.costs, self.rel
        if m == 0:
            return (0, []) if _feasible(inst, prefix) else None
        order = sorted(pool, key=lambda j: (costs[j], j))
        n = len(order)
        if n < m:
            return None
        ocost = [costs[j] for j in order]
        orel = [rel[j] for j in order]
        csum = [0]
        for c in ocost:
            csum.append(csum[-1] + c)
        # top_rel[q][r]: sum of the r largest relevances among order[q:]
        top_rel = [None] * (n + 1)
        window = []
        top_rel[n] = [0.0] * (m + 1)
        for q in range(n - 1, -1, -1):
            bisect.insort(window, -orel[q])
            del window[m:]
            row = [0.0]
            for w in window:
                row.append(row[-1] - w)
            row.extend([-math.inf] * (m + 1 - len(row)))
            top_rel[q] = row
        prefix_rel = math.fsum(rel[j] for j in prefix)
        found = {"cost": None, "set": None}
        limit = budget

        def visit(start, r, cost, relsum, chosen):
            for q in range(start, n - r + 1):
                bound = limit if found["cost"] is None else found["cost"] - 1
                lb = cost + csum[q + r] - csum[q]
                if bound is not None and lb > bound:
                    break
                if relsum + orel[q] + top_rel[q + 1][r - 1] < self.need:
                    continue
                # cheapest completion starting at q is feasible: optimal for this branch
                tail = order[q : q + r]
                if _feasible(inst, prefix + chosen + tail):
                    found["cost"], found["set"] = lb, chosen + tail
                    if budget is not None:
                        return True
                    continue
                if r > 1 and visit(q + 1, r - 1, cost + ocost[q], relsum + orel[q], chosen + [order[q]]):
                    return True
            return False

        visit(0, m, 0, prefix_rel, [])
        if found["cost"] is None:
            return None
        return found["cost"], found["set"]

    def lexicographic(self, optimum):
        """Lexicographically smallest feasible slate with total cost ``optimum``."""
        n, k, costs, rel = self.inst.n_items, self.k, self.costs, self.rel
        # suffix bounds in position order: cheapest j costs / largest j relevances in [q, n)
        low_cost = [[0] + [math.inf] * k for _ in range(n + 1)]
        high_rel = [[0.0] + [-math.inf] * k for _ in range(n + 1)]
        cwin, rwin = [], []
        for q in range(n - 1, -1, -1):
            bisect.insort(cwin, costs[q])
            del cwin[k:]
            bisect.insort(rwin, -rel[q])
            del rwin[k:]
            for j in range(1, len(cwin) + 1):
                low_cost[q][j] = low_cost[q][j - 1] + cwin[j - 1]
                high_rel[q][j] = high_rel[q][j - 1] - rwin[j - 1]
        chosen, cost, relsum = [], 0, 0.0
        for c in range(n):
            r = k - len(chosen)
            if r == 0:
                break
            if n - c < r:
                break
            rest = r - 1
            budget = optimum - cost - costs[c]
            if low_cost[c + 1][rest] > budget:
                continue
            if relsum + rel[c] + high_rel[c + 1][rest] < self.need:
                continue
            if rest == 0:
                ok = budget == 0 and _feasible(self.inst, chosen + [c])
            else:
                hit = self.best(range(c + 1, n), rest, chosen + [c], budget=budget)
                ok = hit is not None and hit[0] == budget
            if ok:
                chosen.append(c)
                cost += costs[c]
                relsum += rel[c]
        if len(chosen) != k:
            raise SolverError("lexicographic reconstruction failed")
        return chosen


def solve_exact(inst: SelectionInstance) -> Recommendation:
    """Optimal item-level slate; lexicographically smallest among optima."""
    costs = _item_costs(inst)
    search = _ItemSearch(inst, costs)
    hit = search.best(range(inst.n_items), inst.k, [])
    if hit is None:
        raise SolverError("no slate satisfies the utility floor")
    chosen = search.lexicographic(hit[0])
    return Recommendation(inst.customer, inst.items[chosen].tolist())


# producer-level search -------------------------------------------------------

class _ProducerSearch:
    def __init__(self, inst):
        self.inst = inst
        self.tables = _producer_cost_tables(inst)
        self.rel = inst.relevance.tolist()
        self.k = inst.k
        self.need = inst.floor - _prune_slack(inst)
        self.n_producers = len(self.tables)

    def best(self, pool, m, prefix, budget=None):
        """Cheapest completion of ``prefix`` by ``m`` items of ``pool``.

        Items within a producer are interchangeable for the objective, so
        the search runs over per-producer counts and always takes the most
        relevant available items of each producer.
        """
        inst, rel, tables = self.inst, self.rel, self.tables
        fixed = [0] * self.n_producers
        for j in prefix:
            fixed[inst.groups[j]] += 1
        members = {}
        for j in pool:
            members.setdefault(int(inst.groups[j]), []).append(j)
        producers = sorted(members)
        for p in producers:
            members[p].sort(key=lambda j: (-rel[j], j))
        if sum(len(v) for v in members.values()) < m:
            return None
        # marginal cost of the r-th extra item from producer p, given fixed[p]
        def step_costs(p):
            row = tables[p]
            f = fixed[p]
            top = min(len(members[p]), m, len(row) - 1 - f)
            return [row[f + r] - row[f + r - 1] for r in range(1, top + 1)]

        steps = {p: step_costs(p) for p in producers}
        np_ = len(producers)
        # suffix over producers: cheapest j extra items, best j relevances
        low_cost = [None] * (np_ + 1)
        high_rel = [None] * (np_ + 1)
        low_cost[np_] = [0] + [math.inf] * m
        high_rel[np_] = [0.0] + [-math.inf] * m
        cpool, rpool = [], []
        for q in range(np_ - 1, -1, -1):
            p = producers[q]
            cpool = sorted(cpool + steps[p])[:m]
            rpool = sorted(rpool + [-rel[j] for j in members[p][:m]])[:m]
            lc = [0]
            for c in cpool:
                lc.append(lc[-1] + c)
            lc.extend([math.inf] * (m + 1 - len(lc)))
            hr = [0.0]
            for w in rpool:
                hr.append(hr[-1] - w)
            hr.extend([-math.inf] * (m + 1 - len(hr)))
            low_cost[q], high_rel[q] = lc, hr
        prefix_rel = math.fsum(rel[j] for j in prefix)
        found = {"cost": None, "alloc": None}

        def materialize(alloc):
            chosen = []
            for p, r in alloc:
                chosen.extend(members[p][:r])
            return chosen

        def visit(q, r, cost, relsum, alloc):
            bound = budget if found["cost"] is None else found["cost"] - 1
            if r == 0:
                if bound is not None and cost > bound:
                    return False
                if _feasible(inst, prefix + materialize(alloc)):
                    found["cost"], found["alloc"] = cost, list(alloc)
                    return budget is not None
                return False
            if q == np_:
                return False
            if bound is not None and cost + low_cost[q][r] > bound:
                return False
            if relsum + high_rel[q][r] < self.need:
                return False
            p = producers[q]
            options = range(min(r, len(steps[p])), -1, -1)
            for take in options:
                extra = sum(steps[p][:take])
                gain = sum(rel[j] for j in members[p][:take])
                if visit(q + 1, r - take, cost + extra, relsum + gain, alloc + [(p, take)] if take else alloc):
                    return True
            return False

        visit(0, m, 0, prefix_rel, [])
        if found["cost"] is None:
            return None
        return found["cost"], materialize(found["alloc"])

    def lexicographic(self, optimum):
        n, k = self.inst.n_items, self.k
        tables, groups = self.tables, self.inst.groups
        chosen = []
        counts = [0] * self.n_producers
        for c in range(n):
            r = k - len(chosen)
            if r == 0:
                break
            if n - c < r:
                break
            trial = chosen + [c]
            p = groups[c]
            if counts[p] + 1 >= len(tables[p]):
                continue
            spent = sum(tables[q][counts[q]] for q in range(self.n_producers)) - tables[p][counts[p]] + tables[p][counts[p] + 1]
            budget = optimum - spent
            if r - 1 == 0:
                ok = budget == 0 and _feasible(self.inst, trial)
            else:
                hit = self.best(range(c + 1, n), r - 1, trial, budget=budget)
                ok = hit is not None and hit[0] == budget
            if ok:
                chosen = trial
                counts[p] += 1
        if len(chosen) != k:
            raise SolverError("lexicographic reconstruction failed")
        return chosen


def solve_producer_level(inst: SelectionInstance) -> Recommendation:
    """Optimal slate for the producer-level objective."""
    if inst.groups is None:
        raise ValueError("producer-level solve needs a producer grouping")
    search = _ProducerSearch(inst)
    hit = search.best(range(inst.n_items), inst.k, [])
    if hit is None:
        raise SolverError("no slate satisfies the utility floor")
    chosen = search.lexicographic(hit[0])
    return Recommendation(inst.customer, inst.items[chosen].tolist())


# oracle ----------------------------------------------------------------------

def brute_force(inst: SelectionInstance, producer_level: bool = False) -> Recommendation:
    """Enumerate every ``k``-subset; exact objective, lexicographic ties."""
    n, k = inst.n_items, inst.k
    if math.comb(n, k) > BRUTE_FORCE_LIMIT:
        raise SizeLimitError(f"C({n}, {k}) subsets exceed the enumeration limit")
    if producer_level and inst.groups is None:
        raise ValueError("producer-level solve needs a producer grouping")
    if not producer_level:
        off, on = _exact_item_terms(inst)
    best_val, best_set = None, None
    for combo in itertools.combinations(range(n), k):
        if not _feasible(inst, combo):
            continue
        if producer_level:
            val = _exact_producer_objective(inst, combo)
        else:
            picked = set(combo)
            val = sum((on[j] if j in picked else off[j] for j in range(n)), Fraction(0))
        if best_val is None or val < best_val:
            best_val, best_set = val, combo
    if best_set is None:
        raise SolverError("no slate satisfies the utility floor")
    return Recommendation(inst.customer, inst.items[list(best_set)].tolist())


# prefiltering ----------------------------------------------------------------

def prefilter(inst: SelectionInstance) -> SelectionInstance:
    """Shrink the item space to two ``k**2`` candidate lists.

    Keeps the customer's ``k**2`` most relevant items plus the ``k**2``
    items whose current exposure share is furthest from target. Dropped
    items are pinned to "not selected" and their objective terms move into
    ``offset``. No-op when the catalog has at most ``k**2`` items.
    """
    k = inst.k
    n = inst.n_items
    width = k * k
    if n <= width:
        return inst
    by_relevance = top_k(inst.relevance, width)
    total = inst.exposure.sum()
    share = inst.exposure / total if total > 0 else np.zeros(n)
    by_gap = top_k(np.abs(share - inst.target), width)
    keep = np.union1d(by_relevance, by_gap)
    dropped = np.setdiff1d(np.arange(n), keep)
    off, _ = _exact_item_terms(inst)
    fixed = float(sum((off[j] for j in dropped.tolist()), Fraction(0)))
    groups = None if inst.groups is None else inst.groups[keep]
    return replace(
        inst,
        exposure=inst.exposure[keep],
        target=inst.target[keep],
        relevance=inst.relevance[keep],
        items=inst.items[keep],
        offset=inst.offset + fixed,
        groups=groups,
    )

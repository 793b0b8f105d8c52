"""Customer login traces.

Each customer logs in as an independent Poisson process whose mean gap (in
periods) is drawn from a normal(1, var 0.2) truncated to [0, 2]. Time is
measured in periods: the warm-up window is [-1, 0) and update step ``i``
covers [i - 1, i).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

MEAN_GAP = 1.0
GAP_VARIANCE = 0.2
GAP_RANGE = (0.0, 2.0)
MIN_MEAN_GAP = 1e-3
WARMUP_START = -1.0


def sample_mean_interarrivals(n_customers: int, rng_seed) -> np.ndarray:
    """Draw one mean inter-arrival time per customer by rejection sampling."""
    if n_customers < 0:
        raise ValueError("n_customers must be non-negative")
    rng = np.random.default_rng(rng_seed)
    lo, hi = GAP_RANGE
    sd = np.sqrt(GAP_VARIANCE)
    out = np.empty(n_customers)
    filled = 0
    while filled < n_customers:
        draw = rng.normal(MEAN_GAP, sd, size=2 * (n_customers - filled) + 8)
        keep = draw[(draw >= lo) & (draw <= hi)][: n_customers - filled]
        out[filled : filled + keep.size] = keep
        filled += keep.size
    return np.maximum(out, MIN_MEAN_GAP)


@dataclass(frozen=True)
class ArrivalTrace:
    """Time-sorted login events over [-1, eta)."""

    times: np.ndarray
    customers: np.ndarray
    eta: int

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        customers = np.asarray(self.customers, dtype=np.intp)
        if times.shape != customers.shape or times.ndim != 1:
            raise ValueError("times and customers must be equal-length 1-D arrays")
        if self.eta < 1:
            raise ValueError("eta must be >= 1")
        if times.size and np.any(np.diff(times) < 0):
            raise ValueError("events must be sorted by time")
        if times.size and (times[0] < WARMUP_START or times[-1] >= self.eta):
            raise ValueError(f"event times must lie in [-1, {self.eta})")
        times.setflags(write=False)
        customers.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "customers", customers)

    def __len__(self):
        return self.times.size

    @property
    def steps(self) -> np.ndarray:
        """Step index per event: 0 for warm-up, i for [i - 1, i)."""
        return np.floor(self.times).astype(np.intp) + 1

    def window(self, step: int) -> slice:
        """Slice of events falling in ``step`` (0 = warm-up)."""
        lo = np.searchsorted(self.times, step - 1, side="left")
        hi = np.searchsorted(self.times, step, side="left")
        return slice(int(lo), int(hi))

    def customers_in(self, step: int) -> np.ndarray:
        return self.customers[self.window(step)]

    def to_csv(self, path, customer_ids=None) -> None:
        """Write ``time,customer_id`` rows; ids default to customer indices."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["time", "customer_id"])
            for t, u in zip(self.times.tolist(), self.customers.tolist()):
                writer.writerow([repr(t), u if customer_ids is None else customer_ids[u]])

    @classmethod
    def from_csv(cls, path, eta: int, customer_ids=None) -> "ArrivalTrace":
        lookup = None
        if customer_ids is not None:
            lookup = {str(c): j for j, c in enumerate(customer_ids)}
        times, customers = [], []
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != ["time", "customer_id"]:
                raise ValueError(f"{path}: expected header time,customer_id")
            for lineno, row in enumerate(reader, start=2):
                times.append(float(row["time"]))
                key = row["customer_id"].strip()
                if lookup is None:
                    customers.append(int(key))
                elif key in lookup:
                    customers.append(lookup[key])
                else:
                    raise ValueError(f"{path}:{lineno}: unknown customer {key!r}")
        return cls(np.array(times, dtype=float), np.array(customers, dtype=np.intp), eta)


def generate_trace(means, horizon: float, rng_seed) -> ArrivalTrace:
    """Simulate every customer's logins over [-1, horizon - 1).

    ``horizon`` is the window length in periods, i.e. ``eta + 1``.
    Gaps are exponential with the customer's mean; the first login happens
    one gap after -1.
    """
    means = np.asarray(means, dtype=float)
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if np.any(~(means > 0)):
        raise ValueError("mean inter-arrival times must be positive")
    eta = int(round(horizon - 1))
    if eta < 1 or not np.isclose(eta, horizon - 1):
        raise ValueError("horizon must be eta + 1 for an integer eta >= 1")
    end = WARMUP_START + horizon
    rng = np.random.default_rng(rng_seed)
    times, owners = [], []
    for u, mu in enumerate(means):
        t = WARMUP_START
        chunk = int(horizon / mu) + 16
        mine = []
        while True:
            stamps = t + np.cumsum(rng.exponential(mu, size=chunk))
            inside = stamps[stamps < end]
            mine.append(inside)
            if inside.size < stamps.size:
                break
            t = stamps[-1]
        mine = np.concatenate(mine)
        times.append(mine)
        owners.append(np.full(mine.size, u, dtype=np.intp))
    if not times:
        return ArrivalTrace(np.empty(0), np.empty(0, dtype=np.intp), eta)
    times = np.concatenate(times)
    owners = np.concatenate(owners)
    order = np.lexsort((owners, times))
    return ArrivalTrace(times[order], owners[order], eta)

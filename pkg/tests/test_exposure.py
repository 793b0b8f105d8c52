import numpy as np
import pytest
from hypothesis import given, strategies as st

from rollout.exposure import (
    Distribution,
    EmptyWindowError,
    ExposureLedger,
    distribution,
    exposure_change,
    impact_histogram,
    record,
)

simplex = st.integers(2, 12).flatmap(
    lambda n: st.lists(st.floats(0.01, 1.0), min_size=n, max_size=n)
).map(lambda w: Distribution(np.array(w) / np.sum(w)))


def test_record_one_slate():
    ledger = ExposureLedger(12, 10)
    record(ledger, list(range(10)))
    np.testing.assert_allclose(ledger.counts[:10], 0.1)
    assert ledger.counts[10:].tolist() == [0, 0]
    assert ledger.arrivals_seen == 1


def test_record_twice():
    ledger = ExposureLedger(12, 10)
    ledger.record(range(10)).record(range(10))
    np.testing.assert_allclose(ledger.counts[:10], 0.2)


def test_replay_matches_recount():
    rng = np.random.default_rng(0)
    k, n = 3, 9
    slates = [rng.choice(n, k, replace=False) for _ in range(50)]
    ledger = ExposureLedger(n, k)
    for s in slates:
        ledger.record(s)
    recount = np.zeros(n)
    for s in slates:
        for item in s:
            recount[item] += 1 / k
    np.testing.assert_allclose(ledger.counts, recount, atol=1e-12)
    assert ledger.counts.sum() == pytest.approx(ledger.arrivals_seen)


def test_record_rejects_bad_slates():
    ledger = ExposureLedger(5, 2)
    with pytest.raises(ValueError):
        ledger.record([0, 7])
    with pytest.raises(ValueError):
        ledger.record([1, 1])
    with pytest.raises(ValueError):
        ledger.record([0, 1, 2])


def test_distribution_examples():
    ledger = ExposureLedger(3, 1)
    for s in (0, 1, 2, 2):
        ledger.record([s])
    np.testing.assert_allclose(distribution(ledger).mass, [0.25, 0.25, 0.5])
    point = ExposureLedger(4, 1).record([2])
    assert point.distribution().mass.tolist() == [0, 0, 1, 0]


def test_random_ledger_normalizes():
    rng = np.random.default_rng(1)
    ledger = ExposureLedger(40, 5)
    for _ in range(333):
        ledger.record(rng.choice(40, 5, replace=False))
    assert abs(ledger.distribution().mass.sum() - 1) <= 1e-12


def test_empty_window():
    with pytest.raises(EmptyWindowError):
        ExposureLedger(3, 1).distribution()


def test_exposure_change_examples():
    a = Distribution([0.5, 0.3, 0.2])
    assert exposure_change(a, a) == 0
    assert exposure_change([1, 0], [0, 1]) == 2
    assert exposure_change(a, [0.4, 0.4, 0.2]) == pytest.approx(0.2)
    with pytest.raises(ValueError):
        exposure_change([1.0], [0.5, 0.5])


@given(simplex, st.data())
def test_exposure_change_is_a_metric(a, data):
    n = len(a)
    draw = lambda: Distribution(  # noqa: E731
        (lambda w: w / w.sum())(np.array(data.draw(st.lists(st.floats(0.01, 1), min_size=n, max_size=n))))
    )
    b, c = draw(), draw()
    ab = exposure_change(a, b)
    assert ab == exposure_change(b, a)
    assert 0 <= ab <= 2 + 1e-12
    assert (ab == 0) == bool(np.array_equal(a.mass, b.mass))
    assert ab <= exposure_change(a, c) + exposure_change(c, b) + 1e-12


def test_impact_histogram_examples():
    d = Distribution([0.25, 0.25, 0.5])
    assert impact_histogram(d, d) == {"<50%": 1.0, "50-100%": 0.0, "100+%": 0.0}
    old = Distribution([0.10, 0.40, 0.50])
    new = Distribution([0.25, 0.30, 0.45])
    hist = impact_histogram(old, new)
    # 150% -> 100+%, 25% and 10% -> <50%
    assert hist == pytest.approx({"<50%": 2 / 3, "50-100%": 0.0, "100+%": 1 / 3})


def test_impact_histogram_zero_old_mass():
    hist = impact_histogram([0.0, 0.0, 1.0], [0.5, 0.0, 0.5])
    # new mass on a never-exposed item is unbounded growth; 0 -> 0 is no change
    assert hist == pytest.approx({"<50%": 1 / 3, "50-100%": 1 / 3, "100+%": 1 / 3})


def test_impact_histogram_matches_per_item_recompute():
    rng = np.random.default_rng(4)
    old = Distribution(rng.dirichlet(np.ones(50)))
    new = Distribution(rng.dirichlet(np.ones(50)))
    counts = {"<50%": 0, "50-100%": 0, "100+%": 0}
    for o, n in zip(old.mass, new.mass):
        pct = abs(n - o) / o * 100
        key = "<50%" if pct < 50 else ("50-100%" if pct <= 100 else "100+%")
        counts[key] += 1
    hist = impact_histogram(old, new)
    assert sum(hist.values()) == pytest.approx(1.0)
    assert hist == pytest.approx({k: v / 50 for k, v in counts.items()})


def test_aggregate_to_producers():
    d = Distribution([0.1, 0.2, 0.3, 0.4])
    np.testing.assert_allclose(d.aggregate([0, 1, 0, 1]).mass, [0.4, 0.6])

import logging
import random
from collections import defaultdict

import numpy as np
import pytest

from rollout.catalog import Catalog, synthetic_pair
from rollout.ingest import (
    LoadError,
    derive_producer_map_by_prefix,
    load_bundle,
    save_bundle,
    stringify_catalog,
)


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_minimal_fixture(tmp_path):
    old = write(tmp_path / "old.csv", "customer_id,i1,i2,i3\nc1,0.5,1,2\nc2,3,0,0.25\n")
    new = write(tmp_path / "new.csv", "customer_id,item_id,score\nc2,i3,4\nc1,i1,1.5\nc2,i2,0\n")
    bundle = load_bundle(old, new)
    assert bundle.catalog.customers == ("c1", "c2")
    assert bundle.catalog.items == ("i1", "i2", "i3")
    np.testing.assert_array_equal(bundle.pair.v_old, [[0.5, 1, 2], [3, 0, 0.25]])
    np.testing.assert_array_equal(bundle.pair.v_new, [[1.5, 0, 0], [0, 0, 4]])
    assert bundle.provenance["v_new"]["missing"] == 3
    assert len(bundle.provenance["v_old"]["sha256"]) == 64


def test_half_missing_does_not_warn(tmp_path, caplog):
    f = write(tmp_path / "t.csv", "customer_id,item_id,score\nx,a,1\ny,b,2\n")
    with caplog.at_level(logging.WARNING):
        bundle = load_bundle(f, f)
    assert bundle.provenance["v_old"]["missing"] == 2
    assert not caplog.records


def test_mostly_missing_scores_warn(tmp_path, caplog):
    rows = ["customer_id,item_id,score"] + [f"u{j},s{j},1" for j in range(4)]
    f = write(tmp_path / "t.csv", "\n".join(rows) + "\n")
    with caplog.at_level(logging.WARNING):
        load_bundle(f, f)
    assert any("missing" in r.getMessage() for r in caplog.records)


def test_mismatched_items(tmp_path):
    old = write(tmp_path / "old.csv", "customer_id,a,b\nx,1,2\n")
    new = write(tmp_path / "new.csv", "customer_id,a,c\nx,1,2\n")
    with pytest.raises(LoadError, match="item sets"):
        load_bundle(old, new)


@pytest.mark.parametrize("body,msg", [
    ("customer_id,a\nx,-1\n", "negative"),
    ("customer_id,a\nx,abc\n", "parse"),
])
def test_bad_scores(tmp_path, body, msg):
    f = write(tmp_path / "f.csv", body)
    with pytest.raises(LoadError, match=msg):
        load_bundle(f, f)


def test_round_trip(tmp_path):
    catalog, pair = synthetic_pair(15, 12, 3)
    catalog = stringify_catalog(Catalog(catalog.customers, catalog.items, {s: s % 4 for s in catalog.items}))
    paths = save_bundle(tmp_path, catalog, pair)
    bundle = load_bundle(paths["v_old"], paths["v_new"], paths["producers"])
    assert bundle.catalog == catalog
    assert bundle.pair.v_old.tobytes() == pair.v_old.tobytes()
    assert bundle.pair.v_new.tobytes() == pair.v_new.tobytes()


def test_row_order_does_not_matter(tmp_path):
    a = write(tmp_path / "a.csv", "customer_id,item_id,score\nu1,s1,1\nu2,s2,2\nu1,s2,3\nu2,s1,4\n")
    b = write(tmp_path / "b.csv", "customer_id,item_id,score\nu2,s1,4\nu1,s2,3\nu2,s2,2\nu1,s1,1\n")
    x, y = load_bundle(a, a), load_bundle(b, b)
    assert x.catalog == y.catalog
    np.testing.assert_array_equal(x.pair.v_old, y.pair.v_old)


def test_unmapped_item(tmp_path):
    f = write(tmp_path / "f.csv", "customer_id,a,b\nx,1,2\n")
    p = write(tmp_path / "p.csv", "item_id,producer_id\na,P\n")
    with pytest.raises(LoadError, match="no producer"):
        load_bundle(f, f, p)


def test_prefix_examples():
    ids = ["AAAA1", "AAAA2", "BBBB1"]
    assert len(set(derive_producer_map_by_prefix(ids, 4).values())) == 2
    assert len(set(derive_producer_map_by_prefix(ids, 5).values())) == 3
    with pytest.raises(ValueError):
        derive_producer_map_by_prefix(ids, 0)


def test_prefix_groups_match_dict_grouping():
    rng = random.Random(0)
    ids = {"".join(rng.choice("ABC") for _ in range(6)) for _ in range(300)}
    groups = defaultdict(set)
    for s in ids:
        groups[s[:3]].add(s)
    mapping = derive_producer_map_by_prefix(sorted(ids), 3)
    counted = defaultdict(int)
    for p in mapping.values():
        counted[p] += 1
    assert dict(counted) == {p: len(v) for p, v in groups.items()}

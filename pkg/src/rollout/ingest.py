"""Load relevance matrices, producer maps and traces from CSV.

Relevance files come in two layouts, detected from the header:

* triples: ``customer_id,item_id,score``; absent pairs score 0
* dense: ``customer_id,<item id>,<item id>,...`` with one row per customer

Ids are kept as strings and ordered lexicographically.
"""
from __future__ import annotations

import csv
import hashlib
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .catalog import Catalog, RelevancePair

log = logging.getLogger(__name__)

TRIPLE_HEADER = ["customer_id", "item_id", "score"]
PRODUCER_HEADER = ["item_id", "producer_id"]
MISSING_WARN_FRACTION = 0.5


class LoadError(ValueError):
    pass


@dataclass(frozen=True)
class DatasetBundle:
    catalog: Catalog
    pair: RelevancePair
    provenance: dict = field(default_factory=dict)


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _parse_score(text, where):
    try:
        value = float(text)
    except ValueError:
        raise LoadError(f"{where}: cannot parse score {text!r}") from None
    if not np.isfinite(value):
        raise LoadError(f"{where}: non-finite score {text!r}")
    if value < 0:
        raise LoadError(f"{where}: negative score {value}")
    return value


def read_scores(path):
    """Return ``(scores_by_pair, customers, items)`` from one relevance file."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise LoadError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        scores = {}
        customers, items = set(), set()
        if header == TRIPLE_HEADER:
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 3:
                    raise LoadError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
                u, s = row[0].strip(), row[1].strip()
                if (u, s) in scores:
                    raise LoadError(f"{path}:{lineno}: duplicate pair ({u}, {s})")
                scores[(u, s)] = _parse_score(row[2], f"{path}:{lineno}")
                customers.add(u)
                items.add(s)
        else:
            if len(header) < 2:
                raise LoadError(f"{path}: header must be {','.join(TRIPLE_HEADER)} or customer_id,<items...>")
            item_ids = header[1:]
            if len(set(item_ids)) != len(item_ids):
                raise LoadError(f"{path}: duplicate item ids in header")
            items.update(item_ids)
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(header):
                    raise LoadError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
                u = row[0].strip()
                if u in customers:
                    raise LoadError(f"{path}:{lineno}: duplicate customer {u}")
                customers.add(u)
                for s, text in zip(item_ids, row[1:]):
                    scores[(u, s)] = _parse_score(text, f"{path}:{lineno}")
    return scores, customers, items


def _dense(scores, customers, items, label):
    cpos = {u: j for j, u in enumerate(customers)}
    ipos = {s: j for j, s in enumerate(items)}
    out = np.zeros((len(customers), len(items)))
    for (u, s), v in scores.items():
        out[cpos[u], ipos[s]] = v
    missing = out.size - len(scores)
    if out.size and missing / out.size > MISSING_WARN_FRACTION:
        log.warning("%s: %d of %d scores missing, filled with 0", label, missing, out.size)
    return out, missing


def read_producer_map(path) -> dict:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if header != PRODUCER_HEADER:
            raise LoadError(f"{path}: expected header {','.join(PRODUCER_HEADER)}")
        mapping = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise LoadError(f"{path}:{lineno}: expected 2 fields")
            s, p = row[0].strip(), row[1].strip()
            if s in mapping and mapping[s] != p:
                raise LoadError(f"{path}:{lineno}: item {s} mapped to two producers")
            mapping[s] = p
    return mapping


def load_bundle(v_old, v_new, producers=None) -> DatasetBundle:
    """Read and cross-check the old/new relevance files (and producer map)."""
    old_scores, old_customers, old_items = read_scores(v_old)
    new_scores, new_customers, new_items = read_scores(v_new)
    if old_items != new_items:
        diff = sorted(old_items ^ new_items)[:5]
        raise LoadError(f"item sets of {v_old} and {v_new} differ (e.g. {diff})")
    if old_customers != new_customers:
        diff = sorted(old_customers ^ new_customers)[:5]
        raise LoadError(f"customer sets of {v_old} and {v_new} differ (e.g. {diff})")
    customers = sorted(old_customers)
    items = sorted(old_items)
    m_old, miss_old = _dense(old_scores, customers, items, v_old)
    m_new, miss_new = _dense(new_scores, customers, items, v_new)
    producer_of = None
    provenance = {
        "v_old": {"path": str(v_old), "sha256": _sha256(v_old), "missing": miss_old},
        "v_new": {"path": str(v_new), "sha256": _sha256(v_new), "missing": miss_new},
    }
    if producers is not None:
        producer_of = read_producer_map(producers)
        unmapped = [s for s in items if s not in producer_of]
        if unmapped:
            raise LoadError(f"{producers}: no producer for items {unmapped[:5]}")
        producer_of = {s: producer_of[s] for s in items}
        provenance["producers"] = {"path": str(producers), "sha256": _sha256(producers)}
    catalog = Catalog(customers=customers, items=items, producer_of=producer_of)
    return DatasetBundle(catalog, RelevancePair(m_old, m_new), provenance)


def write_dense(path, catalog: Catalog, scores) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["customer_id", *catalog.items])
        for u, row in zip(catalog.customers, np.asarray(scores).tolist()):
            writer.writerow([u, *(repr(v) for v in row)])


def write_producer_map(path, producer_of: dict) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(PRODUCER_HEADER)
        for s in sorted(producer_of):
            writer.writerow([s, producer_of[s]])


def save_bundle(directory, catalog: Catalog, pair: RelevancePair) -> dict:
    """Write ``v_old.csv``, ``v_new.csv`` (and ``producers.csv``) to ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {"v_old": directory / "v_old.csv", "v_new": directory / "v_new.csv"}
    write_dense(paths["v_old"], catalog, pair.v_old)
    write_dense(paths["v_new"], catalog, pair.v_new)
    if catalog.producer_of is not None:
        paths["producers"] = directory / "producers.csv"
        write_producer_map(paths["producers"], catalog.producer_of)
    return paths


def derive_producer_map_by_prefix(item_ids, prefix_len: int) -> dict:
    """Treat the first ``prefix_len`` characters of an item id as its producer."""
    if prefix_len < 1:
        raise ValueError("prefix_len must be >= 1")
    return {s: str(s)[:prefix_len] for s in item_ids}


def _pad(ids):
    ids = list(ids)
    width = max((len(str(x)) for x in ids), default=1)
    return {x: str(x).zfill(width) if isinstance(x, (int, np.integer)) else str(x) for x in ids}


def stringify_catalog(catalog: Catalog, producer_of: Optional[dict] = None) -> Catalog:
    """Catalog with string ids whose lexicographic order matches the original order.

    Integer ids are zero-padded so that :func:`load_bundle` reads the same
    row and column order back.
    """
    producer_of = producer_of if producer_of is not None else catalog.producer_of
    customers = _pad(catalog.customers)
    items = _pad(catalog.items)
    if producer_of is not None:
        producers = _pad(sorted(set(producer_of.values()), key=str))
        producer_of = {items[s]: producers[p] for s, p in producer_of.items()}
    return Catalog(
        customers=[customers[u] for u in catalog.customers],
        items=[items[s] for s in catalog.items],
        producer_of=producer_of,
    )

"""Run a full rollout experiment and assemble its report.

Timeline: a one-period warm-up [-1, 0) served by the old model gives the
status-quo distribution ``D0``; steps ``1..eta`` cover [i-1, i) and are
served by the configured method. Exposure is tracked per step, so every
step starts from an empty ledger.
"""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import arrivals, baselines, exposure, metrics, schedules, solver
from .catalog import Catalog, normalized_utility, synthetic_pair, top_k
from .ingest import derive_producer_map_by_prefix, load_bundle

log = logging.getLogger(__name__)

METHODS = ("ilp", "cand", "irf")


@dataclass
class RunConfig:
    k: int = 10
    eta: int = 10
    method: str = "ilp"
    targets: str = schedules.ESTIMATED
    theta: str = schedules.LINEAR
    prefilter: bool = False
    producer_level: bool = False
    seed: int = 0
    # synthetic data, used when no relevance files are given
    n_customers: int = 100
    n_items: int = 20
    n_producers: int = 0
    # file inputs
    v_old: Optional[str] = None
    v_new: Optional[str] = None
    producers: Optional[str] = None
    producer_prefix: int = 0
    trace: Optional[str] = None
    # report-only threshold for egocentric fairness
    epsilon: Optional[float] = None
    trace_solves: bool = False
    out: Optional[str] = None

    def validate(self) -> "RunConfig":
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.eta < 1:
            raise ValueError("eta must be >= 1")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.targets not in (schedules.ESTIMATED, schedules.PRESERVING):
            raise ValueError(f"unknown targets mode {self.targets!r}")
        if self.theta not in schedules.THETA_SCHEDULES:
            raise ValueError(f"unknown theta mode {self.theta!r}")
        if self.prefilter and self.method != "ilp":
            raise ValueError("prefilter only applies to method=ilp")
        if self.producer_level:
            if self.method != "ilp":
                raise ValueError("producer_level only applies to method=ilp")
            if not (self.producers or self.producer_prefix or self.n_producers):
                raise ValueError("producer_level needs a producer map")
        if (self.v_old is None) != (self.v_new is None):
            raise ValueError("give both v_old and v_new, or neither")
        return self

    def echo(self) -> dict:
        """Config fields that define the experiment (output location excluded)."""
        out = asdict(self)
        out.pop("out")
        return out

    @classmethod
    def from_mapping(cls, mapping) -> "RunConfig":
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, raw in mapping.items():
            key = key.strip().replace("-", "_")
            if key not in known:
                raise ValueError(f"unknown config key {key!r}")
            kwargs[key] = _coerce(known[key], raw)
        return cls(**kwargs).validate()


def _coerce(f, raw):
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    default = f.default
    if f.name in ("v_old", "v_new", "producers", "trace", "out"):
        return text or None
    if f.name == "epsilon":
        return float(text) if text else None
    if isinstance(default, bool):
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{f.name}: expected a boolean, got {raw!r}")
    if isinstance(default, int):
        return int(text)
    return text


@dataclass
class ArrivalRecord:
    time: float
    customer: int
    step: int
    items: tuple
    utility_norm: float
    objective: Optional[float] = None


@dataclass
class RunReport:
    config: dict
    observed: list
    series: metrics.StepSeries
    metrics: dict
    impact: dict
    step_exposure: list
    flags: list = field(default_factory=list)
    arrivals: list = field(default_factory=list)
    item_ids: tuple = ()
    trace: Optional[arrivals.ArrivalTrace] = None
    customer_ids: tuple = ()

    @property
    def d0(self):
        return self.observed[0] if self.observed else None

    @property
    def d_eta(self):
        return self.observed[-1] if self.observed else None

    def to_dict(self) -> dict:
        def mass(d):
            return None if d is None else d.mass.tolist()

        return {
            "config": self.config,
            "flags": list(self.flags),
            "metrics": self.metrics,
            "impact": self.impact,
            "d0": mass(self.d0),
            "d_eta": mass(self.d_eta),
            "observed": [mass(d) for d in self.observed[1:]],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(self.to_json(), encoding="utf-8")
        with open(out / "step_ec.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "ec"])
            for i, ec in enumerate(self.series.step_ec, start=1):
                w.writerow([i, repr(ec)])
        with open(out / "utility.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "mean", "std", "min", "n"])
            u = self.metrics["utility"]
            for i, samples in enumerate(self.series.utility):
                w.writerow([i + 1, _cell(u["mean"][i]), _cell(u["std"][i]), _cell(u["min"][i]), len(samples)])
        with open(out / "exposure_by_step.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "item_id", "exposure"])
            for i, counts in enumerate(self.step_exposure):
                for s, e in zip(self.item_ids, counts.tolist()):
                    w.writerow([i, s, repr(e)])
        if self.trace is not None:
            self.trace.to_csv(out / "trace.csv", self.customer_ids)
        if self.config.get("trace_solves"):
            with open(out / "solves.csv", "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh)
                w.writerow(["time", "customer", "step", "objective", "utility_norm", "items"])
                for a in self.arrivals:
                    w.writerow([
                        repr(a.time), a.customer, a.step, _cell(a.objective),
                        repr(a.utility_norm), *a.items,
                    ])
        return out


def _cell(x):
    return "" if x is None else repr(x)


# data preparation ------------------------------------------------------------

def _seeds(seed):
    data, means, trace, cohorts = np.random.SeedSequence(seed).spawn(4)
    return {"data": data, "means": means, "trace": trace, "cohorts": cohorts}


def load_data(config: RunConfig):
    """Catalog and relevance pair for ``config`` (files or synthetic)."""
    if config.v_old is not None:
        bundle = load_bundle(config.v_old, config.v_new, config.producers)
        catalog, pair = bundle.catalog, bundle.pair
    else:
        catalog, pair = synthetic_pair(config.n_customers, config.n_items, _seeds(config.seed)["data"])
        if config.n_producers:
            catalog = Catalog(
                catalog.customers,
                catalog.items,
                {s: s % config.n_producers for s in catalog.items},
            )
    if config.producer_prefix and catalog.producer_of is None:
        catalog = Catalog(
            catalog.customers,
            catalog.items,
            derive_producer_map_by_prefix(catalog.items, config.producer_prefix),
        )
    return catalog, pair


def make_trace(config: RunConfig, catalog: Catalog) -> arrivals.ArrivalTrace:
    if config.trace is not None:
        return arrivals.ArrivalTrace.from_csv(config.trace, config.eta, catalog.customers)
    seeds = _seeds(config.seed)
    means = arrivals.sample_mean_interarrivals(catalog.n_customers, seeds["means"])
    return arrivals.generate_trace(means, config.eta + 1, seeds["trace"])


def _serve_window(pair_scores, customers, k, n_items):
    ledger = exposure.ExposureLedger(n_items, k)
    for u in customers:
        ledger.record(top_k(pair_scores[u], k))
    return ledger


def immediate_impact(config: RunConfig, data=None, trace=None) -> dict:
    """Serve the warm-up arrivals once with each model and compare exposure."""
    config.validate()
    catalog, pair = data if data is not None else load_data(config)
    trace = trace if trace is not None else make_trace(config, catalog)
    warm = trace.customers_in(0)
    if warm.size == 0:
        raise exposure.EmptyWindowError("warm-up window has no arrivals")
    old = _serve_window(pair.v_old, warm, config.k, catalog.n_items).distribution()
    new = _serve_window(pair.v_new, warm, config.k, catalog.n_items).distribution()
    return {
        "ec": exposure.exposure_change(old, new),
        "histogram": exposure.impact_histogram(old, new),
        "arrivals": int(warm.size),
    }


# main loop -------------------------------------------------------------------

def run(config: RunConfig, data=None, trace=None) -> RunReport:
    """Simulate one rollout. ``data``/``trace`` override config-driven inputs."""
    config.validate()
    catalog, pair = data if data is not None else load_data(config)
    pair.check_catalog(catalog)
    trace = trace if trace is not None else make_trace(config, catalog)
    if trace.eta != config.eta:
        raise ValueError(f"trace covers {trace.eta} steps, config asks for {config.eta}")
    k, eta, n_items = config.k, config.eta, catalog.n_items
    if k > n_items:
        raise ValueError(f"k={k} exceeds the number of items ({n_items})")
    groups = catalog.producer_index()[1] if config.producer_level else None
    flags = []
    log_rows = []

    warm = trace.window(0)
    ledger0 = exposure.ExposureLedger(n_items, k, window=(-1, 0))
    for t, u in zip(trace.times[warm].tolist(), trace.customers[warm].tolist()):
        items = top_k(pair.v_old[u], k)
        ledger0.record(items)
        log_rows.append(ArrivalRecord(t, u, 0, tuple(sorted(items.tolist())), normalized_utility(items, pair.v_new[u], k)))
    if ledger0.arrivals_seen == 0:
        flags.append("empty_warmup")
        series = metrics.StepSeries([], 0.0, [])
        return RunReport(
            config=config.echo(), observed=[], series=series,
            metrics={"upsilon": None, "pi": None, "z": None, "ec_immediate": None,
                     "step_ec": [], "utility": {"mean": [], "std": [], "min": []}},
            impact={}, step_exposure=[ledger0.counts], flags=flags, arrivals=log_rows,
            item_ids=catalog.items, trace=trace, customer_ids=catalog.customers,
        )
    d0 = ledger0.distribution()
    dpred = schedules.predict_final_distribution(pair, trace.customers[warm], k)

    plan = None
    if config.method == "ilp":
        if config.targets == schedules.ESTIMATED:
            plan = schedules.RolloutPlan.estimated(d0, dpred, eta, config.theta)
        else:
            plan = schedules.RolloutPlan.preserving(eta, config.theta)
            plan.set_observed(0, d0)
    cohorts = None
    if config.method == "cand":
        cohorts = baselines.cand_assign(catalog.n_customers, eta, _seeds(config.seed)["cohorts"])

    observed = [d0]
    step_exposure = [ledger0.counts]
    utilities = []
    for i in range(1, eta + 1):
        ledger = exposure.ExposureLedger(n_items, k, window=(i - 1, i))
        samples = []
        window = trace.window(i)
        for t, u in zip(trace.times[window].tolist(), trace.customers[window].tolist()):
            obj = None
            if config.method == "ilp":
                inst = solver.build_instance(ledger, plan, i, u, pair, k, groups=groups)
                if config.prefilter:
                    inst = solver.prefilter(inst)
                if config.producer_level:
                    rec = solver.solve_producer_level(inst)
                else:
                    rec = solver.solve_exact(inst)
                if config.trace_solves:
                    obj = solver.objective(inst, rec, producer_level=config.producer_level)
            elif config.method == "cand":
                rec = baselines.cand_recommend(u, i, cohorts, pair, k)
            else:
                rec = baselines.irf_recommend(u, i, pair, k, eta)
            ledger.record(rec)
            util = normalized_utility(rec, pair.v_new[u], k)
            samples.append(util)
            log_rows.append(ArrivalRecord(t, u, i, rec.items, util, obj))
        if ledger.arrivals_seen == 0:
            flags.append(f"empty_step_{i}")
            d_i = observed[-1]
        else:
            d_i = ledger.distribution()
        observed.append(d_i)
        step_exposure.append(ledger.counts)
        utilities.append(samples)
        if plan is not None:
            plan.set_observed(i, d_i)

    step_ec = [exposure.exposure_change(observed[i - 1], observed[i]) for i in range(1, eta + 1)]
    series = metrics.StepSeries(step_ec, exposure.exposure_change(observed[0], observed[-1]), utilities)
    block = metrics.metrics_block(series)
    if block["upsilon"] is None:
        flags.append("degenerate_direct_change")
    if config.epsilon is not None:
        block["egocentric_fair"] = [ec < config.epsilon for ec in step_ec]
    if config.producer_level or catalog.producer_of is not None:
        n_producers = int(catalog.producer_index()[1].max()) + 1
        g = catalog.producer_index()[1]
        p_obs = [d.aggregate(g, n_producers) for d in observed]
        p_series = metrics.StepSeries(
            [exposure.exposure_change(p_obs[i - 1], p_obs[i]) for i in range(1, eta + 1)],
            exposure.exposure_change(p_obs[0], p_obs[-1]),
        )
        p_block = metrics.metrics_block(p_series)
        p_block.pop("utility")
        block["producer"] = p_block
    impact = {
        "ec": exposure.exposure_change(d0, dpred),
        "histogram": exposure.impact_histogram(d0, dpred),
    }
    return RunReport(
        config=config.echo(),
        observed=observed,
        series=series,
        metrics=block,
        impact=impact,
        step_exposure=step_exposure,
        flags=flags,
        arrivals=log_rows,
        item_ids=catalog.items,
        trace=trace,
        customer_ids=catalog.customers,
    )


def sweep(config: RunConfig, etas, seeds) -> dict:
    """Run ``config`` for every (eta, seed); report per-seed and mean metrics."""
    rows = []
    for eta in etas:
        for seed in seeds:
            cfg = RunConfig(**{**asdict(config), "eta": int(eta), "seed": int(seed), "out": None})
            report = run(cfg)
            m = report.metrics
            rows.append({"eta": int(eta), "seed": int(seed), "upsilon": m["upsilon"], "pi": m["pi"], "z": m["z"]})
    summary = []
    for eta in etas:
        mine = [r for r in rows if r["eta"] == int(eta)]
        entry = {"eta": int(eta), "runs": len(mine)}
        for key in ("upsilon", "pi", "z"):
            vals = [r[key] for r in mine if r[key] is not None]
            entry[key] = float(np.mean(vals)) if vals else None
        summary.append(entry)
    return {"runs": rows, "mean": summary}

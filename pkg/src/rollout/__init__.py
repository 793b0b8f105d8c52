"""Smooth, utility-guaranteed rollout of a new recommender model.

Each arriving customer gets the ``k`` items that keep item exposure closest
to a per-step target distribution while meeting a per-step floor on
their normalized utility under the new model.
"""
from .arrivals import ArrivalTrace, generate_trace, sample_mean_interarrivals
from .baselines import cand_assign, cand_recommend, irf_recommend, irf_relevance
from .catalog import (
    Catalog,
    Recommendation,
    RelevancePair,
    normalized_utility,
    rating_distance_scores,
    synthetic_pair,
    top_k,
    utility,
)
from .exposure import Distribution, ExposureLedger, exposure_change, impact_histogram
from .metrics import (
    StepSeries,
    max_transition_cost,
    path_length,
    transition_inequality,
    utility_stats,
)
from .runner import RunConfig, RunReport, immediate_impact, run, sweep
from .schedules import RolloutPlan, estimated_targets, theta_geometric, theta_linear
from .solver import (
    SelectionInstance,
    brute_force,
    build_instance,
    objective,
    prefilter,
    solve_exact,
    solve_producer_level,
)

__version__ = "0.1.0"

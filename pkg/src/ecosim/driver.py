"""Experiment orchestration: config, simulation runs, aggregation, output.

One simulation run owns an entire world (habitat network, communities,
users, agent pools) and a private random stream derived from
(base_seed, run_index).  Experiments execute many independent runs,
merge their measurement histograms, and report goodness of fit of the
observed application properties against the configured request
distributions.

Per time step, in fixed order: agent creation, request evolution (with
caching, migration and Hebbian reinforcement per success), then network
decay.  The order is part of the determinism contract.
"""

from __future__ import annotations

import csv
import json
import multiprocessing
import os
import time
from dataclasses import dataclass, field, fields

from . import distributions
from .distributions import DistributionSpec
from .errors import (ConfigurationError, InvalidInputError,
                     UnservableRequestError)
from .evolution import EvolutionParams, run_evolution
from .habitat import (HabitatNetwork, build_topology, decay,
                      migrate_application, reinforce)
from .model import MAX_ATTRIBUTES, mask_of
from .rng import DeterministicRng, mix_seed
from .stats import ChiSquareReport, Histogram, analyze
from .userbase import Userbase, assign_users, build_communities

PROFILES = {
    "desk": {"time_steps": 300, "runs": 200},
    "full": {"time_steps": 1000, "runs": 10000},
}


@dataclass
class ExperimentConfig:
    habitats: int = 100
    base_degree: int = 4
    rewire_p: float = 0.1
    attribute_space: int = 64
    communities: int = 10
    community_pool_size: int = 16
    communities_aligned: bool = True
    evolution: EvolutionParams = field(default_factory=EvolutionParams)
    threshold_fraction: float = 0.75
    eta: float = 0.1
    delta: float = 0.01
    cache_capacity: int = 100
    length_spec: DistributionSpec = field(
        default_factory=lambda: distributions.uniform(2, 18))
    modularity_spec: DistributionSpec = field(
        default_factory=lambda: distributions.uniform(6, 12))
    request_rate: float = 0.1
    creation_rate: float = 0.05
    bootstrap_agents: int = 20
    time_steps: int = 300
    runs: int = 200
    base_seed: int = 1
    measurement_window_fraction: float = 0.2
    output_dir: str | None = None

    def to_dict(self) -> dict:
        return {
            "habitats": self.habitats,
            "base_degree": self.base_degree,
            "rewire_p": self.rewire_p,
            "attribute_space": self.attribute_space,
            "communities": self.communities,
            "community_pool_size": self.community_pool_size,
            "communities_aligned": self.communities_aligned,
            "evolution": self.evolution.to_dict(),
            "threshold_fraction": self.threshold_fraction,
            "eta": self.eta,
            "delta": self.delta,
            "cache_capacity": self.cache_capacity,
            "length_spec": self.length_spec.to_dict(),
            "modularity_spec": self.modularity_spec.to_dict(),
            "request_rate": self.request_rate,
            "creation_rate": self.creation_rate,
            "bootstrap_agents": self.bootstrap_agents,
            "time_steps": self.time_steps,
            "runs": self.runs,
            "base_seed": self.base_seed,
            "measurement_window_fraction": self.measurement_window_fraction,
            "output_dir": self.output_dir,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        diags = validate_raw(raw)
        if diags:
            raise ConfigurationError("; ".join(diags))
        kwargs = dict(raw)
        if "evolution" in kwargs:
            kwargs["evolution"] = EvolutionParams.from_dict(kwargs["evolution"])
        if "length_spec" in kwargs:
            kwargs["length_spec"] = DistributionSpec.from_dict(kwargs["length_spec"])
        if "modularity_spec" in kwargs:
            kwargs["modularity_spec"] = DistributionSpec.from_dict(
                kwargs["modularity_spec"])
        return cls(**kwargs)


def _check_int(diags, raw, key, lo=None, hi=None):
    v = raw.get(key)
    if v is None:
        return None
    if not isinstance(v, int) or isinstance(v, bool):
        diags.append(f"{key}: must be an integer")
        return None
    if lo is not None and v < lo:
        diags.append(f"{key}: must be >= {lo}")
    if hi is not None and v > hi:
        diags.append(f"{key}: must be <= {hi}")
    return v


def _check_real(diags, raw, key, lo=None, hi=None, lo_open=False):
    v = raw.get(key)
    if v is None:
        return None
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        diags.append(f"{key}: must be a number")
        return None
    if lo is not None and (v <= lo if lo_open else v < lo):
        diags.append(f"{key}: must be {'>' if lo_open else '>='} {lo}")
    if hi is not None and v > hi:
        diags.append(f"{key}: must be <= {hi}")
    return v


def validate_raw(raw: dict) -> list[str]:
    """All configuration diagnostics for a raw JSON object (not just the
    first problem)."""
    if not isinstance(raw, dict):
        return ["config root must be a JSON object"]
    diags: list[str] = []
    known = {f.name for f in fields(ExperimentConfig)}
    for key in raw:
        if key not in known:
            diags.append(f"unknown config key: {key}")

    n = _check_int(diags, raw, "habitats", lo=3)
    k = _check_int(diags, raw, "base_degree", lo=2)
    if k is not None and k % 2 != 0:
        diags.append("base_degree: topology requires an even base degree")
    if n is not None and k is not None and n <= k:
        diags.append("habitats: must exceed base_degree")
    _check_real(diags, raw, "rewire_p", lo=0.0, hi=1.0)
    a = _check_int(diags, raw, "attribute_space", lo=2, hi=MAX_ATTRIBUTES)
    c = _check_int(diags, raw, "communities", lo=1)
    p = _check_int(diags, raw, "community_pool_size", lo=1)
    if a is not None and p is not None and p > a:
        diags.append("community_pool_size: must not exceed attribute_space")
    if "communities_aligned" in raw and not isinstance(raw["communities_aligned"], bool):
        diags.append("communities_aligned: must be a boolean")
    if "evolution" in raw:
        try:
            EvolutionParams.from_dict(raw["evolution"])
        except Exception as exc:
            diags.append(f"evolution: {exc}")
    _check_real(diags, raw, "threshold_fraction", lo=0.0, hi=1.0)
    _check_real(diags, raw, "eta", lo=0.0, lo_open=True)
    _check_real(diags, raw, "delta", lo=0.0, hi=1.0)
    _check_int(diags, raw, "cache_capacity", lo=1)
    specs = {}
    for key in ("length_spec", "modularity_spec"):
        if key in raw:
            try:
                specs[key] = DistributionSpec.from_dict(raw[key])
            except Exception as exc:
                diags.append(f"{key}: {exc}")
    mod = specs.get("modularity_spec")
    if mod is not None and a is not None and mod.hi > a:
        diags.append("modularity_spec: hi exceeds attribute_space "
                     "(tasks cannot have more attributes than exist)")
    _check_real(diags, raw, "request_rate", lo=0.0, hi=1.0)
    _check_real(diags, raw, "creation_rate", lo=0.0, hi=1.0)
    _check_int(diags, raw, "bootstrap_agents", lo=0)
    _check_int(diags, raw, "time_steps", lo=1)
    _check_int(diags, raw, "runs", lo=1)
    _check_int(diags, raw, "base_seed")
    _check_real(diags, raw, "measurement_window_fraction", lo=0.0, hi=1.0)
    if "output_dir" in raw and raw["output_dir"] is not None:
        if not isinstance(raw["output_dir"], str):
            diags.append("output_dir: must be a string or null")
    return diags


def validate_config(path: str) -> list[str]:
    """Parse a config file and list every invariant violation."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            return [f"invalid JSON: {exc}"]
    return validate_raw(raw)


def validate_config_obj(config: ExperimentConfig) -> list[str]:
    """Diagnostics for an in-memory config (round-trips through the raw
    checks so programmatic and file-based configs face identical rules)."""
    return validate_raw(config.to_dict())


@dataclass
class RunResult:
    seed: int
    size_histogram: Histogram
    attr_histogram: Histogram
    successful_requests: int = 0
    failed_requests: int = 0
    singleton_agent_count: int = 0
    requests_issued: int = 0
    agents_created: int = 0
    reinforce_skipped: int = 0
    topology_rows: list | None = None


def run_simulation(config: ExperimentConfig, run_index: int,
                   collect_topology: bool = False) -> RunResult:
    """Execute one fully deterministic simulation run."""
    diags = validate_config_obj(config)
    if diags:
        raise ConfigurationError("; ".join(diags))

    seed = mix_seed(config.base_seed, run_index)
    rng = DeterministicRng(seed)
    network = build_topology(config.habitats, config.base_degree,
                             config.rewire_p, rng,
                             cache_capacity=config.cache_capacity)
    communities = build_communities(config.communities,
                                    config.community_pool_size,
                                    config.attribute_space, rng)
    users = assign_users(config.habitats, communities,
                         config.request_rate, config.creation_rate,
                         aligned=config.communities_aligned)
    userbase = Userbase(communities, config.attribute_space, network)
    for user in users:
        for _ in range(config.bootstrap_agents):
            userbase.create_agent(user, config.modularity_spec, rng)

    result = RunResult(
        seed=seed,
        size_histogram=Histogram(config.length_spec.lo, config.length_spec.hi),
        attr_histogram=Histogram(config.modularity_spec.lo,
                                 config.modularity_spec.hi),
    )
    window_start = config.time_steps - int(
        config.time_steps * config.measurement_window_fraction)
    last_step = config.time_steps - 1

    for step_index in range(config.time_steps):
        for user in users:
            if rng.random() < user.creation_rate:
                userbase.create_agent(user, config.modularity_spec, rng)
        for user in users:
            if rng.random() >= user.request_rate:
                continue
            request = userbase.generate_request(
                user, config.length_spec, config.modularity_spec, rng)
            habitat = network.habitats[user.habitat]
            try:
                evo = run_evolution(habitat, request, config.evolution,
                                    config.threshold_fraction, rng)
            except UnservableRequestError:
                result.failed_requests += 1
                continue
            if not evo.succeeded:
                result.failed_requests += 1
                continue
            result.successful_requests += 1
            signature = mask_of(request.attribute_union)
            habitat.cache_application(evo.best_indices, signature)
            migrate_application(network, habitat.id, evo.best.agents,
                                signature, rng)
            for idx in dict.fromkeys(evo.best_indices):
                edge = habitat.arrivals[idx]
                if edge is not None:
                    reinforce(network, edge, config.eta)
            if step_index >= window_start:
                result.size_histogram.record(evo.best.size)
                for agent in evo.best.agents:
                    result.attr_histogram.record(agent.size)
            if step_index == last_step and evo.best.size == 1:
                result.singleton_agent_count += 1
        decay(network, config.delta)

    result.requests_issued = userbase.requests_issued
    result.agents_created = userbase.agents_created
    result.reinforce_skipped = network.reinforce_skipped
    if collect_topology:
        result.topology_rows = network.weight_rows()
    return result


@dataclass
class ExperimentSummary:
    config: ExperimentConfig
    size_histogram: Histogram
    attr_histogram: Histogram
    size_report: ChiSquareReport | None
    attr_report: ChiSquareReport | None
    successful_requests: int
    failed_requests: int
    requests_issued: int
    agents_created: int
    singleton_agent_count: int
    reinforce_skipped: int
    seeds: list[int]
    elapsed_seconds: float
    topology_rows: list

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "size_report": (self.size_report.to_dict()
                            if self.size_report is not None else None),
            "attr_report": (self.attr_report.to_dict()
                            if self.attr_report is not None else None),
            "successful_requests": self.successful_requests,
            "failed_requests": self.failed_requests,
            "requests_issued": self.requests_issued,
            "agents_created": self.agents_created,
            "singleton_agent_count": self.singleton_agent_count,
            "reinforce_skipped": self.reinforce_skipped,
            "seeds": self.seeds,
            "elapsed_seconds": self.elapsed_seconds,
        }


def _run_one(args) -> RunResult:
    config, run_index, collect = args
    return run_simulation(config, run_index, collect_topology=collect)


def run_experiment(config: ExperimentConfig, workers: int = 1,
                   out_dir: str | None = None) -> ExperimentSummary:
    """Execute config.runs independent runs, merge, analyze, write files.

    Results are merged in run index order whatever the worker count, so
    output is schedule-independent.  The goodness-of-fit reports are
    computed on the per-run mean histogram (merged counts / runs); see
    stats.analyze.
    """
    diags = validate_config_obj(config)
    if diags:
        raise ConfigurationError("; ".join(diags))
    out_dir = out_dir if out_dir is not None else config.output_dir

    t0 = time.perf_counter()
    jobs = [(config, i, i == 0) for i in range(config.runs)]
    if workers > 1:
        with multiprocessing.Pool(workers) as pool:
            results = pool.map(_run_one, jobs)
    else:
        results = [_run_one(job) for job in jobs]

    size_hist = Histogram(config.length_spec.lo, config.length_spec.hi)
    attr_hist = Histogram(config.modularity_spec.lo, config.modularity_spec.hi)
    summary = ExperimentSummary(
        config=config,
        size_histogram=size_hist,
        attr_histogram=attr_hist,
        size_report=None, attr_report=None,
        successful_requests=0, failed_requests=0, requests_issued=0,
        agents_created=0, singleton_agent_count=0, reinforce_skipped=0,
        seeds=[r.seed for r in results],
        elapsed_seconds=0.0,
        topology_rows=results[0].topology_rows or [],
    )
    for r in results:
        size_hist.merge(r.size_histogram)
        attr_hist.merge(r.attr_histogram)
        summary.successful_requests += r.successful_requests
        summary.failed_requests += r.failed_requests
        summary.requests_issued += r.requests_issued
        summary.agents_created += r.agents_created
        summary.singleton_agent_count += r.singleton_agent_count
        summary.reinforce_skipped += r.reinforce_skipped

    # A degenerate histogram (single bin, or a window that saw nothing)
    # cannot support a goodness-of-fit test; leave that report as None
    # rather than failing the whole experiment.
    try:
        summary.size_report = analyze(size_hist, config.length_spec,
                                      runs=config.runs)
    except InvalidInputError:
        summary.size_report = None
    try:
        summary.attr_report = analyze(attr_hist, config.modularity_spec,
                                      runs=config.runs)
    except InvalidInputError:
        summary.attr_report = None
    summary.elapsed_seconds = time.perf_counter() - t0
    if out_dir is not None:
        write_outputs(summary, out_dir)
    return summary


def _write_hist_csv(path: str, hist: Histogram, spec: DistributionSpec) -> None:
    probs = distributions.expected_probabilities(spec)
    total = hist.total
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin", "observed", "expected"])
        for i, count in enumerate(hist.counts):
            writer.writerow([hist.lo + i, count, repr(probs[i] * total)])


def write_outputs(summary: ExperimentSummary, out_dir: str) -> None:
    """Emit size_hist.csv, attr_hist.csv, summary.json, topology_final.csv."""
    os.makedirs(out_dir, exist_ok=True)
    config = summary.config
    _write_hist_csv(os.path.join(out_dir, "size_hist.csv"),
                    summary.size_histogram, config.length_spec)
    _write_hist_csv(os.path.join(out_dir, "attr_hist.csv"),
                    summary.attr_histogram, config.modularity_spec)
    with open(os.path.join(out_dir, "topology_final.csv"), "w", newline="",
              encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["source", "target", "weight"])
        for source, target, weight in summary.topology_rows:
            writer.writerow([source, target, repr(weight)])
    with open(os.path.join(out_dir, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


# Figure presets.  5/6/7 vary the request length distribution over [2,18]
# (17 bins); 8/9/10 vary the task attribute-count distribution over
# [2,12] (11 bins) in a single-task, single-community world sized so the
# pool can actually track the attribute distribution.
_MOD_WORLD = {
    "attribute_space": 12,
    "communities": 1,
    "community_pool_size": 12,
    "length_spec": {"kind": "uniform", "lo": 1, "hi": 2},
    "threshold_fraction": 0.6,
    "request_rate": 0.005,
    "creation_rate": 1.0,
}

FIGURE_PRESETS: dict[int, dict] = {
    5: {"length_spec": {"kind": "uniform", "lo": 2, "hi": 18}},
    6: {"length_spec": {"kind": "gaussian", "lo": 2, "hi": 18,
                        "mu": 10.0, "sigma": 16 / 6}},
    7: {"length_spec": {"kind": "powerlaw", "lo": 2, "hi": 18, "alpha": 2.0}},
    8: dict(_MOD_WORLD,
            modularity_spec={"kind": "uniform", "lo": 2, "hi": 12}),
    9: dict(_MOD_WORLD,
            modularity_spec={"kind": "gaussian", "lo": 2, "hi": 12,
                             "mu": 7.0, "sigma": 10 / 6}),
    10: dict(_MOD_WORLD,
             modularity_spec={"kind": "powerlaw", "lo": 2, "hi": 12,
                              "alpha": 2.0}),
}


def figure_config(figure: int, profile: str = "desk",
                  overrides: dict | None = None) -> ExperimentConfig:
    """Config for one replication figure; overrides are raw config keys."""
    if figure not in FIGURE_PRESETS:
        raise ConfigurationError(
            f"unknown figure {figure} (valid: {sorted(FIGURE_PRESETS)})")
    if profile not in PROFILES:
        raise ConfigurationError(
            f"unknown profile {profile!r} (valid: {sorted(PROFILES)})")
    raw = {}
    raw.update(FIGURE_PRESETS[figure])
    raw.update(PROFILES[profile])
    if overrides:
        raw.update(overrides)
    return ExperimentConfig.from_dict(raw)


def replicate_figure(figure: int, profile: str = "desk",
                     out_dir: str | None = None, workers: int = 1,
                     overrides: dict | None = None) -> ExperimentSummary:
    """Run the preset experiment for a figure and emit its outputs.

    Alongside the standard experiment outputs, figure_report.json holds
    the report for the distribution that figure varies.
    """
    config = figure_config(figure, profile, overrides)
    summary = run_experiment(config, workers=workers, out_dir=out_dir)
    if out_dir is not None:
        report = summary.size_report if figure in (5, 6, 7) else summary.attr_report
        payload = {"figure": figure, "profile": profile,
                   "varied": "length" if figure in (5, 6, 7) else "modularity",
                   "report": report.to_dict() if report is not None else None}
        with open(os.path.join(out_dir, "figure_report.json"), "w",
                  encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return summary

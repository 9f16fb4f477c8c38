"""End-to-end solve pipeline and the sweep experiment harness.

``solve_pipeline`` runs the full chain for one configuration: couple the
network, select seeds on the coupled graph, map them back to users, and
replay them with the direct multiplex simulator.  The replayed fraction
must reach the target; for lossless couplings it equals the coupled
fraction, for lossy ones it may only exceed it.

``run_experiment`` executes a cross-product of (sweep value x scheme x
beta x repetition) cells and emits one CSV row per cell with seed-set
composition metrics.  Besides the coupling schemes it supports three
baselines: "union" (solve each layer separately and take the union of
the seed sets), "only:<i>" (solve layer i alone), and "direct"
(brute-force optimum on the multiplex, small universes only).
"""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from . import __version__
from .coupling import COUPLING_SCHEMES, couple
from .diffusion import DiffusionModel, LINEAR_THRESHOLD, multiplex_lt_propagate
from .generator import SynthSpec, generate, subseed
from .network import MultiplexNetwork, overlap_users
from .solver import (
    GreedyConfig,
    brute_force_optimal,
    improved_greedy,
    meets_fraction,
    naive_greedy,
)

BASELINE_SCHEMES = ("union", "direct")


def _model_record(model):
    if model is None:
        return {"kind": LINEAR_THRESHOLD}
    record = {"kind": model.kind}
    if model.kind != LINEAR_THRESHOLD:
        record["mc_samples"] = model.mc_samples
        record["rng_seed"] = model.rng_seed
    return record


def _network_record(network):
    return {
        "k": network.k,
        "users": len(network.universe),
        "layer_sizes": [len(layer.nodes) for layer in network.layers],
        "overlapping_users": len(overlap_users(network)),
    }


def single_layer_network(layer):
    """Wrap one layer as a standalone single-layer multiplex network."""
    from .network import LayerGraph

    clone = LayerGraph(1, set(layer.nodes), dict(layer.edges), dict(layer.thresholds))
    return MultiplexNetwork([clone])


def solve_pipeline(network, scheme, cfg, solver="improved"):
    """Couple, solve, map seeds through F, and replay on the multiplex.

    Returns a JSON-ready result dict with both the coupled-graph
    fraction and the replayed direct-multiplex fraction.  Raises
    RuntimeError if the replayed fraction misses the target (which a
    correct coupling cannot produce).
    """
    started = time.perf_counter()
    if scheme == "direct":
        seed_set = brute_force_optimal(network, cfg.beta, cfg.hops)
        coupled_fraction = None
    else:
        model_kind = cfg.model.kind if cfg.model is not None else LINEAR_THRESHOLD
        coupled = couple(network, scheme, model_kind=model_kind)
        mode = coupled.default_coverage_mode
        run_cfg = GreedyConfig(cfg.beta, cfg.hops, cfg.T, cfg.R, mode, cfg.model)
        solve = improved_greedy if solver == "improved" else naive_greedy
        seed_set = solve(coupled, run_cfg)
        coupled_fraction = seed_set.achieved_fraction
    replay = multiplex_lt_propagate(network, set(seed_set.users), cfg.hops)
    replayed_fraction = replay.coverage_count / len(network.universe)
    deterministic = cfg.model is None or cfg.model.kind == LINEAR_THRESHOLD
    if deterministic and not meets_fraction(replayed_fraction, cfg.beta, 1.0):
        raise RuntimeError(
            f"pipeline soundness violated: replayed fraction {replayed_fraction:.6f}"
            f" below target {cfg.beta}"
        )
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    return {
        "scheme": scheme,
        "solver": "brute-force" if scheme == "direct" else solver,
        "beta": cfg.beta,
        "hops": cfg.hops,
        "T": cfg.T,
        "R": cfg.R,
        "coverage_mode": cfg.coverage_mode if scheme != "direct" else "count",
        "seed_users": list(seed_set.users),
        "gains": list(seed_set.gains),
        "seed_size": len(seed_set.users),
        "achieved_fraction": seed_set.achieved_fraction,
        "coupled_fraction": coupled_fraction,
        "replayed_fraction": replayed_fraction,
        "replay_outcome": replay,
        "wall_time_ms": elapsed_ms,
        "model": _model_record(cfg.model),
        "network": _network_record(network),
        "version": __version__,
    }


def union_baseline(network, cfg, solver="improved"):
    """Solve each layer separately at the same beta and pool the seeds."""
    started = time.perf_counter()
    pooled = []
    for layer in network.layers:
        sub = single_layer_network(layer)
        result = solve_pipeline(sub, "lossy-average", cfg, solver=solver)
        pooled.extend(u for u in result["seed_users"] if u not in pooled)
    replay = multiplex_lt_propagate(network, set(pooled), cfg.hops)
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    return {
        "scheme": "union",
        "solver": solver,
        "beta": cfg.beta,
        "hops": cfg.hops,
        "T": cfg.T,
        "R": cfg.R,
        "coverage_mode": "count",
        "seed_users": pooled,
        "gains": [],
        "seed_size": len(pooled),
        "achieved_fraction": replay.coverage_count / len(network.universe),
        "coupled_fraction": None,
        "replayed_fraction": replay.coverage_count / len(network.universe),
        "replay_outcome": replay,
        "wall_time_ms": elapsed_ms,
        "model": _model_record(cfg.model),
        "network": _network_record(network),
        "version": __version__,
    }


def only_baseline(network, layer_index, cfg, solver="improved"):
    """Solve one layer in isolation (coverage target: beta of that
    layer's node count) and replay the seeds on the full multiplex."""
    layer = network.layer_by_index(layer_index)
    sub = single_layer_network(layer)
    result = solve_pipeline(sub, "lossy-average", cfg, solver=solver)
    replay = multiplex_lt_propagate(network, set(result["seed_users"]), cfg.hops)
    result["scheme"] = f"only:{layer_index}"
    result["replayed_fraction"] = replay.coverage_count / len(network.universe)
    result["replay_outcome"] = replay
    result["network"] = _network_record(network)
    return result


def external_influence_fraction(network, seeds, hops, target_layer_index):
    """Share of the target layer's activations that vanish when
    cross-layer propagation is disabled.

    The restricted run simulates the target layer alone from the seeds
    it contains; activations present in the full multiplex run but not
    in the restricted one were only reachable through influence entering
    via overlapping users.
    """
    layer = network.layer_by_index(target_layer_index)
    full = multiplex_lt_propagate(network, set(seeds), hops)
    in_target = full.active.members & layer.nodes
    if not in_target:
        return 0.0, 0, 0
    local_seeds = set(seeds) & layer.nodes
    restricted = multiplex_lt_propagate(single_layer_network(layer), local_seeds, hops)
    external = in_target - restricted.active.members
    return len(external) / len(in_target), len(external), len(in_target)


def seed_composition(network, seeds, replay_outcome):
    """Overlap share and per-layer counts for a seed set and its cascade."""
    overlap = overlap_users(network)
    seeds = list(seeds)
    active = replay_outcome.active.members
    per_layer_seeds = [len(set(seeds) & layer.nodes) for layer in network.layers]
    per_layer_active = [len(active & layer.nodes) for layer in network.layers]
    overlap_share = (len(set(seeds) & overlap) / len(seeds)) if seeds else 0.0
    population_share = len(overlap) / len(network.universe) if network.universe else 0.0
    return {
        "overlap_seed_fraction": overlap_share,
        "overlap_population_fraction": population_share,
        "per_layer_seed_counts": per_layer_seeds,
        "per_layer_influenced_counts": per_layer_active,
    }


@dataclass
class ExperimentSpec:
    """Declarative sweep configuration.

    Exactly one network source: ``layer_files`` (paths in layer order)
    or ``synth`` (uniform recipe: universe_size, layer_size, edge_prob,
    k, optional overlap_fraction; or an explicit per_layer list).
    Optional sweeps regenerate the network per value: ``k_values``
    sweeps the layer count, ``overlap_values`` the forced overlap
    fraction.  With ``beta_of_base`` the coverage target is beta times
    the universe *base* size instead of the realized union, matching
    fixed-audience protocols.
    """

    schemes: list
    betas: list
    hops: int = 4
    T: int = 8
    R: int = 3
    repetitions: int = 1
    base_seed: int = 0
    synth: dict = None
    layer_files: list = None
    alias_file: str = None
    model: dict = None
    k_values: list = None
    overlap_values: list = None
    beta_of_base: bool = False
    target_layer: int = 1
    solver: str = "improved"
    out: str = None

    def __post_init__(self):
        if (self.synth is None) == (self.layer_files is None):
            raise ValueError("specify exactly one of synth or layer_files")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        for scheme in self.schemes:
            if scheme in COUPLING_SCHEMES or scheme in BASELINE_SCHEMES:
                continue
            if scheme.startswith("only:") and scheme[5:].isdigit():
                continue
            raise ValueError(f"unknown scheme {scheme!r}")

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown experiment fields: {sorted(unknown)}")
        return cls(**data)


def _diffusion_model(spec):
    if spec.model is None:
        return None
    record = dict(spec.model)
    kind = record.pop("kind", LINEAR_THRESHOLD)
    if kind == LINEAR_THRESHOLD:
        return None
    return DiffusionModel(kind=kind, **record)


def _synth_spec(spec, k, overlap, seed):
    recipe = dict(spec.synth)
    if "per_layer" in recipe:
        per_layer = [tuple(entry) for entry in recipe["per_layer"]]
        if k is not None:
            raise ValueError("k_values sweep needs a uniform synth recipe")
    else:
        count = k if k is not None else recipe["k"]
        per_layer = [(recipe["layer_size"], recipe["edge_prob"])] * count
    fraction = overlap if overlap is not None else recipe.get("overlap_fraction")
    return SynthSpec(recipe["universe_size"], per_layer, fraction, seed)


def _load_files_network(spec):
    from .network import (
        apply_aliases,
        fill_missing_thresholds,
        load_alias_map,
        load_layer_file,
        needs_normalization,
        normalize_incoming_weights,
    )

    layers = [load_layer_file(path, i + 1) for i, path in enumerate(spec.layer_files)]
    if spec.alias_file:
        with open(spec.alias_file, encoding="utf-8") as handle:
            mapping = load_alias_map(handle)
        layers = [apply_aliases(layer, mapping) for layer in layers]
    layers = [
        normalize_incoming_weights(layer, subseed(spec.base_seed, f"weights/{layer.layer_index}"))
        if needs_normalization(layer) else layer
        for layer in layers
    ]
    network = MultiplexNetwork(layers)
    return fill_missing_thresholds(network, subseed(spec.base_seed, "thresholds"))


def _cells(spec):
    if spec.k_values:
        axis = [("k", value) for value in spec.k_values]
    elif spec.overlap_values:
        axis = [("overlap", value) for value in spec.overlap_values]
    else:
        axis = [(None, None)]
    for axis_name, axis_value in axis:
        for repetition in range(spec.repetitions):
            for scheme in spec.schemes:
                for beta in spec.betas:
                    yield axis_name, axis_value, repetition, scheme, beta


def _run_cell(spec, network, axis_name, axis_value, repetition, scheme, beta):
    model = _diffusion_model(spec)
    effective_beta = beta
    if spec.beta_of_base and spec.synth is not None:
        base = spec.synth["universe_size"]
        effective_beta = min(1.0, beta * base / len(network.universe))
    cfg = GreedyConfig(effective_beta, spec.hops, spec.T, spec.R, model=model)
    if scheme == "union":
        result = union_baseline(network, cfg, solver=spec.solver)
    elif scheme.startswith("only:"):
        result = only_baseline(network, int(scheme[5:]), cfg, solver=spec.solver)
    else:
        result = solve_pipeline(network, scheme, cfg, solver=spec.solver)
    composition = seed_composition(network, result["seed_users"], result["replay_outcome"])
    external, _, _ = external_influence_fraction(
        network, result["seed_users"], spec.hops, spec.target_layer
    )
    return {
        "sweep": axis_name or "",
        "sweep_value": "" if axis_value is None else axis_value,
        "repetition": repetition,
        "scheme": scheme,
        "beta": beta,
        "effective_beta": effective_beta,
        "seed_size": result["seed_size"],
        "wall_time_ms": round(result["wall_time_ms"], 3),
        "coupled_fraction": "" if result["coupled_fraction"] is None else result["coupled_fraction"],
        "replayed_fraction": result["replayed_fraction"],
        "overlap_seed_fraction": composition["overlap_seed_fraction"],
        "overlap_population_fraction": composition["overlap_population_fraction"],
        "per_layer_seed_counts": ";".join(map(str, composition["per_layer_seed_counts"])),
        "per_layer_influenced_counts": ";".join(map(str, composition["per_layer_influenced_counts"])),
        "external_influence_fraction": external,
        "seed_users": ";".join(result["seed_users"]),
        "status": "ok",
        "error": "",
    }


CSV_FIELDS = [
    "sweep", "sweep_value", "repetition", "scheme", "beta", "effective_beta",
    "seed_size", "wall_time_ms", "coupled_fraction", "replayed_fraction",
    "overlap_seed_fraction", "overlap_population_fraction",
    "per_layer_seed_counts", "per_layer_influenced_counts",
    "external_influence_fraction", "seed_users", "status", "error",
]


def run_experiment(spec, jobs=1):
    """Run every cell of the sweep; failed cells become marked rows.

    Returns the list of row dicts in deterministic cell order.  Networks
    are rebuilt per (sweep value, repetition) from derived sub-seeds, so
    the whole table is reproducible from the spec alone.
    """
    if spec.layer_files is not None:
        file_network = _load_files_network(spec)
    networks = {}

    def network_for(axis_name, axis_value, repetition):
        if spec.layer_files is not None:
            return file_network
        key = (axis_value, repetition)
        if key not in networks:
            seed = subseed(spec.base_seed, f"net/{axis_value}/{repetition}")
            k = axis_value if axis_name == "k" else None
            overlap = axis_value if axis_name == "overlap" else None
            networks[key] = generate(_synth_spec(spec, k, overlap, seed))
        return networks[key]

    cells = list(_cells(spec))
    for axis_name, axis_value, repetition, _, _ in cells:
        network_for(axis_name, axis_value, repetition)

    def run(cell):
        axis_name, axis_value, repetition, scheme, beta = cell
        network = network_for(axis_name, axis_value, repetition)
        try:
            return _run_cell(spec, network, axis_name, axis_value, repetition, scheme, beta)
        except Exception as exc:  # mark the cell, keep the sweep going
            return {
                **{name: "" for name in CSV_FIELDS},
                "sweep": axis_name or "",
                "sweep_value": "" if axis_value is None else axis_value,
                "repetition": repetition,
                "scheme": scheme,
                "beta": beta,
                "status": "error",
                "error": str(exc),
            }

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run, cells))
    else:
        rows = [run(cell) for cell in cells]
    return rows


def experiment_metadata(spec):
    """Everything needed to regenerate an experiment table bit-identically."""
    record = {name: getattr(spec, name) for name in spec.__dataclass_fields__}
    record["version"] = __version__
    return record


def write_rows_csv(rows, path, spec=None):
    """Atomically write experiment rows as CSV (plus a .meta.json sidecar
    carrying the full configuration when the spec is given)."""
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    os.replace(tmp, path)
    if spec is not None:
        meta_tmp = f"{path}.meta.tmp.{os.getpid()}"
        with open(meta_tmp, "w", encoding="utf-8") as handle:
            json.dump(experiment_metadata(spec), handle, indent=2, sort_keys=True)
            handle.write("\n")
        os.replace(meta_tmp, f"{path}.meta.json")

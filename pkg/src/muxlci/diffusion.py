"""Hop-limited diffusion engines.

All engines use synchronous rounds: activations at hop t are computed
against the set of nodes active after hop t-1 and committed together.
Seeds count as active at hop 0 and start influencing at hop 1.  A run
stops at the hop budget or at quiescence, whichever comes first.

Three models:

* linear threshold — a node activates once the summed weights of its
  active in-neighbors reach its threshold (deterministic);
* stochastic threshold — per Monte Carlo sample, each node's threshold
  is drawn uniformly from (0, bound] and a linear-threshold run follows;
* independent cascade — each newly active node gets a single chance per
  out-edge to activate the target, with success probability equal to
  the edge weight.

The direct multiplex variant runs linear threshold on all layers at
once: a user activates as soon as the condition holds in *some* layer,
and an active user influences every layer it belongs to from the next
hop on.
"""

from __future__ import annotations

import csv
import random
from collections import defaultdict
from dataclasses import dataclass, field

from .network import WEIGHT_EPS

LINEAR_THRESHOLD = "linear_threshold"
STOCHASTIC_THRESHOLD = "stochastic_threshold"
INDEPENDENT_CASCADE = "independent_cascade"

_MODEL_KINDS = (LINEAR_THRESHOLD, STOCHASTIC_THRESHOLD, INDEPENDENT_CASCADE)


@dataclass
class DiffusionModel:
    """Diffusion model selector plus Monte Carlo controls.

    ``st_bounds`` only applies to the stochastic threshold model: a
    per-node mapping, a single float, or None to reuse the graph's
    stored thresholds as upper bounds.  ``mc_samples`` is ignored for
    the deterministic linear-threshold model.
    """

    kind: str = LINEAR_THRESHOLD
    mc_samples: int = 1000
    rng_seed: int = 0
    st_bounds: object = None

    def __post_init__(self):
        if self.kind not in _MODEL_KINDS:
            raise ValueError(f"unknown diffusion model {self.kind!r}")
        if self.mc_samples < 1:
            raise ValueError("mc_samples must be >= 1")


@dataclass
class ActiveSet:
    """Activation trace: per_hop[t] holds the ids newly active at hop t
    (per_hop[0] is the seed set); members is their union."""

    members: set = field(default_factory=set)
    per_hop: list = field(default_factory=list)


@dataclass
class DiffusionOutcome:
    """Result of one diffusion run.

    For Monte Carlo models, ``coverage_count`` and ``coverage_weight``
    are means over the samples and ``active`` holds the final sample's
    trace; for deterministic runs coverage_count == len(active.members).
    """

    active: ActiveSet
    coverage_count: float
    coverage_weight: float
    hops_used: int


class InfluenceGraph:
    """Directed weighted graph with per-node thresholds and node weights.

    Nodes are opaque string ids mapped to dense indices in the order
    given.  Instances are immutable after construction and safe to share
    across concurrent read-only simulations: propagation keeps all
    scratch state local to the call.
    """

    def __init__(self, nodes, edges, thresholds, node_weights=None):
        self.node_ids = tuple(nodes)
        self.index = {u: i for i, u in enumerate(self.node_ids)}
        if len(self.index) != len(self.node_ids):
            raise ValueError("duplicate node ids")
        self.theta = [float(thresholds[u]) for u in self.node_ids]
        if node_weights is None:
            self.node_weight = [1.0] * len(self.node_ids)
        else:
            self.node_weight = [float(node_weights.get(u, 1.0)) for u in self.node_ids]
        self.out = [[] for _ in self.node_ids]
        seen = set()
        for src, dst, weight in edges:
            iu, iv = self.index[src], self.index[dst]
            if iu == iv:
                raise ValueError(f"self-loop on {src!r}")
            if (iu, iv) in seen:
                raise ValueError(f"duplicate edge {src!r}->{dst!r}")
            seen.add((iu, iv))
            self.out[iu].append((iv, float(weight)))
        self.total_weight = float(sum(self.node_weight))

    def __len__(self):
        return len(self.node_ids)

    def in_edges(self):
        """Per-node list of (predecessor index, weight), built on demand."""
        incoming = [[] for _ in self.node_ids]
        for iu, targets in enumerate(self.out):
            for iv, weight in targets:
                incoming[iv].append((iu, weight))
        return incoming


def _seed_indices(graph, seeds):
    indices = []
    for seed in seeds:
        if seed not in graph.index:
            raise ValueError(f"unknown seed id {seed!r}")
        indices.append(graph.index[seed])
    return sorted(set(indices))


def _outcome(graph, per_hop_idx, hops_used):
    per_hop = [{graph.node_ids[i] for i in hop} for hop in per_hop_idx]
    members = set().union(*per_hop) if per_hop else set()
    weight = sum(graph.node_weight[graph.index[u]] for u in members)
    return DiffusionOutcome(ActiveSet(members, per_hop), float(len(members)), weight, hops_used)


def _lt_rounds(graph, seed_idx, hops, theta):
    """Shared linear-threshold sweep; returns (per-hop index lists, hops used)."""
    active = bytearray(len(graph.node_ids))
    received = [0.0] * len(graph.node_ids)
    for i in seed_idx:
        active[i] = 1
    per_hop = [list(seed_idx)]
    frontier = seed_idx
    hops_used = 0
    for t in range(1, hops + 1):
        touched = set()
        for u in frontier:
            for v, w in graph.out[u]:
                if not active[v]:
                    received[v] += w
                    touched.add(v)
        newly = sorted(v for v in touched if received[v] >= theta[v] - WEIGHT_EPS)
        if not newly:
            break
        for v in newly:
            active[v] = 1
        per_hop.append(newly)
        frontier = newly
        hops_used = t
    return per_hop, hops_used


def lt_propagate(graph, seeds, hops):
    """Deterministic linear-threshold diffusion from a seed set.

    Threshold comparisons use >= with a 1e-12 slack so sums that should
    exactly meet a threshold survive floating point.
    """
    if hops < 0:
        raise ValueError("hop budget must be >= 0")
    seed_idx = _seed_indices(graph, seeds)
    per_hop, hops_used = _lt_rounds(graph, seed_idx, hops, graph.theta)
    return _outcome(graph, per_hop, hops_used)


def multiplex_lt_propagate(network, seeds, hops):
    """Linear-threshold diffusion directly on a multiplex network.

    A user activates at hop t as soon as, in some layer, the summed
    weights of its in-neighbors active after hop t-1 reach that layer's
    threshold.  Activation is global: from the next hop the user exerts
    influence in every layer it joins.
    """
    if hops < 0:
        raise ValueError("hop budget must be >= 0")
    unknown = set(seeds) - network.universe
    if unknown:
        raise ValueError(f"unknown seed users: {sorted(unknown)!r}")
    layers = [(layer.out_adjacency(), layer.thresholds) for layer in network.layers]
    active = set(seeds)
    per_hop = [set(seeds)]
    received = [defaultdict(float) for _ in layers]
    frontier = sorted(active)
    hops_used = 0
    for t in range(1, hops + 1):
        touched = set()
        for li, (adjacency, _) in enumerate(layers):
            sums = received[li]
            for u in frontier:
                for v, w in adjacency.get(u, ()):
                    if v not in active:
                        sums[v] += w
                        touched.add((li, v))
        newly = set()
        for li, v in touched:
            if received[li][v] >= layers[li][1][v] - WEIGHT_EPS:
                newly.add(v)
        if not newly:
            break
        active |= newly
        per_hop.append(newly)
        frontier = sorted(newly)
        hops_used = t
    members = set().union(*per_hop)
    return DiffusionOutcome(ActiveSet(members, per_hop), float(len(members)), float(len(members)), hops_used)


def _ic_single(graph, seed_idx, hops, rng):
    active = bytearray(len(graph.node_ids))
    for i in seed_idx:
        active[i] = 1
    per_hop = [list(seed_idx)]
    frontier = seed_idx
    hops_used = 0
    for t in range(1, hops + 1):
        newly = set()
        for u in frontier:
            for v, w in graph.out[u]:
                if not active[v] and rng.random() < w:
                    newly.add(v)
        if not newly:
            break
        newly = sorted(newly)
        for v in newly:
            active[v] = 1
        per_hop.append(newly)
        frontier = newly
        hops_used = t
    return per_hop, hops_used


def ic_propagate(graph, seeds, hops, model):
    """Independent-cascade diffusion, averaged over Monte Carlo samples.

    Each newly active node attempts each out-edge exactly once, with
    success probability equal to the edge weight; the cascade is
    truncated after ``hops`` rounds.  Deterministic under the model's
    rng seed.
    """
    if model.kind != INDEPENDENT_CASCADE:
        raise ValueError("model.kind must be independent_cascade")
    if hops < 0:
        raise ValueError("hop budget must be >= 0")
    seed_idx = _seed_indices(graph, seeds)
    rng = random.Random(model.rng_seed)
    count_total = 0.0
    weight_total = 0.0
    last = None
    for _ in range(model.mc_samples):
        per_hop, hops_used = _ic_single(graph, seed_idx, hops, rng)
        members = {i for hop in per_hop for i in hop}
        count_total += len(members)
        weight_total += sum(graph.node_weight[i] for i in members)
        last = (per_hop, hops_used)
    outcome = _outcome(graph, last[0], last[1])
    outcome.coverage_count = count_total / model.mc_samples
    outcome.coverage_weight = weight_total / model.mc_samples
    return outcome


def _resolve_bounds(graph, st_bounds):
    if st_bounds is None:
        bounds = list(graph.theta)
    elif isinstance(st_bounds, (int, float)):
        bounds = [float(st_bounds)] * len(graph.node_ids)
    else:
        bounds = [float(st_bounds[u]) for u in graph.node_ids]
    for u, b in zip(graph.node_ids, bounds):
        if not 0.0 < b <= 1.0:
            raise ValueError(f"stochastic threshold bound for {u!r} outside (0, 1]: {b}")
    return bounds


def st_propagate(graph, seeds, hops, model):
    """Stochastic-threshold diffusion, averaged over Monte Carlo samples.

    Per sample, each node's threshold is drawn uniformly from
    (0, bound] and a linear-threshold run follows.  Deterministic under
    the model's rng seed.
    """
    if model.kind != STOCHASTIC_THRESHOLD:
        raise ValueError("model.kind must be stochastic_threshold")
    if hops < 0:
        raise ValueError("hop budget must be >= 0")
    seed_idx = _seed_indices(graph, seeds)
    bounds = _resolve_bounds(graph, model.st_bounds)
    rng = random.Random(model.rng_seed)
    count_total = 0.0
    weight_total = 0.0
    last = None
    for _ in range(model.mc_samples):
        theta = [(1.0 - rng.random()) * b for b in bounds]
        per_hop, hops_used = _lt_rounds(graph, seed_idx, hops, theta)
        members = {i for hop in per_hop for i in hop}
        count_total += len(members)
        weight_total += sum(graph.node_weight[i] for i in members)
        last = (per_hop, hops_used)
    outcome = _outcome(graph, last[0], last[1])
    outcome.coverage_count = count_total / model.mc_samples
    outcome.coverage_weight = weight_total / model.mc_samples
    return outcome


def coverage_fraction(outcome, mode, total):
    """Coverage divided by an explicit denominator.

    ``mode`` picks the numerator: "count" uses coverage_count (user or
    node count), "weight" uses coverage_weight (needed for weight-
    reduced couplings).
    """
    if mode not in ("count", "weight"):
        raise ValueError(f"unknown coverage mode {mode!r}")
    if total <= 0:
        raise ValueError("coverage denominator must be positive")
    value = outcome.coverage_count if mode == "count" else outcome.coverage_weight
    return value / total


def write_trace(outcome, stream, kinds=None):
    """Write the per-hop activation trace as CSV rows hop,node_id,node_kind."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["hop", "node_id", "node_kind"])
    for hop, members in enumerate(outcome.active.per_hop):
        for node in sorted(members):
            kind = kinds[node].kind if kinds and node in kinds else "user"
            writer.writerow([hop, node, kind])

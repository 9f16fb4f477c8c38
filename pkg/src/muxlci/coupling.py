"""Coupling schemes: project a multiplex network onto a single network.

Every scheme produces a :class:`CoupledNetwork` carrying the coupled
graph, a user<->node bijection F (``user_of`` / ``node_of_user``) on the
seedable nodes, and a hop-scale factor: d hops of direct multiplex
diffusion correspond to ``hop_scale * d`` hops on the coupled graph.

Lossless schemes reproduce multiplex diffusion exactly:

* clique — per user, one gateway plus one representative per layer
  (isolated dummies for layers the user does not join).  All of a
  user's outgoing influence flows through its gateway; gateway and
  representatives synchronize through a pairwise clique whose edge into
  any vertex carries exactly that vertex's threshold.  Hop scale 2.
* star — synchronization goes through one extra intermediate hub per
  user instead of the clique, trading edges (2(k+1) per user instead of
  k(k+1)) for one more synchronization hop.  Hop scale 3.
* reduced clique / reduced star — representatives only for joined
  layers, no dummies.  Representatives weigh 1, the seedable user
  vertex weighs k - p for a user joining p of the k layers, so weighted
  coverage on the coupled graph equals user coverage on the multiplex.

The lossy scheme keeps one vertex per user and folds the per-layer
activation conditions into one inequality by positive per-layer
multipliers alpha: threshold(u) = sum_i alpha_i(u) * theta_i(u) and
w(v, u) = sum_i alpha_i(u) * w_i(v, u).  Any seed set reaching a target
fraction on the lossy graph reaches at least that fraction on the
multiplex.  Multipliers: "average" (all 1), "easiness" (in-weight mass
over threshold), or "involvement" (neighborhood cohesion).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .diffusion import INDEPENDENT_CASCADE, InfluenceGraph

GATEWAY = "gateway"
REPRESENTATIVE = "representative"
DUMMY = "dummy"
INTERMEDIATE = "intermediate"
USER_VERTEX = "user"

COUPLING_SCHEMES = (
    "clique",
    "star",
    "reduced-clique",
    "reduced-star",
    "lossy-easiness",
    "lossy-involvement",
    "lossy-average",
)


@dataclass(frozen=True)
class NodeKind:
    """Role of a coupled node: which user it stands for and, for
    representatives and dummies, which layer."""

    kind: str
    user: str
    layer: int = None


@dataclass
class CoupledNetwork:
    """A coupled graph plus the bookkeeping to map results back to users."""

    graph: InfluenceGraph
    kinds: dict
    user_of: dict
    node_of_user: dict
    hop_scale: int
    scheme: str
    k: int
    n_users: int

    @property
    def default_coverage_mode(self):
        """Reduced schemes count coverage by node weight, the rest by node count."""
        return "weight" if self.scheme.startswith("reduced") else "count"

    def seed_nodes(self, users):
        """Coupled seed nodes for a set of users (inverse of F)."""
        nodes = []
        for user in users:
            if user not in self.node_of_user:
                raise ValueError(f"unknown user {user!r}")
            nodes.append(self.node_of_user[user])
        return sorted(nodes)

    def active_users(self, members):
        """Users whose F-image node appears in a set of active nodes."""
        return {self.user_of[node] for node in members if node in self.user_of}


def _gateway(user):
    return user + "@g"


def _rep(user, layer_index):
    return f"{user}@{layer_index}"


def _hub(user):
    return user + "@s"


def _user_vertex(user):
    return user + "@u"


def _require_complete(network):
    for layer in network.layers:
        for (src, dst), weight in layer.edges.items():
            if weight is None:
                raise ValueError(
                    f"layer {layer.layer_index}: edge {src!r}->{dst!r} has unset weight; "
                    "normalize weights before coupling"
                )
        for user in layer.nodes:
            if user not in layer.thresholds:
                raise ValueError(
                    f"layer {layer.layer_index}: node {user!r} missing threshold; "
                    "assign thresholds before coupling"
                )


def _sync_weight(thresholds, node, ic):
    # IC synchronization edges fire with probability 1; threshold-model
    # edges carry exactly the target's threshold so one active sibling
    # is always enough.
    return 1.0 if ic else thresholds[node]


def couple_clique_lossless(network, model_kind="linear_threshold"):
    """Clique lossless coupling; hop scale 2.

    Sizes: (k+1)*n vertices and sum(|E_i|) + n*k*(k+1) edges for n users
    and k layers.  Seeds map to gateways.
    """
    _require_complete(network)
    ic = model_kind == INDEPENDENT_CASCADE
    k = network.k
    users = sorted(network.universe)
    nodes, thresholds, kinds, node_weight = [], {}, {}, {}
    user_of, node_of_user = {}, {}
    edges = []
    for user in users:
        gateway = _gateway(user)
        nodes.append(gateway)
        thresholds[gateway] = 1.0
        kinds[gateway] = NodeKind(GATEWAY, user)
        node_weight[gateway] = 1.0
        user_of[gateway] = user
        node_of_user[user] = gateway
        ring = [gateway]
        for layer in network.layers:
            rep = _rep(user, layer.layer_index)
            nodes.append(rep)
            node_weight[rep] = 1.0
            if user in layer.nodes:
                thresholds[rep] = layer.thresholds[user]
                kinds[rep] = NodeKind(REPRESENTATIVE, user, layer.layer_index)
            else:
                thresholds[rep] = 1.0
                kinds[rep] = NodeKind(DUMMY, user, layer.layer_index)
            ring.append(rep)
        for src in ring:
            for dst in ring:
                if src != dst:
                    edges.append((src, dst, _sync_weight(thresholds, dst, ic)))
    for layer in network.layers:
        for (src, dst) in sorted(layer.edges):
            edges.append((_gateway(src), _rep(dst, layer.layer_index), layer.edges[(src, dst)]))
    graph = InfluenceGraph(nodes, edges, thresholds, node_weight)
    return CoupledNetwork(graph, kinds, user_of, node_of_user, 2, "clique", k, len(users))


def couple_star_lossless(network, model_kind="linear_threshold"):
    """Star lossless coupling; hop scale 3.

    Like the clique scheme but per-user synchronization runs through one
    intermediate hub, so the coupled network has (k+2)*n vertices and
    sum(|E_i|) + 2*n*(k+1) edges.
    """
    _require_complete(network)
    ic = model_kind == INDEPENDENT_CASCADE
    k = network.k
    users = sorted(network.universe)
    nodes, thresholds, kinds, node_weight = [], {}, {}, {}
    user_of, node_of_user = {}, {}
    edges = []
    for user in users:
        gateway = _gateway(user)
        hub = _hub(user)
        nodes.append(gateway)
        thresholds[gateway] = 1.0
        kinds[gateway] = NodeKind(GATEWAY, user)
        node_weight[gateway] = 1.0
        user_of[gateway] = user
        node_of_user[user] = gateway
        reps = []
        for layer in network.layers:
            rep = _rep(user, layer.layer_index)
            nodes.append(rep)
            node_weight[rep] = 1.0
            if user in layer.nodes:
                thresholds[rep] = layer.thresholds[user]
                kinds[rep] = NodeKind(REPRESENTATIVE, user, layer.layer_index)
            else:
                thresholds[rep] = 1.0
                kinds[rep] = NodeKind(DUMMY, user, layer.layer_index)
            reps.append(rep)
        nodes.append(hub)
        thresholds[hub] = 1.0
        kinds[hub] = NodeKind(INTERMEDIATE, user)
        node_weight[hub] = 1.0
        for rep in reps:
            edges.append((rep, hub, 1.0))
            edges.append((hub, rep, _sync_weight(thresholds, rep, ic)))
        edges.append((hub, gateway, 1.0))
        edges.append((gateway, hub, 1.0))
    for layer in network.layers:
        for (src, dst) in sorted(layer.edges):
            edges.append((_gateway(src), _rep(dst, layer.layer_index), layer.edges[(src, dst)]))
    graph = InfluenceGraph(nodes, edges, thresholds, node_weight)
    return CoupledNetwork(graph, kinds, user_of, node_of_user, 3, "star", k, len(users))


def couple_reduced(network, sync="clique", model_kind="linear_threshold"):
    """Weight-reduced lossless coupling (clique or star synchronization).

    Representatives exist only for layers a user joins (weight 1 each);
    the seedable user vertex carries weight k - p for a user joining p
    layers, so the weighted active fraction on the coupled graph equals
    the active user fraction on the multiplex.  Coverage on these graphs
    must be measured by weight.  Vertices: sum(|V_i|) + n (clique sync)
    or sum(|V_i|) + 2n (star sync).
    """
    if sync not in ("clique", "star"):
        raise ValueError(f"unknown synchronization style {sync!r}")
    _require_complete(network)
    ic = model_kind == INDEPENDENT_CASCADE
    k = network.k
    users = sorted(network.universe)
    nodes, thresholds, kinds, node_weight = [], {}, {}, {}
    user_of, node_of_user = {}, {}
    edges = []
    for user in users:
        vertex = _user_vertex(user)
        nodes.append(vertex)
        thresholds[vertex] = 1.0
        kinds[vertex] = NodeKind(USER_VERTEX, user)
        user_of[vertex] = user
        node_of_user[user] = vertex
        reps = []
        joined = 0
        for layer in network.layers:
            if user not in layer.nodes:
                continue
            joined += 1
            rep = _rep(user, layer.layer_index)
            nodes.append(rep)
            thresholds[rep] = layer.thresholds[user]
            kinds[rep] = NodeKind(REPRESENTATIVE, user, layer.layer_index)
            node_weight[rep] = 1.0
            reps.append(rep)
        node_weight[vertex] = float(k - joined)
        if sync == "clique":
            ring = [vertex] + reps
            for src in ring:
                for dst in ring:
                    if src != dst:
                        edges.append((src, dst, _sync_weight(thresholds, dst, ic)))
        else:
            hub = _hub(user)
            nodes.append(hub)
            thresholds[hub] = 1.0
            kinds[hub] = NodeKind(INTERMEDIATE, user)
            node_weight[hub] = 0.0
            for rep in reps:
                edges.append((rep, hub, 1.0))
                edges.append((hub, rep, _sync_weight(thresholds, rep, ic)))
            edges.append((hub, vertex, 1.0))
            edges.append((vertex, hub, 1.0))
    for layer in network.layers:
        for (src, dst) in sorted(layer.edges):
            edges.append((_user_vertex(src), _rep(dst, layer.layer_index), layer.edges[(src, dst)]))
    graph = InfluenceGraph(nodes, edges, thresholds, node_weight)
    scheme = "reduced-" + sync
    hop_scale = 2 if sync == "clique" else 3
    return CoupledNetwork(graph, kinds, user_of, node_of_user, hop_scale, scheme, k, len(users))


def easiness(network, user, layer_index, floor=1.0):
    """How easily a user activates in one layer: total incoming weight
    divided by the threshold.  Users with no in-neighbors (or zero
    in-weight) get the configured floor so the multiplier stays positive.
    """
    layer = network.layer_by_index(layer_index)
    if user not in layer.nodes:
        raise ValueError(f"user {user!r} not in layer {layer_index}")
    total = 0.0
    for (src, dst), weight in layer.edges.items():
        if dst == user:
            total += weight
    if total <= 0.0:
        return floor
    return total / layer.thresholds[user]


def involvement(network, user, layer_index, floor=1.0):
    """Cohesion of a user's 1-hop neighborhood in one layer.

    Sums weight/threshold over every directed edge between members of
    the closed neighborhood (in- plus out-neighbors plus the user).
    Falls back to the floor when the neighborhood has no edges.
    """
    layer = network.layer_by_index(layer_index)
    if user not in layer.nodes:
        raise ValueError(f"user {user!r} not in layer {layer_index}")
    hood = {user}
    for (src, dst) in layer.edges:
        if src == user:
            hood.add(dst)
        elif dst == user:
            hood.add(src)
    total = 0.0
    seen_edge = False
    adjacency = layer.out_adjacency()
    for x in hood:
        for y, weight in adjacency.get(x, ()):
            if y in hood:
                total += weight / layer.thresholds[y]
                seen_edge = True
    if not seen_edge or total <= 0.0:
        return floor
    return total


_ALPHA_KINDS = ("easiness", "involvement", "average")


def couple_lossy(network, kind="average", floor=1.0):
    """Lossy coupling: one vertex per user, hop scale 1.

    Per-layer thresholds and in-weights are folded with positive
    multipliers chosen by ``kind``; layers a user does not join
    contribute nothing.  Edges with zero folded weight are dropped.
    The folded threshold may exceed 1.
    """
    if kind not in _ALPHA_KINDS:
        raise ValueError(f"unknown lossy parameterization {kind!r}")
    _require_complete(network)
    users = sorted(network.universe)
    alpha = {}
    for layer in network.layers:
        for user in layer.nodes:
            if kind == "average":
                alpha[(user, layer.layer_index)] = 1.0
            elif kind == "easiness":
                alpha[(user, layer.layer_index)] = easiness(network, user, layer.layer_index, floor)
            else:
                alpha[(user, layer.layer_index)] = involvement(network, user, layer.layer_index, floor)
    thresholds = {}
    for user in users:
        total = 0.0
        for layer in network.layers:
            if user in layer.nodes:
                total += alpha[(user, layer.layer_index)] * layer.thresholds[user]
        thresholds[user] = total
    folded = {}
    for layer in network.layers:
        for (src, dst), weight in layer.edges.items():
            folded[(src, dst)] = folded.get((src, dst), 0.0) + alpha[(dst, layer.layer_index)] * weight
    edges = [(src, dst, w) for (src, dst), w in sorted(folded.items()) if w > 0.0]
    kinds = {user: NodeKind(USER_VERTEX, user) for user in users}
    graph = InfluenceGraph(users, edges, thresholds, None)
    identity = {user: user for user in users}
    return CoupledNetwork(graph, kinds, dict(identity), dict(identity), 1, "lossy-" + kind, network.k, len(users))


def couple(network, scheme, model_kind="linear_threshold", floor=1.0):
    """Dispatch by scheme name (see COUPLING_SCHEMES)."""
    if scheme == "clique":
        return couple_clique_lossless(network, model_kind)
    if scheme == "star":
        return couple_star_lossless(network, model_kind)
    if scheme == "reduced-clique":
        return couple_reduced(network, "clique", model_kind)
    if scheme == "reduced-star":
        return couple_reduced(network, "star", model_kind)
    if scheme.startswith("lossy-"):
        return couple_lossy(network, scheme[len("lossy-"):], floor)
    raise ValueError(f"unknown coupling scheme {scheme!r}")


def map_nodes_to_users(coupled, nodes):
    """Image of a node set under the user<->node bijection F.

    Every node must be in F's domain (gateways for lossless schemes,
    user vertices for reduced and lossy ones); selecting e.g. a
    representative is an error.
    """
    users = set()
    for node in nodes:
        if node not in coupled.user_of:
            raise ValueError(f"node {node!r} is not in the user mapping domain")
        users.add(coupled.user_of[node])
    return users


def write_coupled(coupled, edges_stream, manifest_stream):
    """Write a coupled network as an edge list plus a node manifest CSV.

    The edge list uses the layer-file format; the manifest carries one
    row per node: node_id,kind,user_id,layer,threshold,weight.
    """
    graph = coupled.graph
    lines = []
    for iu, targets in enumerate(graph.out):
        src = graph.node_ids[iu]
        for iv, weight in targets:
            lines.append((src, graph.node_ids[iv], weight))
    for src, dst, weight in sorted(lines):
        edges_stream.write(f"{src} {dst} {weight!r}\n")
    writer = csv.writer(manifest_stream, lineterminator="\n")
    writer.writerow(["node_id", "kind", "user_id", "layer", "threshold", "weight"])
    for i, node in enumerate(graph.node_ids):
        kind = coupled.kinds[node]
        writer.writerow([
            node,
            kind.kind,
            kind.user,
            "" if kind.layer is None else kind.layer,
            repr(graph.theta[i]),
            repr(graph.node_weight[i]),
        ])


def read_coupled(edge_lines, manifest_rows):
    """Rebuild (graph, kinds, user_of) from exported edge and manifest data.

    ``manifest_rows`` is an iterable of CSV rows including the header.
    The seedable domain is recovered from the kind column (gateway and
    user vertices).
    """
    reader = csv.reader(iter(manifest_rows))
    header = next(reader)
    expected = ["node_id", "kind", "user_id", "layer", "threshold", "weight"]
    if header != expected:
        raise ValueError(f"unexpected manifest header {header!r}")
    nodes, thresholds, weights, kinds, user_of = [], {}, {}, {}, {}
    for row in reader:
        node, kind, user, layer, theta, weight = row
        nodes.append(node)
        thresholds[node] = float(theta)
        weights[node] = float(weight)
        kinds[node] = NodeKind(kind, user, int(layer) if layer else None)
        if kind in (GATEWAY, USER_VERTEX):
            user_of[node] = user
    edges = []
    for line_no, raw in enumerate(edge_lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"line {line_no}: expected 'src dst weight'")
        edges.append((parts[0], parts[1], float(parts[2])))
    graph = InfluenceGraph(nodes, edges, thresholds, weights)
    return graph, kinds, user_of

"""Plan generation: sequential union-find joins and community-based parallel plans."""

from __future__ import annotations

import enum
import heapq
import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import networkx as nx

from .connectivity import ConnectivityGraph, Edge
from .wiring import BlackBox, JoinBox, Plan

log = logging.getLogger(__name__)

# one level of black boxes; the recursion hook is intentionally fixed
PARTITION_DEPTH = 1

_BETWEENNESS_TIE = 1e-9


class PlanningError(Exception):
    pass


class ConfigError(Exception):
    pass


class Strategy(enum.Enum):
    SEQUENTIAL = "sequential"
    PARALLEL = "parallel"


class CommunityMethod(enum.Enum):
    GIRVAN_NEWMAN = "girvan-newman"
    LEIDEN = "leiden"


@dataclass(frozen=True)
class PlannerConfig:
    strategy: Strategy = Strategy.SEQUENTIAL
    community_method: CommunityMethod = CommunityMethod.GIRVAN_NEWMAN
    target_communities: int | None = None
    seed: int = 0
    resolution: float = 1.0
    raw_edge_order: bool = False

    def __post_init__(self) -> None:
        if self.target_communities is not None and self.target_communities < 2:
            raise ConfigError("target_communities must be at least 2")


@dataclass(frozen=True)
class Partition:
    communities: tuple[frozenset[int], ...]
    method: CommunityMethod
    seed: int = 0

    def community_of(self, node: int) -> int:
        for i, c in enumerate(self.communities):
            if node in c:
                return i
        raise KeyError(node)


class _UnionFind:
    def __init__(self, items: Iterable[int]) -> None:
        self.parent = {i: i for i in items}
        self.members = {i: frozenset([i]) for i in self.parent}

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if len(self.members[ra]) < len(self.members[rb]):
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.members[ra] = self.members[ra] | self.members.pop(rb)


def topological_order(g: ConnectivityGraph) -> list[int]:
    """Kahn's algorithm with a min-heap, so ties go to the smallest node id."""
    indeg = {n: len(g.predecessors[n]) for n in g.nodes}
    heap = [n for n, k in indeg.items() if k == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        n = heapq.heappop(heap)
        order.append(n)
        for m in g.successors[n]:
            indeg[m] -= 1
            if indeg[m] == 0:
                heapq.heappush(heap, m)
    if len(order) != len(g.nodes):
        raise PlanningError("connectivity graph has a cycle")
    return order


def ordered_edges(g: ConnectivityGraph, raw: bool = False) -> list[Edge]:
    """Edges sorted lexicographically by the topological indices of their ends."""
    if raw:
        return sorted(g.edges)
    index = {n: i for i, n in enumerate(topological_order(g))}
    return sorted(g.edges, key=lambda e: (index[e[0]], index[e[1]]))


def _scan_joins(wires: dict[int, frozenset[int]], edges: Sequence[tuple[int, int, Edge]],
                first_id: int) -> tuple[list[JoinBox], _UnionFind]:
    """Join the current groups at both ends of each edge, in order.

    ``wires`` maps a group key to its starting member set; ``edges`` are
    ``(key_a, key_b, justifying_edge)`` triples.
    """
    uf = _UnionFind(wires)
    current = dict(wires)
    joins: list[JoinBox] = []
    for ka, kb, edge in edges:
        ra, rb = uf.find(ka), uf.find(kb)
        if ra == rb:
            continue
        box = JoinBox.make(first_id + len(joins), current[ra], current[rb], [edge])
        uf.union(ra, rb)
        root = uf.find(ra)
        current[root] = box.output
        joins.append(box)
    return joins, uf


def sequential_plan(g: ConnectivityGraph, raw_edge_order: bool = False, name: str | None = None) -> Plan:
    """Join sub-assemblies edge by edge in topological edge order."""
    if not g.nodes:
        raise PlanningError("empty connectivity graph")
    edges = ordered_edges(g, raw_edge_order)
    joins, uf = _scan_joins({n: frozenset([n]) for n in g.nodes}, [(a, b, (a, b)) for a, b in edges], 1)
    if len(uf.members) != 1:
        raise PlanningError(f"model is not a single assembly ({len(uf.members)} loose parts)")
    return Plan.assembly(joins, g.nodes, name=g.name if name is None else name, grounds=g.grounds)


# --- community detection ---------------------------------------------------


def _partition_from_groups(g: ConnectivityGraph, groups: Iterable[Iterable[int]],
                           method: CommunityMethod, seed: int) -> Partition:
    """Attach ground nodes to their brick's community and order communities."""
    comms = [set(c) for c in groups]
    where = {b: i for i, c in enumerate(comms) for b in c}
    for ground in g.grounds:
        comms[where[g.ground_of(ground)]].add(ground)
    ordered = sorted((frozenset(c) for c in comms), key=min)
    return Partition(tuple(ordered), method, seed)


def _max_betweenness_edge(graph: nx.Graph) -> tuple[int, int]:
    scores = nx.edge_betweenness_centrality(graph, normalized=False)
    top = max(scores.values())
    candidates = [tuple(sorted(e)) for e, s in scores.items() if s >= top - _BETWEENNESS_TIE * max(1.0, top)]
    return min(candidates)


def girvan_newman_removals(g: ConnectivityGraph) -> list[tuple[tuple[int, int], list[frozenset[int]]]]:
    """Full Girvan-Newman dendrogram on the undirected brick graph.

    Returns one ``(removed_edge, components_after)`` entry per removal.
    Betweenness ties go to the smallest ``(lo, hi)`` pair.
    """
    work = g.brick_graph()
    steps = []
    while work.number_of_edges():
        edge = _max_betweenness_edge(work)
        work.remove_edge(*edge)
        comps = sorted((frozenset(c) for c in nx.connected_components(work)), key=min)
        steps.append((edge, comps))
    return steps


def girvan_newman(g: ConnectivityGraph, target: int | None = None) -> list[frozenset[int]]:
    brick_graph = g.brick_graph()
    initial = sorted((frozenset(c) for c in nx.connected_components(brick_graph)), key=min)
    if target is not None:
        if len(initial) >= target:
            return initial
        work = brick_graph.copy()
        comps = initial
        while len(comps) < target:
            work.remove_edge(*_max_betweenness_edge(work))
            comps = sorted((frozenset(c) for c in nx.connected_components(work)), key=min)
        return comps
    if brick_graph.number_of_edges() == 0:
        # modularity is undefined without edges
        return initial
    best, best_q = initial, nx.community.modularity(brick_graph, initial)
    last_count = len(initial)
    for _, comps in girvan_newman_removals(g):
        if len(comps) == last_count:
            continue
        last_count = len(comps)
        q = nx.community.modularity(brick_graph, comps)
        if q > best_q + 1e-12:
            best, best_q = comps, q
    return best


def leiden(g: ConnectivityGraph, seed: int = 0, resolution: float = 1.0) -> list[frozenset[int]]:
    import igraph as ig
    import leidenalg

    bricks = list(g.bricks)
    index = {b: i for i, b in enumerate(bricks)}
    edges = [(index[a], index[b]) for a, b in g.brick_graph().edges()]
    graph = ig.Graph(n=len(bricks), edges=sorted(tuple(sorted(e)) for e in edges))
    part = leidenalg.find_partition(
        graph,
        leidenalg.RBConfigurationVertexPartition,
        resolution_parameter=resolution,
        n_iterations=-1,
        seed=seed,
    )
    groups: dict[int, set[int]] = {}
    for vertex, label in enumerate(part.membership):
        groups.setdefault(label, set()).add(bricks[vertex])
    return sorted((frozenset(c) for c in groups.values()), key=min)


def detect_communities(g: ConnectivityGraph, cfg: PlannerConfig) -> Partition:
    if cfg.target_communities is not None and cfg.target_communities > len(g.bricks):
        raise ConfigError(
            f"cannot split {len(g.bricks)} bricks into {cfg.target_communities} communities"
        )
    if cfg.community_method is CommunityMethod.GIRVAN_NEWMAN:
        groups = girvan_newman(g, cfg.target_communities)
    else:
        if cfg.target_communities is not None:
            log.warning("leiden ignores target_communities; using modularity optimum")
        groups = leiden(g, cfg.seed, cfg.resolution)
    return _partition_from_groups(g, groups, cfg.community_method, cfg.seed)


# --- parallel planning -----------------------------------------------------


def _community_parts(g: ConnectivityGraph, p: Partition, warn: bool = True) -> list[frozenset[int]]:
    """Communities split into their weakly connected pieces."""
    covered = frozenset().union(*p.communities) if p.communities else frozenset()
    if covered != frozenset(g.nodes) or sum(map(len, p.communities)) != len(g.nodes):
        raise PlanningError("partition does not cover the graph exactly once")
    parts = []
    for i, comm in enumerate(p.communities):
        pieces = g.subgraph(comm).weak_components()
        if len(pieces) > 1 and warn:
            log.warning("community %d is disconnected; splitting into %d black boxes", i + 1, len(pieces))
        parts.extend(pieces)
    return parts


def community_grounded_graph(g: ConnectivityGraph, p: Partition, warn: bool = True) -> ConnectivityGraph:
    """``g`` plus a construction-area ground under every brick that has no
    supporter inside its own community.

    These extra grounds are where floating sub-assemblies get started;
    their ids continue after the largest node id, in community order.
    """
    next_id = max(g.nodes) + 1
    new_edges: list[Edge] = []
    new_grounds: list[int] = []
    for part in _community_parts(g, p, warn):
        for brick in sorted(n for n in part if not g.is_ground(n)):
            if not any(pred in part for pred in g.predecessors[brick]):
                new_edges.append((next_id, brick))
                new_grounds.append(next_id)
                next_id += 1
    return ConnectivityGraph(g.name, g.bricks, g.edges + tuple(new_edges), g.grounds + tuple(new_grounds))


def parallel_plan(g: ConnectivityGraph, p: Partition, raw_edge_order: bool = False) -> Plan:
    """Plan each community sequentially, then join the black boxes.

    The result is a plan over ``community_grounded_graph(g, p)``.
    Cross-community joins follow the topological edge order of the inter-
    community edges and are justified by those edges.
    """
    full = community_grounded_graph(g, p)
    parts = _community_parts(full, _extend_partition(full, p), warn=False)
    boxes: list[BlackBox] = []
    for i, part in enumerate(parts, start=1):
        sub = full.subgraph(part, name=f"{g.name}/C{i}")
        inner = sequential_plan(sub, raw_edge_order, name=sub.name)
        boxes.append(BlackBox.wrap(i, f"C{i}", inner))

    owner = {n: i for i, part in enumerate(parts) for n in part}
    cross = [(owner[a], owner[b], (a, b)) for a, b in ordered_edges(full, raw_edge_order)
             if owner[a] != owner[b]]
    joins, uf = _scan_joins({i: part for i, part in enumerate(parts)}, cross, len(boxes) + 1)
    if len(uf.members) != 1:
        raise PlanningError(f"model is not a single assembly ({len(uf.members)} separate pieces)")
    return Plan.assembly([*boxes, *joins], full.nodes, name=g.name, grounds=g.grounds)


def _extend_partition(full: ConnectivityGraph, p: Partition) -> Partition:
    """Assign the construction-area grounds of ``full`` to their bricks' communities."""
    known = frozenset().union(*p.communities)
    comms = [set(c) for c in p.communities]
    for ground in full.grounds:
        if ground not in known:
            comms[p.community_of(full.ground_of(ground))].add(ground)
    return Partition(tuple(frozenset(c) for c in comms), p.method, p.seed)


def make_plan(g: ConnectivityGraph, cfg: PlannerConfig) -> tuple[Plan, ConnectivityGraph, Partition | None]:
    """Plan according to ``cfg``; returns the plan, the graph it is valid
    against, and the partition used (if any)."""
    if cfg.strategy is Strategy.SEQUENTIAL:
        return sequential_plan(g, cfg.raw_edge_order), g, None
    partition = detect_communities(g, cfg)
    plan = parallel_plan(g, partition, cfg.raw_edge_order)
    return plan, community_grounded_graph(g, partition, warn=False), partition

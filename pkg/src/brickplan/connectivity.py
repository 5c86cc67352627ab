"""Connectivity graphs: which brick rests on which, plus ground nodes."""

from __future__ import annotations

import enum
import json
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

from .ldraw import LegoObject, ModelBOM, faces, oriented_footprint

Edge = tuple[int, int]


class NodeKind(enum.Enum):
    BRICK = "brick"
    GROUND = "ground"


@dataclass(frozen=True)
class ConnectivityGraph:
    """Directed graph over brick and ground nodes.

    Node ids are plain integers: bricks keep their BOM ids, ground nodes are
    numbered after the last brick.  Edges point from supporter to supported.
    """

    name: str
    bricks: tuple[int, ...]
    edges: tuple[Edge, ...]
    grounds: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "bricks", tuple(sorted(self.bricks)))
        object.__setattr__(self, "grounds", tuple(sorted(self.grounds)))
        object.__setattr__(self, "edges", tuple(sorted(set(self.edges))))

    @cached_property
    def nodes(self) -> tuple[int, ...]:
        return tuple(sorted(self.bricks + self.grounds))

    @cached_property
    def _ground_set(self) -> frozenset[int]:
        return frozenset(self.grounds)

    def kind(self, node: int) -> NodeKind:
        return NodeKind.GROUND if node in self._ground_set else NodeKind.BRICK

    def is_ground(self, node: int) -> bool:
        return node in self._ground_set

    @cached_property
    def successors(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[int]] = {n: [] for n in self.nodes}
        for lo, hi in self.edges:
            out[lo].append(hi)
        return {n: tuple(v) for n, v in out.items()}

    @cached_property
    def predecessors(self) -> dict[int, tuple[int, ...]]:
        inc: dict[int, list[int]] = {n: [] for n in self.nodes}
        for lo, hi in self.edges:
            inc[hi].append(lo)
        return {n: tuple(v) for n, v in inc.items()}

    def ground_of(self, ground: int) -> int:
        """The brick a ground node supports."""
        (brick,) = self.successors[ground]
        return brick

    def undirected_edges(self) -> frozenset[frozenset[int]]:
        return frozenset(frozenset(e) for e in self.edges)

    def subgraph(self, nodes: Iterable[int], name: str | None = None) -> "ConnectivityGraph":
        keep = set(nodes)
        return ConnectivityGraph(
            name=self.name if name is None else name,
            bricks=tuple(n for n in self.bricks if n in keep),
            edges=tuple(e for e in self.edges if e[0] in keep and e[1] in keep),
            grounds=tuple(n for n in self.grounds if n in keep),
        )

    def brick_graph(self):
        """Undirected networkx graph over bricks only."""
        import networkx as nx

        g = nx.Graph()
        g.add_nodes_from(self.bricks)
        g.add_edges_from(e for e in self.edges if not (self.is_ground(e[0]) or self.is_ground(e[1])))
        return g

    def weak_components(self) -> list[frozenset[int]]:
        parent = {n: n for n in self.nodes}

        def find(n: int) -> int:
            while parent[n] != n:
                parent[n] = parent[parent[n]]
                n = parent[n]
            return n

        for lo, hi in self.edges:
            a, b = find(lo), find(hi)
            if a != b:
                parent[max(a, b)] = min(a, b)
        groups: dict[int, set[int]] = defaultdict(set)
        for n in self.nodes:
            groups[find(n)].add(n)
        return sorted((frozenset(g) for g in groups.values()), key=min)

    def to_json(self) -> str:
        data = {
            "name": self.name,
            "nodes": [{"id": n, "kind": self.kind(n).value} for n in self.nodes],
            "edges": [list(e) for e in self.edges],
        }
        return json.dumps(data, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ConnectivityGraph":
        data = json.loads(text)
        bricks = [n["id"] for n in data["nodes"] if n["kind"] == NodeKind.BRICK.value]
        grounds = [n["id"] for n in data["nodes"] if n["kind"] == NodeKind.GROUND.value]
        return cls(
            name=data.get("name", ""),
            bricks=tuple(bricks),
            edges=tuple((lo, hi) for lo, hi in data["edges"]),
            grounds=tuple(grounds),
        )

    def to_dot(self) -> str:
        lines = [f"digraph {_dot_id(self.name or 'connectivity')} {{", "  rankdir=BT;"]
        lines.append('  node [shape=circle, fontname="Helvetica"];')
        for n in self.nodes:
            if self.is_ground(n):
                lines.append(f'  {n} [shape=invtriangle, style=filled, fillcolor="#bbbbbb"];')
            else:
                lines.append(f"  {n};")
        for lo, hi in self.edges:
            lines.append(f"  {lo} -> {hi};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _dot_id(name: str) -> str:
    return json.dumps(name)


def vertical_contact(a: LegoObject, b: LegoObject) -> bool:
    """True when ``b`` sits directly on ``a`` with overlapping footprints.

    Touching only along an edge or corner does not count: the overlap tests
    are strict.
    """
    a_top, _ = faces(a)
    _, b_bottom = faces(b)
    if a_top != b_bottom:
        return False
    a_len, a_wid = oriented_footprint(a)
    b_len, b_wid = oriented_footprint(b)
    return (
        abs(a.x - b.x) * 2 < a_len + b_len
        and abs(a.z - b.z) * 2 < a_wid + b_wid
    )


def build_graph(bom: ModelBOM) -> ConnectivityGraph:
    """Edges for every vertically touching pair, without ground nodes.

    Bricks are bucketed by bottom face so that only candidates on the exact
    face level of each top face are tested.
    """
    by_bottom: dict = defaultdict(list)
    for obj in bom.objects:
        by_bottom[faces(obj)[1]].append(obj)
    edges = []
    for a in bom.objects:
        for b in by_bottom.get(faces(a)[0], ()):
            if b.id != a.id and vertical_contact(a, b):
                edges.append((a.id, b.id))
    return ConnectivityGraph(
        name=bom.name,
        bricks=tuple(o.id for o in bom.objects),
        edges=tuple(edges),
    )


def add_ground_nodes(g: ConnectivityGraph, first_id: int | None = None) -> ConnectivityGraph:
    """Attach one fresh ground node to every node without predecessors.

    New ids continue after the largest existing node id (or start at
    ``first_id``), assigned in ascending order of the grounded brick.
    """
    if first_id is None:
        first_id = max(g.nodes, default=0) + 1
    parentless = [n for n in g.bricks if not g.predecessors[n]]
    new_grounds = tuple(range(first_id, first_id + len(parentless)))
    return ConnectivityGraph(
        name=g.name,
        bricks=g.bricks,
        edges=g.edges + tuple(zip(new_grounds, parentless)),
        grounds=g.grounds + new_grounds,
    )


def connectivity_graph(bom: ModelBOM) -> ConnectivityGraph:
    """Build the grounded connectivity graph of a model."""
    return add_ground_nodes(build_graph(bom))

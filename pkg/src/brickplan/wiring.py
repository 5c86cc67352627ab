"""Assembly plans as string diagrams.

Wires are sub-assemblies (frozensets of node ids).  A ``JoinBox`` consumes
two disjoint wires and produces their union; a ``BlackBox`` hides a whole
sub-plan behind a single box.  Producer/consumer links are derived from the
wires themselves: a box's input is produced by the box whose output is the
same set, or it is one of the plan's own inputs.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Union

from .connectivity import ConnectivityGraph

Wire = frozenset  # frozenset[int]
Edge = tuple[int, int]


class PlanStructureError(Exception):
    pass


def wire_key(w: Iterable[int]) -> tuple[int, ...]:
    """Canonical ordering key for wires: by smallest member, then the rest."""
    return tuple(sorted(w))


@dataclass(frozen=True)
class JoinBox:
    id: int
    inputs: tuple[Wire, Wire]
    output: Wire
    justifying_edges: tuple[Edge, ...] = ()

    kind = "join"

    @classmethod
    def make(cls, box_id: int, a: Iterable[int], b: Iterable[int], edges: Iterable[Edge] = ()) -> "JoinBox":
        a, b = frozenset(a), frozenset(b)
        first, second = sorted((a, b), key=wire_key)
        return cls(box_id, (first, second), a | b, tuple(sorted(edges)))


@dataclass(frozen=True)
class BlackBox:
    id: int
    label: str
    inner: "Plan"
    inputs: tuple[Wire, ...]
    output: Wire

    kind = "black"

    @classmethod
    def wrap(cls, box_id: int, label: str, inner: "Plan") -> "BlackBox":
        if len(inner.outputs) != 1:
            raise PlanStructureError(f"black box {label!r}: inner plan must have one output")
        return cls(box_id, label, inner, inner.inputs, inner.outputs[0])


Box = Union[JoinBox, BlackBox]


@dataclass(frozen=True)
class WireLink:
    members: Wire
    producer: int | None
    consumer: int | None


@dataclass(frozen=True)
class Plan:
    """A string diagram from ``inputs`` to ``outputs``.

    A full assembly plan has the singletons of every node as inputs and the
    whole node set as its single output; sub-plans (e.g. the two-strand
    example f;g and h;k) may have several output wires.
    """

    boxes: tuple[Box, ...]
    inputs: tuple[Wire, ...]
    outputs: tuple[Wire, ...]
    name: str = ""
    grounds: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        object.__setattr__(self, "inputs", tuple(sorted(map(frozenset, self.inputs), key=wire_key)))
        object.__setattr__(self, "outputs", tuple(sorted(map(frozenset, self.outputs), key=wire_key)))
        object.__setattr__(self, "grounds", frozenset(self.grounds))

    @classmethod
    def assembly(cls, boxes: Iterable[Box], nodes: Iterable[int], name: str = "",
                 grounds: Iterable[int] = ()) -> "Plan":
        nodes = frozenset(nodes)
        return cls(tuple(boxes), tuple(frozenset([n]) for n in nodes), (nodes,), name, frozenset(grounds))

    @property
    def output(self) -> Wire:
        if len(self.outputs) != 1:
            raise PlanStructureError("plan has more than one output wire")
        return self.outputs[0]

    @cached_property
    def box_ids(self) -> tuple[int, ...]:
        return tuple(b.id for b in self.boxes)

    @cached_property
    def _by_id(self) -> dict[int, Box]:
        return {b.id: b for b in self.boxes}

    def box(self, box_id: int) -> Box:
        return self._by_id[box_id]

    @cached_property
    def producers(self) -> dict[Wire, int]:
        """Wire -> id of the (first) box producing it."""
        out: dict[Wire, int] = {}
        for b in self.boxes:
            out.setdefault(b.output, b.id)
        return out

    @cached_property
    def dependencies(self) -> dict[int, tuple[int, ...]]:
        """Box id -> ids of the boxes whose outputs it consumes."""
        deps = {}
        for b in self.boxes:
            deps[b.id] = tuple(sorted({self.producers[w] for w in b.inputs if w in self.producers}))
        return deps

    @cached_property
    def dependents(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[int]] = {i: [] for i in self.box_ids}
        for b, deps in self.dependencies.items():
            for d in deps:
                out[d].append(b)
        return {k: tuple(sorted(v)) for k, v in out.items()}

    @property
    def is_flat(self) -> bool:
        return all(isinstance(b, JoinBox) for b in self.boxes)

    @cached_property
    def nodes(self) -> frozenset[int]:
        return frozenset().union(*self.inputs) if self.inputs else frozenset()

    def wires(self) -> list[WireLink]:
        consumers: dict[Wire, int] = {}
        for b in self.boxes:
            for w in b.inputs:
                consumers.setdefault(w, b.id)
        links = [WireLink(w, None, consumers.get(w)) for w in self.inputs]
        links += [WireLink(b.output, b.id, consumers.get(b.output)) for b in self.boxes]
        return links

    def critical_path(self) -> int:
        """Number of boxes on the longest dependency chain."""
        depth: dict[int, int] = {}
        for b in topological_boxes(self):
            depth[b] = 1 + max((depth[d] for d in self.dependencies[b]), default=0)
        return max(depth.values(), default=0)

    def brick_count(self, graph: ConnectivityGraph | None = None) -> int:
        members = frozenset().union(*self.outputs) if self.outputs else frozenset()
        if graph is None:
            return len(members - self.grounds)
        return sum(1 for n in members if n in graph.nodes and not graph.is_ground(n))


def topological_boxes(plan: Plan) -> list[int]:
    """Box ids in dependency order (ties by id).  Raises on cycles."""
    import heapq

    indeg = {b: len(d) for b, d in plan.dependencies.items()}
    heap = [b for b, k in indeg.items() if k == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        b = heapq.heappop(heap)
        order.append(b)
        for nxt in plan.dependents[b]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                heapq.heappush(heap, nxt)
    if len(order) != len(indeg):
        raise PlanStructureError("box dependency graph has a cycle")
    return order


def flatten(plan: Plan) -> Plan:
    """Splice every black box's inner plan in place of the box.

    Boxes are renumbered 1..n in traversal order when anything was spliced;
    a plan that is already flat is returned unchanged.
    """
    if plan.is_flat:
        return plan
    joins: list[JoinBox] = []

    def splice(p: Plan) -> None:
        for b in p.boxes:
            if isinstance(b, JoinBox):
                joins.append(JoinBox(len(joins) + 1, b.inputs, b.output, b.justifying_edges))
                continue
            if set(b.inner.inputs) != set(b.inputs) or b.inner.outputs != (b.output,):
                raise PlanStructureError(f"black box {b.id} ({b.label}): signature does not match inner plan")
            splice(b.inner)

    splice(plan)
    return Plan(tuple(joins), plan.inputs, plan.outputs, plan.name, plan.grounds)


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "plan is valid"
        return "\n".join(f"- {v}" for v in self.violations)


def validate_plan(plan: Plan, g: ConnectivityGraph) -> ValidationReport:
    """Check a plan against the connectivity graph; every problem is reported."""
    report = ValidationReport()
    bad = report.violations
    try:
        flat = flatten(plan)
    except PlanStructureError as exc:
        bad.append(f"structure: {exc}")
        return report

    nodes = frozenset(g.nodes)
    links = g.undirected_edges()
    expected_inputs = {frozenset([n]) for n in nodes}
    if set(flat.inputs) != expected_inputs or len(flat.inputs) != len(expected_inputs):
        missing = sorted(n for n in nodes if frozenset([n]) not in flat.inputs)
        extra = sorted(wire_key(w) for w in flat.inputs if w not in expected_inputs)
        bad.append(f"plan inputs are not the singletons of V (missing {missing}, extra {extra})")
    if len(flat.outputs) != 1 or flat.outputs[0] != nodes:
        got = [len(w) for w in flat.outputs]
        bad.append(f"output != V: plan outputs have sizes {got}, |V| = {len(nodes)}")

    produced = Counter(b.output for b in flat.boxes)
    for w, k in produced.items():
        if k > 1:
            bad.append(f"wire {wire_key(w)} produced {k} times")
    consumed = Counter(w for b in flat.boxes for w in b.inputs)
    available = set(flat.inputs) | set(produced)
    for w, k in consumed.items():
        if k > 1:
            bad.append(f"wire {wire_key(w)} consumed {k} times")
        if w not in available:
            bad.append(f"wire {wire_key(w)} is consumed but never produced")
    for w in flat.inputs:
        if w not in consumed and w not in flat.outputs:
            bad.append(f"input wire {wire_key(w)} is never used")
    for w in produced:
        if w not in consumed and w not in flat.outputs:
            bad.append(f"wire {wire_key(w)} is produced but never used")

    for b in flat.boxes:
        tag = f"box {b.id}"
        if len(b.inputs) != 2:
            bad.append(f"{tag}: join must have exactly 2 inputs")
            continue
        a, c = b.inputs
        if not a or not c:
            bad.append(f"{tag}: empty input wire")
        if a & c:
            bad.append(f"{tag}: inputs overlap on {sorted(a & c)}")
        if b.output != a | c:
            bad.append(f"{tag}: output is not the union of its inputs")
        if (a | c) - nodes:
            bad.append(f"{tag}: unknown nodes {sorted((a | c) - nodes)}")
        if not any(frozenset((x, y)) in links for x in a for y in c):
            bad.append(f"{tag}: no justifying edge between {wire_key(a)} and {wire_key(c)}")
        for e in b.justifying_edges:
            if frozenset(e) not in links:
                bad.append(f"{tag}: recorded edge {e} is not in the graph")
            elif not ((e[0] in a and e[1] in c) or (e[0] in c and e[1] in a)):
                bad.append(f"{tag}: recorded edge {e} does not span the two inputs")

    try:
        topological_boxes(flat)
    except PlanStructureError as exc:
        bad.append(str(exc))
    return report


# --- serialization ---------------------------------------------------------


def plan_to_dict(plan: Plan) -> dict:
    boxes = []
    for b in plan.boxes:
        rec: dict = {
            "id": b.id,
            "kind": b.kind,
            "inputs": [wire_key(w) for w in b.inputs],
            "output": wire_key(b.output),
        }
        if isinstance(b, JoinBox):
            rec["edges"] = [list(e) for e in b.justifying_edges]
        else:
            rec["label"] = b.label
            rec["inner"] = plan_to_dict(b.inner)
        boxes.append(rec)
    return {
        "name": plan.name,
        "grounds": sorted(plan.grounds),
        "boxes": boxes,
        "plan_inputs": [wire_key(w) for w in plan.inputs],
        "plan_output": [wire_key(w) for w in plan.outputs],
    }


def plan_from_dict(data: dict) -> Plan:
    boxes: list[Box] = []
    for rec in data["boxes"]:
        inputs = tuple(frozenset(w) for w in rec["inputs"])
        if rec["kind"] == "join":
            if len(inputs) != 2:
                raise PlanStructureError(f"join box {rec['id']} needs two inputs")
            boxes.append(JoinBox(rec["id"], inputs, frozenset(rec["output"]),
                                 tuple(tuple(e) for e in rec.get("edges", ()))))
        elif rec["kind"] == "black":
            boxes.append(BlackBox(rec["id"], rec.get("label", ""), plan_from_dict(rec["inner"]),
                                  inputs, frozenset(rec["output"])))
        else:
            raise PlanStructureError(f"unknown box kind {rec['kind']!r}")
    return Plan(
        tuple(boxes),
        tuple(frozenset(w) for w in data["plan_inputs"]),
        tuple(frozenset(w) for w in data["plan_output"]),
        data.get("name", ""),
        frozenset(data.get("grounds", ())),
    )


def plan_to_json(plan: Plan) -> str:
    return json.dumps(plan_to_dict(plan), separators=(",", ":")) + "\n"


def plan_from_json(text: str) -> Plan:
    return plan_from_dict(json.loads(text))


def _wire_label(w: Wire) -> str:
    if len(w) <= 3:
        return ",".join(map(str, sorted(w)))
    return f"{len(w)} parts"


def plan_to_dot(plan: Plan, graph: ConnectivityGraph | None = None) -> str:
    """Graphviz rendering; black boxes appear as filled nodes showing brick counts."""
    lines = [f"digraph {json.dumps(plan.name or 'plan')} {{", "  rankdir=LR;",
             '  node [fontname="Helvetica"];']
    for i, w in enumerate(plan.inputs, start=1):
        lines.append(f'  in{i} [shape=point, xlabel="{_wire_label(w)}"];')
    for i, w in enumerate(plan.outputs, start=1):
        lines.append(f"  out{i} [shape=point];")
    for b in plan.boxes:
        if isinstance(b, JoinBox):
            lines.append(f'  b{b.id} [shape=box, style=rounded, label="join {b.id}"];')
        else:
            count = b.inner.brick_count(graph)
            lines.append(f"  subgraph cluster_b{b.id} {{")
            lines.append(f"    label={json.dumps(b.label)};")
            lines.append(f'    b{b.id} [shape=box, style=filled, fillcolor=black, fontcolor=white, label="{count}"];')
            lines.append("  }")
    source = {w: f"in{i}" for i, w in enumerate(plan.inputs, start=1)}
    for b in plan.boxes:
        source.setdefault(b.output, f"b{b.id}")
    for b in plan.boxes:
        for w in b.inputs:
            src = source.get(w)
            if src is not None:
                lines.append(f'  {src} -> b{b.id} [label="{_wire_label(w)}"];')
    for i, w in enumerate(plan.outputs, start=1):
        src = source.get(w)
        if src is not None:
            lines.append(f'  {src} -> out{i} [label="{_wire_label(w)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_plan(plan: Plan, fmt: str = "json", graph: ConnectivityGraph | None = None) -> str:
    if fmt == "json":
        return plan_to_json(plan)
    if fmt == "dot":
        return plan_to_dot(plan, graph)
    raise ValueError(f"unknown plan format {fmt!r}")

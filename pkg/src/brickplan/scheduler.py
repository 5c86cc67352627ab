"""Turn a plan into a series/parallel expression and linearize it."""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import zip_longest
from typing import Iterable, Mapping, Sequence, Union

from .wiring import Plan, PlanStructureError, topological_boxes


@dataclass(frozen=True)
class Leaf:
    box: int


@dataclass(frozen=True)
class Compose:
    """Sequential composition: children run one after the other."""

    children: tuple["Expression", ...]


@dataclass(frozen=True)
class Tensor:
    """Parallel composition of independent children."""

    children: tuple["Expression", ...]


Expression = Union[Leaf, Compose, Tensor]


def seq(*children: Expression) -> Expression:
    return _nary(Compose, children)


def par(*children: Expression) -> Expression:
    return _nary(Tensor, children)


def _nary(cls, children: Iterable[Expression]) -> Expression:
    flat: list[Expression] = []
    for c in children:
        flat.extend(c.children if isinstance(c, cls) else (c,))
    if len(flat) == 1:
        return flat[0]
    return cls(tuple(flat))


def _components(boxes: Sequence[int], deps: Mapping[int, Sequence[int]]) -> list[list[int]]:
    members = set(boxes)
    parent = {b: b for b in boxes}

    def find(b: int) -> int:
        while parent[b] != b:
            parent[b] = parent[parent[b]]
            b = parent[b]
        return b

    for b in boxes:
        for d in deps[b]:
            if d in members:
                ra, rb = find(b), find(d)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for b in sorted(boxes):
        groups.setdefault(find(b), []).append(b)
    return sorted(groups.values(), key=lambda g: g[0])


def _build(boxes: list[int], deps: Mapping[int, Sequence[int]]) -> Expression:
    # peel source layers iteratively; recurse only where the DAG falls apart
    chain: list[Expression] = []
    while True:
        if len(boxes) == 1:
            chain.append(Leaf(boxes[0]))
            break
        comps = _components(boxes, deps)
        if len(comps) > 1:
            chain.append(par(*(_build(c, deps) for c in comps)))
            break
        members = set(boxes)
        sources = [b for b in boxes if not any(d in members for d in deps[b])]
        if len(sources) == len(boxes) or not sources:
            raise PlanStructureError("no progress while peeling source boxes")
        chain.append(par(*(Leaf(b) for b in sources)))
        taken = set(sources)
        boxes = [b for b in boxes if b not in taken]
    return seq(*chain)


def diagram_to_expression(plan: Plan) -> Expression:
    """Expression for the plan's box-dependency DAG.

    Independent components become a tensor ordered by smallest box id; a
    connected DAG becomes its layer of source boxes composed with the
    expression for the remainder.  Black boxes are treated as single leaves.
    """
    if not plan.boxes:
        raise PlanStructureError("plan has no boxes")
    topological_boxes(plan)  # raises on cycles
    return _build(sorted(plan.box_ids), plan.dependencies)


def linearize(expr: Expression) -> list[int]:
    if isinstance(expr, Leaf):
        return [expr.box]
    parts = [linearize(c) for c in expr.children]
    if isinstance(expr, Compose):
        return [b for part in parts for b in part]
    # round robin, one element per child per round
    _skip = object()
    return [b for rnd in zip_longest(*parts, fillvalue=_skip) for b in rnd if b is not _skip]


def schedule_plan(plan: Plan) -> list[int]:
    return linearize(diagram_to_expression(plan))


def validate_schedule(schedule: Sequence[int], plan: Plan) -> bool:
    """True iff ``schedule`` is a linear extension of the box dependencies."""
    if len(schedule) != len(plan.boxes) or sorted(schedule) != sorted(plan.box_ids):
        return False
    position = {b: i for i, b in enumerate(schedule)}
    return all(position[d] < position[b] for b, deps in plan.dependencies.items() for d in deps)


def leaves(expr: Expression) -> list[int]:
    if isinstance(expr, Leaf):
        return [expr.box]
    return [b for c in expr.children for b in leaves(c)]


def to_sexpr(expr: Expression, names: Mapping[int, str] | None = None) -> str:
    """S-expression text such as ``(seq (par f h) (par g k))``."""
    if isinstance(expr, Leaf):
        return names[expr.box] if names else str(expr.box)
    head = "seq" if isinstance(expr, Compose) else "par"
    return f"({head} " + " ".join(to_sexpr(c, names) for c in expr.children) + ")"


def schedule_to_json(schedule: Sequence[int], plan_id: str = "") -> str:
    return json.dumps({"plan_id": plan_id, "order": list(schedule)}) + "\n"


def schedule_from_json(text: str) -> list[int]:
    return list(json.loads(text)["order"])

"""Shared test helpers: random model generators and independent oracles.

The oracles deliberately avoid the package's own geometry and ordering
helpers so that they can catch mistakes in them.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from brickplan.cli import bundled_model_path
from brickplan.connectivity import ConnectivityGraph, connectivity_graph
from brickplan.ldraw import ModelBOM, default_part_table, load_ldraw, parse_ldraw
from brickplan.wiring import JoinBox, Plan

IDENT = (1, 0, 0, 0, 1, 0, 0, 0, 1)
TURN = (0, 0, 1, 0, 1, 0, -1, 0, 0)
STACK_PARTS = ("3003.dat", "3001.dat", "3004.dat", "3010.dat", "3005.dat", "3002.dat")
ANY_PARTS = STACK_PARTS + ("3020.dat", "3023.dat", "3024.dat", "3034.dat", "3245.dat")


def ldraw_line(part: str, x, y, z, rot=IDENT, color: int = 4) -> str:
    nums = " ".join(str(v) for v in (x, y, z, *rot))
    return f"1 {color} {nums} {part}"


def bundled(name: str) -> ModelBOM:
    return load_ldraw(bundled_model_path(name))


def bundled_graph(name: str) -> ConnectivityGraph:
    return connectivity_graph(bundled(name))


def _box(part: str, x, y, z, rot) -> tuple:
    spec = default_part_table()[part]
    # axis-aligned bounds of the local footprint pushed through the rotation
    xs, zs = [], []
    for lx, lz in itertools.product((-spec.length, spec.length), (-spec.width, spec.width)):
        xs.append(Fraction(rot[0] * lx + rot[2] * lz, 2))
        zs.append(Fraction(rot[6] * lx + rot[8] * lz, 2))
    top = y + spec.origin_offset_y
    return (x + min(xs), x + max(xs), top, top + spec.height, z + min(zs), z + max(zs))


def random_stack_model(rng: random.Random, n_bricks: int, turns: bool = True) -> str:
    """A connected stack of bricks on a 20 LDU grid, returned as LDraw text.

    Each new brick sits directly above or below a random earlier one with a
    stud offset that keeps the footprints overlapping, and never collides
    with a brick on its own layer.
    """
    placed: list[tuple[str, int, int, int, tuple, tuple]] = []

    def collides(box) -> bool:
        return any(
            box[2] < b[3] and b[2] < box[3] and box[0] < b[1] and b[0] < box[1]
            and box[4] < b[5] and b[4] < box[5]
            for *_, b in placed
        )

    first = rng.choice(STACK_PARTS)
    placed.append((first, 0, -24, 0, IDENT, _box(first, 0, -24, 0, IDENT)))
    attempts = 0
    while len(placed) < n_bricks and attempts < 50 * n_bricks:
        attempts += 1
        part = rng.choice(STACK_PARTS)
        rot = rng.choice((IDENT, TURN)) if turns else IDENT
        anchor = rng.choice(placed)
        ax, az = anchor[1], anchor[3]
        layer_y = anchor[2] + rng.choice((-24, 24))
        if layer_y > -24:
            continue
        x = ax + 20 * rng.randint(-2, 2) + (10 if rng.random() < 0.3 else 0)
        z = az + 20 * rng.randint(-1, 1)
        box = _box(part, x, layer_y, z, rot)
        abox = anchor[5]
        if not (box[0] < abox[1] and abox[0] < box[1] and box[4] < abox[5] and abox[4] < box[5]):
            continue
        if collides(box):
            continue
        placed.append((part, x, layer_y, z, rot, box))
    return "\n".join(ldraw_line(p, x, y, z, rot) for p, x, y, z, rot, _ in placed) + "\n"


def random_loose_model(rng: random.Random, n_bricks: int) -> str:
    """Arbitrary (possibly overlapping) placements, with many exact
    face-level coincidences and edge or corner touches."""
    lines = []
    for _ in range(n_bricks):
        part = rng.choice(ANY_PARTS)
        rot = rng.choice((IDENT, TURN, (-1, 0, 0, 0, 1, 0, 0, 0, -1)))
        x = 10 * rng.randint(-8, 8)
        z = 10 * rng.randint(-8, 8)
        y = -8 * rng.randint(0, 12)
        lines.append(ldraw_line(part, x, y, z, rot))
    return "\n".join(lines) + "\n"


def stack_corpus(count: int = 200, max_bricks: int = 25, seed: int = 2024) -> list[ModelBOM]:
    rng = random.Random(seed)
    return [
        parse_ldraw(random_stack_model(rng, rng.randint(1, max_bricks)), name=f"stack{i}")
        for i in range(count)
    ]


def oracle_edges(bom: ModelBOM) -> set[tuple[int, int]]:
    """O(n^2) re-evaluation of the vertical contact predicate."""
    boxes = {}
    for o in bom.objects:
        rot = tuple(v for row in o.rotation for v in row)
        boxes[o.id] = _box(o.part_id, o.x, o.y, o.z, rot)
    edges = set()
    for a, b in itertools.permutations(boxes, 2):
        ba, bb = boxes[a], boxes[b]
        if ba[2] == bb[3] and ba[0] < bb[1] and bb[0] < ba[1] and ba[4] < bb[5] and bb[4] < ba[5]:
            edges.add((a, b))
    return edges


def is_linear_extension_bruteforce(schedule, plan: Plan) -> bool:
    """Enumerate every linear extension of the box order; only for tiny plans."""
    ids = sorted(plan.box_ids)
    assert len(ids) <= 8
    producer = {b.output: b.id for b in plan.boxes}
    before = {(producer[w], b.id) for b in plan.boxes for w in b.inputs if w in producer}
    extensions = {
        perm for perm in itertools.permutations(ids)
        if all(perm.index(x) < perm.index(y) for x, y in before)
    }
    return tuple(schedule) in extensions


def fghk_plan() -> Plan:
    """Two independent two-step chains: f then g, h then k."""
    boxes = (
        JoinBox.make(1, {1}, {2}, [(1, 2)]),
        JoinBox.make(2, {1, 2}, {3}, [(2, 3)]),
        JoinBox.make(3, {4}, {5}, [(4, 5)]),
        JoinBox.make(4, {4, 5}, {6}, [(5, 6)]),
    )
    return Plan(boxes, tuple(frozenset({i}) for i in range(1, 7)),
                (frozenset({1, 2, 3}), frozenset({4, 5, 6})), name="fghk")


FGHK = {1: "f", 2: "g", 3: "h", 4: "k"}


def tower_graph(n: int = 3) -> ConnectivityGraph:
    """ground -> 1 -> 2 -> ... -> n, ground id n + 1."""
    edges = tuple((i, i + 1) for i in range(1, n)) + ((n + 1, 1),)
    return ConnectivityGraph(f"tower{n}", tuple(range(1, n + 1)), edges, (n + 1,))

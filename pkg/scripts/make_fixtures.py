"""Regenerate the bundled LDraw fixture models in src/brickplan/data/models.

Geometry is on the 20 LDU stud grid; layer k (k = 1 on the ground) has its
top face at y = -24 * k.  Run from the repository root.
"""

from __future__ import annotations

from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "src" / "brickplan" / "data" / "models"

IDENT = "1 0 0 0 1 0 0 0 1"
TURN = "0 0 1 0 1 0 -1 0 0"  # local x -> world -z

BRICK_H = 24


def top(layer: int) -> int:
    return -BRICK_H * layer


class Model:
    def __init__(self, title: str) -> None:
        self.title = title
        self.lines: list[str] = []

    def comment(self, text: str) -> None:
        self.lines.append(f"0 // {text}")

    def add(self, part: str, x: float, layer_top: int, z: float, color: int = 4, turned: bool = False) -> None:
        rot = TURN if turned else IDENT
        self.lines.append(f"1 {color} {_num(x)} {layer_top} {_num(z)} {rot} {part}")

    @property
    def count(self) -> int:
        return sum(1 for ln in self.lines if ln.startswith("1 "))

    def write(self, name: str) -> None:
        text = [f"0 {self.title}", f"0 Name: {name}.ldr", *self.lines]
        (OUT / f"{name}.ldr").write_text("\n".join(text) + "\n")
        print(f"{name}.ldr: {self.count} bricks")


def _num(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else str(v)


def pipeline() -> None:
    m = Model("Seven brick pipeline example")
    m.add("3001.dat", 0, top(1), 0, 1)
    m.add("3003.dat", -20, top(2), 0, 14)
    m.add("3001.dat", 40, top(2), 0, 4)
    m.add("3003.dat", -20, top(3), 0, 2)
    m.add("3001.dat", 60, top(3), 0, 15)
    m.add("3001.dat", 80, top(1), 0, 1)
    m.add("3003.dat", 100, top(2), 0, 14)
    m.write("pipeline")


def two_towers() -> None:
    m = Model("Two 2-brick towers bridged by one top brick")
    m.add("3003.dat", 0, top(1), 0, 4)
    m.add("3003.dat", 0, top(2), 0, 4)
    m.add("3003.dat", 80, top(1), 0, 1)
    m.add("3003.dat", 80, top(2), 0, 1)
    m.add("3001.dat", 40, top(3), 0, 14)
    m.write("two_towers")


def bridged_towers() -> None:
    m = Model("Two interlocked towers joined by a single bridging contact")
    m.comment("tower A")
    m.add("3001.dat", 0, top(1), 0, 4)
    m.add("3003.dat", -20, top(2), 0, 4)
    m.add("3003.dat", 20, top(2), 0, 4)
    m.add("3001.dat", 0, top(3), 0, 4)
    m.add("3003.dat", -20, top(4), 0, 4)
    m.add("3001.dat", 60, top(4), 0, 14)  # overhangs onto tower B
    m.add("3001.dat", 0, top(5), 0, 4)
    m.comment("tower B")
    m.add("3001.dat", 120, top(1), 0, 1)
    m.add("3003.dat", 100, top(2), 0, 1)
    m.add("3003.dat", 140, top(2), 0, 1)
    m.add("3001.dat", 120, top(3), 0, 1)
    m.write("bridged_towers")


def columns() -> None:
    m = Model("Columns: four 2x2 columns, two stair beam pairs and a flat roof")
    corners = [(0, 0), (240, 0), (0, 80), (240, 80)]
    for i, (x, z) in enumerate(corners, start=1):
        m.comment(f"column {i}")
        for layer in range(1, 13):
            m.add("3003.dat", x, top(layer), z, 71)
    for z in (0, 80):
        m.comment(f"stair beam pair at z={z}, meeting in a peak brick")
        m.add("3001.dat", 20, top(13), z, 19)
        m.add("3001.dat", 60, top(14), z, 19)
        m.add("3001.dat", 220, top(13), z, 19)
        m.add("3001.dat", 180, top(14), z, 19)
        m.add("3001.dat", 120, top(15), z, 19)
    m.comment("flat roof, three layers")
    for z in (0, 40, 80):
        for x in (40, 120, 200):
            m.add("3001.dat", x, top(16), z, 4)
    for z in (20, 60):
        for x in (40, 120, 200):
            m.add("3001.dat", x, top(17), z, 4)
    for z in (20, 60):
        for x in (80, 160):
            m.add("3001.dat", x, top(18), z, 320)
    assert m.count == 77, m.count
    m.write("columns")


# house: wall cells are 1x1 stud positions; x cells -130..50, z cells -70..70
ONE_BY = {1: "3005.dat", 2: "3004.dat", 3: "3622.dat", 4: "3010.dat",
          6: "3009.dat", 8: "3008.dat", 10: "6111.dat"}
TWO_BY = {2: "3003.dat", 3: "3002.dat", 4: "3001.dat"}


def cx(i: float) -> float:
    return -130 + 20 * i


def cz(j: float) -> float:
    return -70 + 20 * j


def house() -> None:
    m = Model("House: foundation, four walls, two layer roof and a pole")
    m.comment("foundation: two crossed layers of 4x10 bricks")
    for z in (-120, -40, 40, 120):
        m.add("6212.dat", 0, top(1), z, 2)
    for x in (-120, -40, 40, 120):
        m.add("6212.dat", x, top(2), 0, 2, turned=True)

    # (first cell, last cell) runs per layer; ("tall", a, b) is a 1x2x2 brick
    front = {3: [(0, 2), (5, 6), (7, 9)], 4: [(1, 2), (5, 6)], 5: [(0, 2), (5, 6), (9, 9)],
             6: [(1, 8)], 7: [(0, 9)]}
    back = {3: [(0, 3), (4, 9)], 4: [(1, 8)], 5: [(0, 5), (6, 9)], 6: [(1, 4), (5, 8)], 7: [(0, 9)]}
    left = {3: [(1, 6)], 4: [(0, 1), (3, 4), (6, 7)], 5: [(1, 1), ("tall", 3, 4), (6, 6)],
            6: [(0, 2), (5, 7)], 7: [(1, 6)]}
    right = {3: [(1, 2), (3, 6)], 4: [(0, 0), (1, 1), (3, 4), (6, 7)], 5: [(1, 1), (3, 4), (6, 6)],
             6: [(0, 3), (4, 7)], 7: [(1, 3), (4, 6)]}
    for layer in range(3, 8):
        m.comment(f"walls, layer {layer}")
        for a, b in front[layer]:
            m.add(ONE_BY[b - a + 1], cx((a + b) / 2), top(layer), cz(0), 6)
        for run in right[layer]:
            a, b = run
            m.add(ONE_BY[b - a + 1], cx(9), top(layer), cz((a + b) / 2), 28, turned=True)
        for a, b in back[layer]:
            m.add(ONE_BY[b - a + 1], cx((a + b) / 2), top(layer), cz(7), 6)
        for run in left[layer]:
            if run[0] == "tall":
                _, a, b = run
                # 1x2x2 brick: origin at its top face, two layers tall
                m.add("3245.dat", cx(0), top(layer + 1), cz((a + b) / 2), 28, turned=True)
                continue
            a, b = run
            m.add(ONE_BY[b - a + 1], cx(0), top(layer), cz((a + b) / 2), 28, turned=True)

    m.comment("roof, lower layer: rows along x")
    rows = {0: [(0, 1), (2, 3), (4, 7), (8, 9)], 1: [(0, 3), (4, 7), (8, 9)],
            2: [(0, 1), (2, 5), (6, 9)], 3: [(0, 2), (3, 6), (7, 9)]}
    for r, runs in rows.items():
        z = cz(2 * r + 0.5)
        for a, b in runs:
            m.add(TWO_BY[b - a + 1], cx((a + b) / 2), top(8), z, 4)
    m.comment("roof, upper layer: columns along z")
    cols = {0: [(0, 3), (4, 7)], 1: [(0, 1), (2, 5), (6, 7)], 2: [(0, 3), (4, 7)],
            3: [(0, 1), (2, 5), (6, 7)], 4: [(0, 3), (4, 7)]}
    for c, runs in cols.items():
        x = cx(2 * c + 0.5)
        for a, b in runs:
            m.add(TWO_BY[b - a + 1], x, top(9), cz((a + b) / 2), 4, turned=True)

    m.comment("pole: eleven 1x1 bricks and a 1x6 on top")
    for layer in range(3, 14):
        m.add("3005.dat", 130, top(layer), -70, 7)
    m.add("3009.dat", 130, top(14), -70, 7, turned=True)
    assert m.count == 86, m.count
    m.write("house")


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    pipeline()
    two_towers()
    bridged_towers()
    columns()
    house()

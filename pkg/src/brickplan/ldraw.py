"""Parse LDraw model files into a bill of materials of placed bricks.

Only two LDraw line types matter here::

    0 <comment or meta command>
    1 <colour> x y z a b c d e f g h i <part.dat>

The nine values ``a..i`` form the row-major 3x3 rotation matrix.  Line types
2-5 carry raw geometry and are skipped.  Coordinates are kept as exact
``Fraction`` values so that face comparisons never depend on float rounding.

LDraw uses -y as "up": a brick whose origin sits at its top face occupies
``[y, y + height]`` on the y axis.
"""

from __future__ import annotations

import decimal
import json
import logging
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

log = logging.getLogger(__name__)

Vec3 = tuple[Fraction, Fraction, Fraction]
Matrix3 = tuple[Vec3, Vec3, Vec3]

IDENTITY: Matrix3 = (
    (Fraction(1), Fraction(0), Fraction(0)),
    (Fraction(0), Fraction(1), Fraction(0)),
    (Fraction(0), Fraction(0), Fraction(1)),
)


class LDrawError(Exception):
    """Base class for model loading failures."""


class LDrawParseError(LDrawError):
    def __init__(self, line_no: int, message: str, source: str = "") -> None:
        self.line_no = line_no
        self.source = source
        where = f"{source}:{line_no}" if source else f"line {line_no}"
        super().__init__(f"{where}: {message}")


class UnknownPartError(LDrawError):
    def __init__(self, part_id: str, line_no: int, source: str = "") -> None:
        self.part_id = part_id
        self.line_no = line_no
        self.source = source
        where = f"{source}:{line_no}" if source else f"line {line_no}"
        super().__init__(f"{where}: unknown part {part_id!r} (not in part table)")


class UnsupportedOrientationError(LDrawError):
    pass


@dataclass(frozen=True)
class BrickSpec:
    """Box dimensions of a rectangular part, in LDraw units.

    ``length`` runs along the part's local x axis, ``width`` along local z.
    ``origin_offset_y`` is the signed distance from the part origin to its
    top face.
    """

    part_id: str
    length: int
    width: int
    height: int
    origin_offset_y: int = 0
    description: str = ""

    def __post_init__(self) -> None:
        if self.length <= 0 or self.width <= 0 or self.height <= 0:
            raise ValueError(f"{self.part_id}: dimensions must be positive")


@dataclass(frozen=True)
class LegoObject:
    id: int
    part_id: str
    color: int
    position: Vec3
    rotation: Matrix3
    spec: BrickSpec

    @property
    def x(self) -> Fraction:
        return self.position[0]

    @property
    def y(self) -> Fraction:
        return self.position[1]

    @property
    def z(self) -> Fraction:
        return self.position[2]


@dataclass(frozen=True)
class ModelBOM:
    name: str
    objects: tuple[LegoObject, ...]

    def __len__(self) -> int:
        return len(self.objects)

    def __iter__(self):
        return iter(self.objects)

    def by_id(self, obj_id: int) -> LegoObject:
        return self.objects[obj_id - 1]


class PartTable(Mapping[str, BrickSpec]):
    """Case-insensitive lookup from LDraw part file name to brick dimensions."""

    def __init__(self, specs: Iterable[BrickSpec] = ()) -> None:
        self._specs: dict[str, BrickSpec] = {}
        for spec in specs:
            self.add(spec)

    def add(self, spec: BrickSpec) -> None:
        self._specs[normalize_part_id(spec.part_id)] = spec

    def __getitem__(self, part_id: str) -> BrickSpec:
        return self._specs[normalize_part_id(part_id)]

    def __contains__(self, part_id: object) -> bool:
        return isinstance(part_id, str) and normalize_part_id(part_id) in self._specs

    def __iter__(self):
        return iter(self._specs)

    def __len__(self) -> int:
        return len(self._specs)

    def extended(self, other: Iterable[BrickSpec]) -> "PartTable":
        table = PartTable(self._specs.values())
        for spec in other:
            table.add(spec)
        return table

    @classmethod
    def from_json(cls, data: str | dict | list) -> "PartTable":
        if isinstance(data, str):
            data = json.loads(data)
        records = data["parts"] if isinstance(data, dict) else data
        return cls(
            BrickSpec(
                part_id=normalize_part_id(rec["part_id"]),
                length=int(rec["length"]),
                width=int(rec["width"]),
                height=int(rec["height"]),
                origin_offset_y=int(rec.get("origin_offset_y", 0)),
                description=rec.get("description", ""),
            )
            for rec in records
        )

    @classmethod
    def load(cls, path: str | Path) -> "PartTable":
        return cls.from_json(Path(path).read_text())


_DEFAULT_TABLE: PartTable | None = None


def default_part_table() -> PartTable:
    """The bundled table of common bricks and plates (stud pitch 20, brick 24)."""
    global _DEFAULT_TABLE
    if _DEFAULT_TABLE is None:
        text = resources.files("brickplan.data").joinpath("parts.json").read_text()
        _DEFAULT_TABLE = PartTable.from_json(text)
    return _DEFAULT_TABLE


def normalize_part_id(part_id: str) -> str:
    return part_id.strip().replace("\\", "/").lower()


def _number(token: str, line_no: int, source: str) -> Fraction:
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError, OverflowError):
        raise LDrawParseError(line_no, f"expected a number, got {token!r}", source) from None


def parse_ldraw(
    text: str,
    table: PartTable | None = None,
    name: str = "",
    source: str = "",
) -> ModelBOM:
    """Parse LDraw text into a ``ModelBOM``.

    Every type-1 line becomes one ``LegoObject`` whose id is its 1-based
    position among the type-1 lines.  An empty input gives an empty BOM.
    """
    if table is None:
        table = default_part_table()
    objects: list[LegoObject] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split()
        if not tokens:
            continue
        kind = tokens[0]
        if kind == "0":
            if not name and len(tokens) > 2 and tokens[1].lower() == "name:":
                name = " ".join(tokens[2:])
            continue
        if kind in ("2", "3", "4", "5"):
            log.warning("%s:%d: skipping geometry line (type %s)", source or "<text>", line_no, kind)
            continue
        if kind != "1":
            raise LDrawParseError(line_no, f"unknown line type {kind!r}", source)
        if len(tokens) < 15:
            raise LDrawParseError(
                line_no, f"type-1 line needs 15 fields, found {len(tokens)}", source
            )
        color_tok = tokens[1]
        try:
            color = int(color_tok, 0) if color_tok.lower().startswith("0x") else int(color_tok)
        except ValueError:
            raise LDrawParseError(line_no, f"bad colour {color_tok!r}", source) from None
        nums = [_number(t, line_no, source) for t in tokens[2:14]]
        # file names may contain spaces
        part_id = normalize_part_id(" ".join(tokens[14:]))
        if part_id not in table:
            raise UnknownPartError(part_id, line_no, source)
        position: Vec3 = (nums[0], nums[1], nums[2])
        m = nums[3:]
        rotation: Matrix3 = ((m[0], m[1], m[2]), (m[3], m[4], m[5]), (m[6], m[7], m[8]))
        objects.append(
            LegoObject(
                id=len(objects) + 1,
                part_id=part_id,
                color=color,
                position=position,
                rotation=rotation,
                spec=table[part_id],
            )
        )
    return ModelBOM(name=name, objects=tuple(objects))


def load_ldraw(path: str | Path, table: PartTable | None = None) -> ModelBOM:
    path = Path(path)
    return parse_ldraw(path.read_text(), table, name=path.stem, source=str(path))


def _fmt(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    with decimal.localcontext() as ctx:
        ctx.prec = 60
        text = format((Decimal(value.numerator) / Decimal(value.denominator)).normalize(), "f")
    return text


def write_ldraw(bom: ModelBOM) -> str:
    """Serialize a BOM back to LDraw text (one type-1 line per object)."""
    lines = []
    if bom.name:
        lines.append(f"0 {bom.name}")
        lines.append(f"0 Name: {bom.name}")
    for obj in bom.objects:
        fields = [str(obj.color)]
        fields += [_fmt(v) for v in obj.position]
        fields += [_fmt(v) for row in obj.rotation for v in row]
        fields.append(obj.part_id)
        lines.append("1 " + " ".join(fields))
    return "\n".join(lines) + "\n"


def _is_signed_permutation(rot: Matrix3) -> bool:
    for row in rot:
        if sorted(abs(v) for v in row) != [0, 0, 1]:
            return False
    for col in range(3):
        if sorted(abs(rot[r][col]) for r in range(3)) != [0, 0, 1]:
            return False
    return True


def oriented_footprint(obj: LegoObject) -> tuple[int, int]:
    """World-frame (x extent, z extent) of the brick's footprint.

    The first rotation column is the image of the local x axis.  Raises
    ``UnsupportedOrientationError`` unless the rotation is a signed axis
    permutation that keeps local x in the horizontal plane.
    """
    rot = obj.rotation
    if not _is_signed_permutation(rot):
        raise UnsupportedOrientationError(f"object {obj.id}: rotation is not axis-aligned")
    local_x = (rot[0][0], rot[1][0], rot[2][0])
    if abs(local_x[0]) == 1:
        return obj.spec.length, obj.spec.width
    if abs(local_x[2]) == 1:
        return obj.spec.width, obj.spec.length
    raise UnsupportedOrientationError(f"object {obj.id}: brick lies on its side")


def faces(obj: LegoObject) -> tuple[Fraction, Fraction]:
    """Return ``(top_y, bottom_y)``; top is the smaller y since -y is up."""
    top = obj.position[1] + obj.spec.origin_offset_y
    return top, top + obj.spec.height

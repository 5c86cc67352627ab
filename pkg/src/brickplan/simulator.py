"""Discrete-time execution of a schedule by a fixed crew of workers.

Every operation takes one step and one worker.  At each step the remaining
operations are scanned in schedule order and the ready ones go to the free
workers, lowest worker index first.  A wire produced at step t can be used
from step t + 1 on.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Sequence

from .scheduler import validate_schedule
from .wiring import Plan, Wire


class ScheduleContractError(ValueError):
    pass


class SimulationDeadlock(AssertionError):
    pass


@dataclass(frozen=True)
class SimConfig:
    workers: int = 1
    trace: bool = True
    # only dispatch a prefix of the remaining schedule (no skipping ahead)
    strict: bool = False

    def __post_init__(self) -> None:
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class TraceEvent:
    step: int
    worker: int
    box: int
    inputs: tuple[str, ...]
    output: str
    area: int = 0

    def to_dict(self) -> dict:
        return {"step": self.step, "worker": self.worker, "box": self.box,
                "inputs": list(self.inputs), "output": self.output, "area": self.area}


@dataclass(frozen=True)
class SimReport:
    workers: int
    steps: int
    total_ops: int
    occupancy: Fraction
    trace: tuple[TraceEvent, ...]
    final_assembly: str | None

    def trace_jsonl(self) -> str:
        return "".join(json.dumps(ev.to_dict()) + "\n" for ev in self.trace)


def _wire_names(plan: Plan) -> dict[Wire, str]:
    names: dict[Wire, str] = {}
    for i, w in enumerate(plan.inputs, start=1):
        names[w] = f"p{min(w)}" if len(w) == 1 else f"in{i}"
    for b in plan.boxes:
        names.setdefault(b.output, f"a{b.id}")
    return names


def simulate(plan: Plan, schedule: Sequence[int], cfg: SimConfig | int = 1) -> SimReport:
    if isinstance(cfg, int):
        cfg = SimConfig(workers=cfg)
    if not plan.is_flat:
        raise ScheduleContractError("simulate needs a flat plan (see wiring.flatten)")
    if not plan.boxes:
        raise ScheduleContractError("plan has no operations")
    if not validate_schedule(schedule, plan):
        raise ScheduleContractError("schedule is not a linear extension of the plan")

    names = _wire_names(plan)
    ready_at: dict[Wire, int] = {w: 1 for w in plan.inputs}
    remaining = list(schedule)
    events: list[TraceEvent] = []
    step = 0
    while remaining:
        step += 1
        chosen: list[int] = []
        for box_id in remaining:
            if len(chosen) == cfg.workers:
                break
            box = plan.box(box_id)
            if all(ready_at.get(w, step + 1) <= step for w in box.inputs):
                chosen.append(box_id)
            elif cfg.strict:
                break
        if not chosen:
            raise SimulationDeadlock(f"step {step}: nothing ready, {len(remaining)} ops left")
        for worker, box_id in enumerate(chosen, start=1):
            box = plan.box(box_id)
            ready_at[box.output] = step + 1
            events.append(TraceEvent(step, worker, box_id,
                                     tuple(names[w] for w in box.inputs), names[box.output]))
        taken = set(chosen)
        remaining = [b for b in remaining if b not in taken]

    events = assign_areas(events, plan)
    total = len(plan.boxes)
    final = names[plan.outputs[0]] if len(plan.outputs) == 1 else None
    return SimReport(
        workers=cfg.workers,
        steps=step,
        total_ops=total,
        occupancy=Fraction(total, step * cfg.workers),
        trace=tuple(events) if cfg.trace else (),
        final_assembly=final,
    )


def assign_areas(trace: Iterable[TraceEvent], plan: Plan) -> list[TraceEvent]:
    """Give every event the construction area its output lives in.

    An assembly containing one of ``plan.grounds`` (nodes placed directly on
    the main build plate) is in area 0.  Any other new assembly opens the
    lowest free area; a merge keeps the lowest area among its inputs and
    frees the rest.  With no main grounds, area 0 is simply the first area
    opened.
    """
    main = plan.grounds
    reserved = {0} if main else set()
    in_use: set[int] = set(reserved)
    area_of: dict[str, int] = {}
    out = []
    for ev in sorted(trace, key=lambda e: (e.step, e.worker)):
        box = plan.box(ev.box)
        input_areas = [area_of[w] for w in ev.inputs if w in area_of]
        if main and box.output & main:
            area = 0
        elif input_areas:
            area = min(input_areas)
        else:
            area = 0
            while area in in_use:
                area += 1
        for a in input_areas:
            if a != area and a not in reserved:
                in_use.discard(a)
        in_use.add(area)
        area_of[ev.output] = area
        out.append(replace(ev, area=area))
    return out


@dataclass(frozen=True)
class SweepRow:
    workers: int
    steps: int
    occupancy: Fraction
    total_ops: int


def sweep(plan: Plan, schedule: Sequence[int], workers_list: Iterable[int] = (1, 2, 4, 8, 16),
          strict: bool = False) -> list[SweepRow]:
    rows = []
    for w in workers_list:
        rep = simulate(plan, schedule, SimConfig(workers=w, trace=False, strict=strict))
        rows.append(SweepRow(w, rep.steps, rep.occupancy, rep.total_ops))
    return rows


def metrics_csv(rows: Iterable[SweepRow], strategy: str | None = None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["workers", "steps", "occupancy", "total_ops"]
    writer.writerow(["strategy", *header] if strategy else header)
    for r in rows:
        row = [r.workers, r.steps, f"{float(r.occupancy):.4f}", r.total_ops]
        writer.writerow([strategy, *row] if strategy else row)
    return buf.getvalue()

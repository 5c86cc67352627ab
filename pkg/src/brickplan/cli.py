"""Command line front end: graph, plan, schedule, simulate, bench."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

from .connectivity import ConnectivityGraph, connectivity_graph
from .ldraw import LDrawParseError, ModelBOM, PartTable, UnknownPartError, default_part_table, load_ldraw
from .planner import CommunityMethod, ConfigError, PlannerConfig, PlanningError, Strategy, make_plan
from .scheduler import (diagram_to_expression, linearize, schedule_from_json, schedule_to_json,
                        to_sexpr, validate_schedule)
from .simulator import ScheduleContractError, SimConfig, metrics_csv, simulate, sweep
from .wiring import Plan, PlanStructureError, export_plan, flatten, plan_from_json, validate_plan

log = logging.getLogger("brickplan")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARSE = 3
EXIT_UNKNOWN_PART = 4
EXIT_VALIDATION = 5
EXIT_PLANNING = 6

BUNDLED_MODELS = ("pipeline", "two_towers", "bridged_towers", "columns", "house")
DEFAULT_WORKERS = (1, 2, 4, 8, 16)


class CliError(Exception):
    def __init__(self, code: int, message: str) -> None:
        super().__init__(message)
        self.code = code


@dataclass
class PipelineConfig:
    input: str = ""
    strategy: Strategy = Strategy.SEQUENTIAL
    community: CommunityMethod = CommunityMethod.GIRVAN_NEWMAN
    target_communities: int | None = None
    seed: int = 0
    workers: tuple[int, ...] = DEFAULT_WORKERS
    out: Path = Path("out")
    formats: tuple[str, ...] = ("json", "dot")
    parts: str | None = None
    strict: bool = False
    schedule: str | None = None

    def planner(self) -> PlannerConfig:
        return PlannerConfig(self.strategy, self.community, self.target_communities, self.seed)


def bundled_model_path(name: str) -> Path:
    return Path(str(resources.files("brickplan.data.models").joinpath(f"{name}.ldr")))


def resolve_input(spec: str) -> Path:
    path = Path(spec)
    if path.exists():
        return path
    if spec in BUNDLED_MODELS:
        return bundled_model_path(spec)
    raise CliError(EXIT_CONFIG, f"input not found: {spec}")


def _parse_workers(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(v) for v in str(text).split(",") if v.strip())
    except ValueError:
        raise CliError(EXIT_CONFIG, f"bad worker list {text!r}") from None
    if not values or min(values) < 1:
        raise CliError(EXIT_CONFIG, "worker counts must be positive")
    return values


def _enum(cls, value: str, flag: str):
    try:
        return cls(value)
    except ValueError:
        choices = ", ".join(m.value for m in cls)
        raise CliError(EXIT_CONFIG, f"{flag}: expected one of {choices}, got {value!r}") from None


def build_config(args: argparse.Namespace) -> PipelineConfig:
    """Merge an optional JSON config file with command line flags (flags win)."""
    file_cfg: dict = {}
    if args.config:
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(EXIT_CONFIG, f"cannot read config {args.config}: {exc}") from None
    community = file_cfg.get("community", {})
    if isinstance(community, str):
        community = {"method": community}

    def pick(flag, key, default=None, section=None):
        value = getattr(args, flag, None)
        if value is not None:
            return value
        source = community if section == "community" else file_cfg
        return source.get(key, default)

    cfg = PipelineConfig()
    cfg.input = pick("input", "input", "")
    cfg.strategy = _enum(Strategy, pick("strategy", "strategy", "sequential"), "--strategy")
    cfg.community = _enum(CommunityMethod, pick("community", "method", "girvan-newman", "community"),
                          "--community")
    target = pick("target_communities", "target", None, "community")
    cfg.target_communities = None if target is None else int(target)
    cfg.seed = int(pick("seed", "seed", 0))
    workers = pick("workers", "workers", None)
    if workers is not None:
        cfg.workers = _parse_workers(",".join(map(str, workers)) if isinstance(workers, list) else workers)
    cfg.out = Path(pick("out", "out", "out"))
    fmt = pick("format", "format", "json,dot")
    cfg.formats = tuple(f.strip() for f in (fmt if isinstance(fmt, list) else fmt.split(",")) if f.strip())
    for f in cfg.formats:
        if f not in ("json", "dot"):
            raise CliError(EXIT_CONFIG, f"--format: unknown format {f!r}")
    cfg.parts = pick("parts", "parts", None)
    cfg.strict = bool(getattr(args, "strict", False) or file_cfg.get("strict", False))
    cfg.schedule = getattr(args, "schedule", None)
    if cfg.target_communities is not None and cfg.target_communities < 2:
        raise CliError(EXIT_CONFIG, "--target-communities must be at least 2")
    if cfg.strategy is Strategy.SEQUENTIAL and args.command == "plan" and (
        getattr(args, "community", None) or getattr(args, "target_communities", None)
    ):
        log.warning("sequential strategy ignores community options")
    return cfg


def load_model(cfg: PipelineConfig) -> tuple[ModelBOM, ConnectivityGraph]:
    if not cfg.input:
        raise CliError(EXIT_CONFIG, "--input is required")
    path = resolve_input(cfg.input)
    table = default_part_table()
    if cfg.parts:
        try:
            table = table.extended(PartTable.load(cfg.parts).values())
        except (OSError, KeyError, ValueError) as exc:
            raise CliError(EXIT_CONFIG, f"cannot load part table {cfg.parts}: {exc}") from None
    try:
        bom = load_ldraw(path, table)
    except UnknownPartError as exc:
        raise CliError(EXIT_UNKNOWN_PART, str(exc)) from None
    except LDrawParseError as exc:
        raise CliError(EXIT_PARSE, str(exc)) from None
    if not bom.objects:
        raise CliError(EXIT_PARSE, f"{path}: model contains no bricks")
    return bom, connectivity_graph(bom)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    log.info("wrote %s", path)


def write_graph(graph: ConnectivityGraph, out: Path, formats: Sequence[str]) -> None:
    if "json" in formats:
        _write(out / "graph.json", graph.to_json())
    if "dot" in formats:
        _write(out / "graph.dot", graph.to_dot())


def build_plan(cfg: PipelineConfig, graph: ConnectivityGraph) -> Plan:
    try:
        plan, valid_against, _ = make_plan(graph, cfg.planner())
    except ConfigError as exc:
        raise CliError(EXIT_CONFIG, str(exc)) from None
    except PlanningError as exc:
        raise CliError(EXIT_PLANNING, str(exc)) from None
    report = validate_plan(plan, valid_against)
    if not report:
        raise CliError(EXIT_VALIDATION, f"generated plan failed validation:\n{report}")
    return plan


def write_plan(plan: Plan, graph: ConnectivityGraph, out: Path, formats: Sequence[str]) -> None:
    if "json" in formats:
        _write(out / "plan.json", export_plan(plan, "json"))
    if "dot" in formats:
        _write(out / "plan.dot", export_plan(plan, "dot", graph))


def cmd_graph(cfg: PipelineConfig) -> int:
    _, graph = load_model(cfg)
    write_graph(graph, cfg.out, cfg.formats)
    print(f"{graph.name}: {len(graph.bricks)} bricks, {len(graph.grounds)} ground nodes, "
          f"{len(graph.edges)} edges")
    return EXIT_OK


def cmd_plan(cfg: PipelineConfig) -> int:
    _, graph = load_model(cfg)
    plan = build_plan(cfg, graph)
    write_plan(plan, graph, cfg.out, cfg.formats)
    flat = flatten(plan)
    black = sum(1 for b in plan.boxes if b.kind == "black")
    print(f"{cfg.strategy.value} plan: {len(plan.boxes)} top-level boxes ({black} black boxes), "
          f"{len(flat.boxes)} joins")
    return EXIT_OK


def _load_plan(path: str) -> Plan:
    try:
        return plan_from_json(Path(path).read_text())
    except OSError as exc:
        raise CliError(EXIT_CONFIG, f"cannot read plan {path}: {exc}") from None
    except (KeyError, ValueError, TypeError, PlanStructureError) as exc:
        raise CliError(EXIT_PARSE, f"{path}: malformed plan: {exc}") from None


def cmd_schedule(cfg: PipelineConfig, show_expr: bool = False) -> int:
    if not cfg.input:
        raise CliError(EXIT_CONFIG, "--input plan.json is required")
    plan = _load_plan(cfg.input)
    try:
        flat = flatten(plan)
        expr = diagram_to_expression(flat)
    except PlanStructureError as exc:
        raise CliError(EXIT_VALIDATION, str(exc)) from None
    order = linearize(expr)
    if not validate_schedule(order, flat):
        raise CliError(EXIT_VALIDATION, "schedule is not a linear extension of the plan")
    _write(cfg.out / "schedule.json", schedule_to_json(order, plan.name))
    if show_expr:
        print(to_sexpr(expr))
    print(f"schedule of {len(order)} operations")
    return EXIT_OK


def cmd_simulate(cfg: PipelineConfig) -> int:
    if not cfg.input:
        raise CliError(EXIT_CONFIG, "--input plan.json is required")
    flat = flatten(_load_plan(cfg.input))
    if cfg.schedule:
        order = schedule_from_json(Path(cfg.schedule).read_text())
    else:
        order = linearize(diagram_to_expression(flat))
    try:
        reports = [simulate(flat, order, SimConfig(w, trace=True, strict=cfg.strict)) for w in cfg.workers]
    except ScheduleContractError as exc:
        raise CliError(EXIT_VALIDATION, str(exc)) from None
    rows = sweep(flat, order, cfg.workers, strict=cfg.strict)
    _write(cfg.out / "metrics.csv", metrics_csv(rows))
    if len(reports) == 1:
        _write(cfg.out / "trace.jsonl", reports[0].trace_jsonl())
    else:
        for rep in reports:
            _write(cfg.out / f"trace_w{rep.workers}.jsonl", rep.trace_jsonl())
    for r in rows:
        print(f"workers={r.workers:>3} steps={r.steps:>4} occupancy={float(r.occupancy):.2f}")
    return EXIT_OK


def format_table(results: dict[str, list]) -> str:
    lines = [f"{'schedule':<12}{'workers':>8}{'steps':>8}{'occupancy':>11}"]
    for strategy, rows in results.items():
        for r in rows:
            lines.append(f"{strategy:<12}{r.workers:>8}{r.steps:>8}{float(r.occupancy):>11.2f}")
    return "\n".join(lines)


def cmd_bench(cfg: PipelineConfig) -> int:
    """Run both strategies over the worker sweep and write every artifact."""
    _, graph = load_model(cfg)
    write_graph(graph, cfg.out, cfg.formats)
    results = {}
    combined = []
    for strategy in Strategy:
        sub = PipelineConfig(**{**cfg.__dict__, "strategy": strategy})
        plan = build_plan(sub, graph)
        flat = flatten(plan)
        order = linearize(diagram_to_expression(flat))
        sdir = cfg.out / strategy.value
        write_plan(plan, graph, sdir, cfg.formats)
        _write(sdir / "schedule.json", schedule_to_json(order, plan.name))
        rows = sweep(flat, order, cfg.workers, strict=cfg.strict)
        _write(sdir / "metrics.csv", metrics_csv(rows))
        widest = simulate(flat, order, SimConfig(max(cfg.workers), strict=cfg.strict))
        _write(sdir / "trace.jsonl", widest.trace_jsonl())
        results[strategy.value] = rows
        combined.append(metrics_csv(rows, strategy.value))
    header, *_ = combined[0].splitlines()
    body = [ln for text in combined for ln in text.splitlines()[1:]]
    _write(cfg.out / "bench.csv", "\n".join([header, *body]) + "\n")
    print(f"{graph.name}: {len(graph.bricks)} bricks")
    print(format_table(results))
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="brickplan", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, input_help: str) -> None:
        p.add_argument("--input", help=input_help)
        p.add_argument("--out", help="output directory (default: out)")
        p.add_argument("--format", help="comma separated export formats: json,dot")
        p.add_argument("--config", help="JSON config file; flags override it")

    def planning(p: argparse.ArgumentParser) -> None:
        p.add_argument("--parts", help="extra part dimension table (JSON)")
        p.add_argument("--strategy", choices=[s.value for s in Strategy])
        p.add_argument("--community", choices=[m.value for m in CommunityMethod])
        p.add_argument("--target-communities", type=int, dest="target_communities")
        p.add_argument("--seed", type=int)

    model_help = f"LDraw file or bundled model ({', '.join(BUNDLED_MODELS)})"
    p = sub.add_parser("graph", help="build the connectivity graph")
    common(p, model_help)
    p.add_argument("--parts", help="extra part dimension table (JSON)")

    p = sub.add_parser("plan", help="generate and validate an assembly plan")
    common(p, model_help)
    planning(p)

    p = sub.add_parser("schedule", help="linearize a plan into a schedule")
    common(p, "plan.json")
    p.add_argument("--expr", action="store_true", help="print the plan expression")

    p = sub.add_parser("simulate", help="run a schedule with a worker sweep")
    common(p, "plan.json")
    p.add_argument("--schedule", help="schedule.json (default: derived from the plan)")
    p.add_argument("--workers", help="comma separated worker counts")
    p.add_argument("--strict", action="store_true", help="dispatch only a ready prefix of the schedule")

    p = sub.add_parser("bench", help="sequential vs parallel sweep over worker counts")
    common(p, model_help)
    planning(p)
    p.add_argument("--workers", help="comma separated worker counts (default 1,2,4,8,16)")
    p.add_argument("--strict", action="store_true")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        cfg = build_config(args)
        if args.command == "graph":
            return cmd_graph(cfg)
        if args.command == "plan":
            return cmd_plan(cfg)
        if args.command == "schedule":
            return cmd_schedule(cfg, args.expr)
        if args.command == "simulate":
            return cmd_simulate(cfg)
        return cmd_bench(cfg)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())

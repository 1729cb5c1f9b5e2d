"""Command-line interface.

Exit codes:
  0  success
  1  unexpected error
  2  usage error (bad flags)
  3  infeasible parameters (no integral design / MHD count below host count)
  4  search budget exhausted without a design
  5  proven that no design exists
  6  validation failed
  7  input file parse error (topology / trace / config)
  8  operation unsupported for this topology kind
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import analysis, serialization
from .allocator import replay_trace
from .config import RunConfig, load_config
from .errors import (
    CxlPodError,
    FisherViolation,
    IndivisibleParams,
    MalformedTrace,
    NoDesignExists,
    SearchExhausted,
    UnsupportedTopology,
)
from .hardware import (
    estimate_unit_cost,
    good_dies_for_sku,
    gross_dies_per_wafer,
    murphy_yield,
    relative_cost,
    sku_by_name,
)
from .placement import queue_plan
from .topology import (
    TopologyKind,
    construct,
    construct_symmetric,
    derive_dense_params,
    derive_regular_params,
    validate,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_SEARCH_EXHAUSTED = 4
EXIT_NO_DESIGN = 5
EXIT_VALIDATION_FAILED = 6
EXIT_PARSE = 7
EXIT_UNSUPPORTED = 8


class UsageError(Exception):
    pass


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8", newline="\n")


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_topology(path: str):
    return serialization.parse_topology(_read_text(path))


def cmd_design(args: argparse.Namespace, config: RunConfig) -> int:
    kind = TopologyKind(args.kind)
    budget = args.budget if args.budget is not None else config.search_budget
    if kind is TopologyKind.SYMMETRIC:
        topology = construct_symmetric(args.mhd_ports, args.host_ports)
    else:
        if kind is TopologyKind.REGULAR:
            params = derive_regular_params(args.host_ports, args.mhd_ports)
        else:
            if args.lam is None:
                raise UsageError("--lambda is required for dense designs")
            params = derive_dense_params(args.host_ports, args.mhd_ports, args.lam)
        topology = construct(params, search_budget=budget)
    if args.multiplicity > 1:
        topology = dataclasses.replace(topology, multiplicity=args.multiplicity)
    _write_text(args.out, serialization.topology_to_json(topology))
    if args.dot:
        _write_text(args.dot, serialization.topology_to_dot(topology))
    return EXIT_OK


def cmd_validate(args: argparse.Namespace, config: RunConfig) -> int:
    topology = _load_topology(args.topology)
    report = validate(topology)
    for line in report.lines():
        print(line)
    if report.passed:
        print("result: PASS")
        return EXIT_OK
    print("result: FAIL")
    return EXIT_VALIDATION_FAILED


def _cost_rows(config: RunConfig, analytic: bool) -> tuple[list[str], list[list[str]]]:
    skus = config.skus
    if not skus:
        return [], []
    reference = next((s for s in skus if s.name == "Large"), skus[0])
    anchor = next((s for s in skus if s.name == "XLarge"), skus[-1])
    if analytic:
        model = config.yield_model
        header = [
            "name", "cxl_ports", "ddr5_channels", "die_area_mm2", "unused_area_mm2",
            "gross_dies", "yield", "good_dies", "relative_cost", "est_cost_usd",
        ]
        rows = []
        for sku in skus:
            rows.append([
                sku.name, str(sku.cxl_ports), str(sku.ddr5_channels),
                f"{sku.die_area_mm2:g}", f"{sku.unused_area_mm2:g}",
                str(gross_dies_per_wafer(model, sku.die_area_mm2)),
                f"{murphy_yield(model, sku.active_area_mm2):.4f}",
                str(good_dies_for_sku(model, sku)),
                f"{round(100 * relative_cost(sku, reference, model))}%",
                f"{estimate_unit_cost(sku, anchor, anchor.unit_cost_usd, model):.2f}",
            ])
        return header, rows
    header = [
        "name", "cxl_ports", "ddr5_channels", "die_area_mm2", "unused_area_mm2",
        "capacity_gb", "latency_ns", "good_dies", "relative_cost", "unit_cost_usd",
    ]
    rows = []
    for sku in skus:
        latency = f"{sku.latency_ns:g}"
        if sku.latency_is_floor:
            latency = ">" + latency
        relative = (
            f"{round(100 * relative_cost(sku, reference))}%"
            if sku.good_dies is not None else ""
        )
        rows.append([
            sku.name, str(sku.cxl_ports), str(sku.ddr5_channels),
            f"{sku.die_area_mm2:g}", f"{sku.unused_area_mm2:g}",
            str(sku.capacity_gb), latency,
            str(sku.good_dies) if sku.good_dies is not None else "",
            relative, serialization.money_str(sku.unit_cost_usd),
        ])
    return header, rows


def cmd_cost(args: argparse.Namespace, config: RunConfig) -> int:
    header, rows = _cost_rows(config, args.analytic)
    if args.format == "csv":
        text = serialization.csv_table(header, rows) if header else ""
        _write_text(args.out, text)
        return EXIT_OK
    if not header:
        _write_text(args.out, "")
        return EXIT_OK
    widths = [
        max(len(header[i]), *(len(row[i]) for row in rows)) for i in range(len(header))
    ]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    for row in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    _write_text(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace, config: RunConfig) -> int:
    configs = serialization.parse_sweep_configs(_read_text(args.configs))
    model = config.yield_model if args.analytic else None
    result = analysis.sweep(configs, config.skus, cost_model=model)
    frontier = analysis.pareto_frontier(result.rows)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sweep_path = out_dir / "sweep.csv"
    frontier_path = out_dir / "frontier.csv"
    sweep_path.write_text(serialization.sweep_to_csv(result), encoding="utf-8", newline="\n")
    frontier_path.write_text(
        serialization.frontier_to_csv(frontier), encoding="utf-8", newline="\n"
    )
    written = [sweep_path, frontier_path]

    if not args.no_figures and result.rows:
        from . import figures  # lazy: pulls in matplotlib

        written.append(
            figures.render_tradeoff(result.rows, frontier, out_dir / "tradeoff.png")
        )
        written.append(
            figures.render_pod_size_curves(result.rows, out_dir / "podsizes.png")
        )

    for path in written:
        print(f"wrote {path}")
    for skip in result.skips:
        print(f"config {skip.config_id} skipped: {skip.reason}")
    if frontier.rows:
        points = ", ".join(
            f"({r.pod_size} hosts, ${serialization.money_str(r.cost_per_host)}/host)"
            for r in frontier.rows
        )
        print(f"frontier: {points}")
    _print_headline_comparisons(result)
    return EXIT_OK


def _print_headline_comparisons(result: analysis.SweepResult) -> None:
    """How non-symmetric rows improve on the symmetric baseline that uses
    the same host port count."""
    rows = result.rows
    baselines = [r for r in rows if r.kind is TopologyKind.SYMMETRIC]
    for baseline in baselines:
        for row in rows:
            if (
                row.kind is TopologyKind.SYMMETRIC
                or row.host_ports != baseline.host_ports
                or row.pod_size <= baseline.pod_size
                or row.cost_per_host > baseline.cost_per_host
            ):
                continue
            cmp = analysis.compare_rows(row, baseline)
            if cmp.cost_change < 0:
                cost_note = f"{-100 * cmp.cost_change:.4g}% lower cost per host"
            else:
                cost_note = "equal cost per host"
            print(
                f"config {row.config_id} vs config {baseline.config_id}: "
                f"{cmp.host_ratio:.4g}x hosts "
                f"({row.pod_size} vs {baseline.pod_size}) at {cost_note}"
            )


def cmd_simulate(args: argparse.Namespace, config: RunConfig) -> int:
    topology = _load_topology(args.topology)
    events = serialization.parse_trace(_read_text(args.trace))
    if args.sku is not None:
        capacity = sku_by_name(args.sku, config.skus)
    else:
        capacity = args.capacity_gb
    granularity = (
        args.granularity_gb if args.granularity_gb is not None
        else config.quantization_gb
    )
    report = replay_trace(
        topology, capacity, events,
        default_policy=args.policy, granularity=granularity,
    )
    payload = serialization.trace_report_to_dict(report, args.policy)
    if args.interleave:
        page_size = (
            args.interleave if args.interleave != "default"
            else config.default_page_size
        )
        _attach_interleave_previews(payload, report, page_size)
    _write_text(args.out, serialization.canonical_json(payload))
    return EXIT_OK


def _attach_interleave_previews(payload: dict, report, page_size: str) -> None:
    from .allocator import AllocationPlan
    from .placement import interleave_plan

    for outcome, entry in zip(report.outcomes, payload["events"]):
        if outcome.op != "alloc" or not outcome.ok:
            continue
        plan = AllocationPlan(outcome.request, outcome.shares)
        try:
            ilv = interleave_plan(plan, page_size)
        except ValueError as exc:
            entry["interleave"] = {"page_size": page_size, "error": str(exc)}
            continue
        entry["interleave"] = {
            "page_size": page_size,
            "total_pages": ilv.total_pages,
            "first_pages": ilv.first_pages(16),
        }


def cmd_placement(args: argparse.Namespace, config: RunConfig) -> int:
    topology = _load_topology(args.topology)
    plan = queue_plan(topology, args.pair_size_gb)
    _write_text(args.out, serialization.canonical_json(
        serialization.queue_plan_to_dict(plan)
    ))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cxlpod",
        description="Design and evaluate CXL memory pods built from multi-headed devices.",
    )
    parser.add_argument("--config", help="JSON run configuration file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="construct a pod topology")
    p.add_argument("--kind", choices=[k.value for k in TopologyKind], required=True)
    p.add_argument("-X", "--host-ports", type=int, required=True,
                   help="CXL ports per host (MHD count for symmetric pods)")
    p.add_argument("-N", "--mhd-ports", type=int, required=True,
                   help="CXL ports per MHD (host count for symmetric pods)")
    p.add_argument("--lambda", dest="lam", type=int,
                   help="shared MHDs per host pair (dense only)")
    p.add_argument("--multiplicity", type=int, default=1,
                   help="parallel cables per edge (doubled-MHD variant)")
    p.add_argument("--budget", type=int, help="search node budget")
    p.add_argument("-o", "--out", help="topology JSON path (default stdout)")
    p.add_argument("--dot", help="also write a DOT graph here")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("validate", help="check a topology file's invariants")
    p.add_argument("topology")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("cost", help="print the MHD cost table")
    p.add_argument("--analytic", action="store_true",
                   help="recompute dies and costs from the yield pipeline")
    p.add_argument("--format", choices=["text", "csv"], default="text")
    p.add_argument("-o", "--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("sweep", help="evaluate configurations and extract the frontier")
    p.add_argument("configs", help="JSON list of configurations")
    p.add_argument("-o", "--out-dir", default=".",
                   help="directory for sweep.csv, frontier.csv and figures")
    p.add_argument("--analytic", action="store_true",
                   help="use yield-pipeline cost estimates instead of table prices")
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="replay an allocation trace")
    p.add_argument("topology")
    p.add_argument("trace", help="JSONL trace file")
    p.add_argument("--policy", choices=["proportional", "symmetric-equal", "highest-capacity"],
                   default="proportional", help="policy for events that do not name one")
    p.add_argument("--capacity-gb", type=float, default=100.0,
                   help="pool capacity per MHD (default 100)")
    p.add_argument("--sku", help="take per-MHD capacity from this SKU instead")
    p.add_argument("--granularity-gb", type=float,
                   help="quantization granularity for reported shares")
    p.add_argument("--interleave", nargs="?", const="default",
                   choices=["default", "4KiB", "2MiB", "1GiB"],
                   help="attach page-interleave previews (page size from the "
                        "run config when no value is given)")
    p.add_argument("-o", "--out", help="report JSON path (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("placement", help="plan pairwise queue regions")
    p.add_argument("topology")
    p.add_argument("--pair-size-gb", type=float, required=True,
                   help="region size per host pair")
    p.add_argument("-o", "--out", help="plan JSON path (default stdout)")
    p.set_defaults(func=cmd_placement)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
    except (ValueError, OSError) as exc:
        print(f"error: cannot load config: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        return args.func(args, config)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IndivisibleParams, FisherViolation) as exc:
        print(f"error: infeasible parameters: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SearchExhausted as exc:
        print(
            f"error: {exc} ({exc.nodes_expanded} nodes expanded)", file=sys.stderr
        )
        return EXIT_SEARCH_EXHAUSTED
    except NoDesignExists as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_DESIGN
    except MalformedTrace as exc:
        location = f" (line {exc.line})" if exc.line is not None else ""
        print(f"error: malformed trace{location}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except UnsupportedTopology as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except CxlPodError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

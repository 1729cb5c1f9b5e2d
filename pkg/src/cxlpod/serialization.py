"""File formats: topology JSON, DOT graphs, trace JSONL, reports, CSV.

All emitters are canonical: fixed key order, LF line endings, stable
number formatting, so identical inputs produce identical bytes and
parse/serialize round-trips are exact.
"""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from typing import Any, Iterable

from .allocator import EventOutcome, TraceEvent, TraceReport, to_gb
from .analysis import Frontier, SweepConfig, SweepResult, SweepRow
from .errors import MalformedTrace
from .placement import QueuePlan
from .topology import (
    BibdParams,
    PodTopology,
    TopologyKind,
    natural_key,
)


def frac_str(value: Fraction) -> str:
    """Canonical rational rendering: '50' or '100/3'."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def frac_json(value: Fraction) -> int | str:
    """Integers stay JSON numbers; true rationals become 'p/q' strings."""
    if value.denominator == 1:
        return value.numerator
    return frac_str(value)


def money_str(value: float) -> str:
    """Whole dollars; '.' decimal only if the value is not integral."""
    rounded = round(value)
    if abs(value - rounded) < 1e-9:
        return str(int(rounded))
    return f"{value:.2f}"


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


# -- topology ---------------------------------------------------------------

def topology_to_dict(topology: PodTopology) -> dict:
    params = None
    if topology.params is not None:
        p = topology.params
        params = {"v": p.v, "b": p.b, "r": p.r, "k": p.k, "lambda": p.lam}
    edges = sorted(topology.edges, key=lambda e: (natural_key(e[0]), natural_key(e[1])))
    return {
        "kind": topology.kind.value,
        "params": params,
        "hosts": list(topology.hosts),
        "mhds": list(topology.mhds),
        "edges": [list(edge) for edge in edges],
        "multiplicity": topology.multiplicity,
    }


def topology_to_json(topology: PodTopology) -> str:
    return canonical_json(topology_to_dict(topology))


def topology_from_dict(raw: dict) -> PodTopology:
    try:
        kind = TopologyKind(raw["kind"])
        hosts = tuple(str(h) for h in raw["hosts"])
        mhds = tuple(str(m) for m in raw["mhds"])
        edges = frozenset((str(a), str(b)) for a, b in raw["edges"])
        multiplicity = int(raw.get("multiplicity", 1))
        params = None
        if raw.get("params") is not None:
            p = raw["params"]
            params = BibdParams(
                v=int(p["v"]), b=int(p["b"]), r=int(p["r"]), k=int(p["k"]),
                lam=int(p["lambda"]),
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"invalid topology document: {exc}") from exc
    if multiplicity < 1:
        raise ValueError("multiplicity must be >= 1")
    host_set, mhd_set = set(hosts), set(mhds)
    for a, b in edges:
        if a not in host_set or b not in mhd_set:
            raise ValueError(f"edge ({a}, {b}) references unknown host or MHD")
    return PodTopology(
        kind=kind, hosts=hosts, mhds=mhds, edges=edges,
        params=params, multiplicity=multiplicity,
    )


def parse_topology(text: str) -> PodTopology:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"topology file is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ValueError("topology file must contain a JSON object")
    return topology_from_dict(raw)


def topology_to_dot(topology: PodTopology) -> str:
    """Two-rank DOT graph: hosts on top, MHDs below."""
    lines = [
        "graph pod {",
        "  rankdir=TB;",
        "  node [style=filled];",
        "  { rank=same;",
    ]
    for h in topology.hosts:
        lines.append(f'    "{h}" [shape=box, fillcolor=lightblue];')
    lines.append("  }")
    lines.append("  { rank=same;")
    for m in topology.mhds:
        lines.append(f'    "{m}" [shape=ellipse, fillcolor=lightsalmon];')
    lines.append("  }")
    edges = sorted(topology.edges, key=lambda e: (natural_key(e[0]), natural_key(e[1])))
    for a, b in edges:
        if topology.multiplicity > 1:
            lines.append(f'  "{a}" -- "{b}" [label="x{topology.multiplicity}"];')
        else:
            lines.append(f'  "{a}" -- "{b}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- traces -----------------------------------------------------------------

def parse_trace(text: str) -> list[TraceEvent]:
    """One JSON object per non-empty line; errors carry the line number."""
    events: list[TraceEvent] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedTrace(f"line {lineno}: invalid JSON: {exc}", line=lineno)
        if not isinstance(raw, dict) or "op" not in raw:
            raise MalformedTrace(f"line {lineno}: event must be an object with an 'op'", line=lineno)
        op = raw["op"]
        if op == "alloc":
            if "host" not in raw or "gb" not in raw:
                raise MalformedTrace(f"line {lineno}: alloc needs 'host' and 'gb'", line=lineno)
            gb = to_gb(raw["gb"])
            if gb <= 0:
                raise MalformedTrace(f"line {lineno}: alloc size must be positive", line=lineno)
            events.append(
                TraceEvent(op="alloc", host=str(raw["host"]), gb=gb,
                           policy=raw.get("policy"), line=lineno)
            )
        elif op == "free":
            if "id" not in raw:
                raise MalformedTrace(f"line {lineno}: free needs 'id'", line=lineno)
            events.append(TraceEvent(op="free", free_id=str(raw["id"]), line=lineno))
        else:
            raise MalformedTrace(f"line {lineno}: unknown op {op!r}", line=lineno)
    return events


def _outcome_to_dict(outcome: EventOutcome) -> dict:
    data: dict[str, Any] = {"index": outcome.index, "op": outcome.op, "ok": outcome.ok}
    if outcome.host is not None:
        data["host"] = outcome.host
    if outcome.op == "alloc":
        data["policy"] = outcome.policy
        data["gb"] = frac_json(outcome.request)
    if outcome.allocation_id is not None:
        data["id"] = outcome.allocation_id
    if outcome.shares is not None:
        data["shares"] = {m: frac_str(s) for m, s in outcome.shares.items()}
        data["shares_quantized"] = {
            m: frac_json(s) for m, s in outcome.shares_quantized.items()
        }
    if not outcome.ok:
        data["error"] = outcome.error
        data["reachable_free_gb"] = frac_json(outcome.reachable_free)
        data["stranded"] = outcome.stranded
    return data


def trace_report_to_dict(report: TraceReport, default_policy: str) -> dict:
    return {
        "default_policy": default_policy,
        "capacity_gb": {m: frac_json(v) for m, v in report.totals_gb.items()},
        "events": [_outcome_to_dict(o) for o in report.outcomes],
        "insufficient_capacity_events": report.insufficient_capacity_events,
        "stranding_events": report.stranding_events,
        "stranded_event_indexes": list(report.stranded_indexes),
        "peak_used_gb": {m: frac_json(v) for m, v in report.peak_used_gb.items()},
        "final_available_gb": {
            m: frac_json(v) for m, v in report.final_available_gb.items()
        },
    }


# -- placement --------------------------------------------------------------

def queue_plan_to_dict(plan: QueuePlan) -> dict:
    return {
        "pair_size_gb": frac_json(plan.pair_size_gb),
        "regions": [list(region) for region in plan.regions],
        "per_mhd": {
            m: {
                "regions": plan.per_mhd_regions[m],
                "gb": frac_json(plan.per_mhd_gb[m]),
            }
            for m in plan.per_mhd_regions
        },
    }


# -- sweeps -----------------------------------------------------------------

SWEEP_COLUMNS = [
    "config", "kind", "mhd_ports", "host_ports", "sku",
    "pod_size", "mhd_count", "cost_per_host", "note",
]
FRONTIER_COLUMNS = [
    "config", "kind", "mhd_ports", "host_ports", "sku",
    "pod_size", "mhd_count", "cost_per_host",
]


def parse_sweep_configs(text: str) -> list[SweepConfig]:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"config list is not valid JSON: {exc}") from exc
    if isinstance(raw, dict):
        raw = raw.get("configs")
    if not isinstance(raw, list):
        raise ValueError("config list must be a JSON array (or an object with 'configs')")
    configs = []
    for position, entry in enumerate(raw, start=1):
        if not isinstance(entry, dict):
            raise ValueError(f"config #{position} must be an object")
        try:
            configs.append(
                SweepConfig(
                    kind=TopologyKind(entry["kind"]),
                    host_ports=int(entry["host_ports"]),
                    mhd_ports=int(entry["mhd_ports"]),
                    sku=str(entry["sku"]),
                    lam=int(entry["lambda"]) if "lambda" in entry else None,
                    config_id=str(entry["id"]) if "id" in entry else None,
                )
            )
        except (KeyError, ValueError) as exc:
            raise ValueError(f"config #{position} is invalid: {exc}") from exc
    return configs


def csv_table(columns: list[str], rows: Iterable[list]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return buffer.getvalue()


def sweep_to_csv(result: SweepResult) -> str:
    rows = []
    for entry in result.entries:
        if isinstance(entry, SweepRow):
            rows.append([
                entry.config_id, entry.kind.value, entry.mhd_ports, entry.host_ports,
                entry.sku, entry.pod_size, entry.mhd_count,
                money_str(entry.cost_per_host), "",
            ])
        else:
            rows.append([
                entry.config_id, entry.kind.value, entry.mhd_ports, entry.host_ports,
                entry.sku, "", "", "", f"skipped: {entry.reason}",
            ])
    return csv_table(SWEEP_COLUMNS, rows)


def frontier_to_csv(frontier: Frontier) -> str:
    rows = [
        [row.config_id, row.kind.value, row.mhd_ports, row.host_ports, row.sku,
         row.pod_size, row.mhd_count, money_str(row.cost_per_host)]
        for row in frontier.rows
    ]
    return csv_table(FRONTIER_COLUMNS, rows)

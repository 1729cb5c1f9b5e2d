"""Configuration sweeps, Pareto frontier, and pod-size scaling curves."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import CxlPodError, FisherViolation, IndivisibleParams
from .hardware import BUILTIN_SKUS, MhdSku, YieldModel, estimate_unit_cost, sku_by_name
from .topology import TopologyKind, derive_dense_params, derive_regular_params


@dataclass(frozen=True)
class SweepConfig:
    kind: TopologyKind
    host_ports: int
    mhd_ports: int
    sku: str
    lam: int | None = None  # dense only
    config_id: str | None = None


@dataclass(frozen=True)
class SweepRow:
    config_id: str
    kind: TopologyKind
    mhd_ports: int
    host_ports: int
    sku: str
    pod_size: int
    mhd_count: int
    cost_per_host: float


@dataclass(frozen=True)
class SweepSkip:
    config_id: str
    kind: TopologyKind
    mhd_ports: int
    host_ports: int
    sku: str
    reason: str


@dataclass(frozen=True)
class SweepResult:
    entries: tuple[SweepRow | SweepSkip, ...]  # input order, skips in place

    @property
    def rows(self) -> tuple[SweepRow, ...]:
        return tuple(e for e in self.entries if isinstance(e, SweepRow))

    @property
    def skips(self) -> tuple[SweepSkip, ...]:
        return tuple(e for e in self.entries if isinstance(e, SweepSkip))


def pod_shape(config: SweepConfig) -> tuple[int, int]:
    """(pod size, MHD count) for a configuration."""
    if config.kind is TopologyKind.SYMMETRIC:
        return config.mhd_ports, config.host_ports
    if config.kind is TopologyKind.REGULAR:
        params = derive_regular_params(config.host_ports, config.mhd_ports)
    else:
        if config.lam is None:
            raise ValueError("dense configurations need lambda")
        params = derive_dense_params(config.host_ports, config.mhd_ports, config.lam)
    return params.v, params.b


def sweep(
    configs: Sequence[SweepConfig],
    skus: tuple[MhdSku, ...] = BUILTIN_SKUS,
    *,
    cost_model: YieldModel | None = None,
    anchor: str = "XLarge",
) -> SweepResult:
    """Evaluate configurations into (pod size, MHD count, $/host) rows.

    Unit costs come from the SKU table; passing ``cost_model`` switches
    to analytic estimates anchored at ``anchor``'s table price.
    Infeasible configurations become in-place skip annotations.
    """
    entries: list[SweepRow | SweepSkip] = []
    for position, config in enumerate(configs, start=1):
        config_id = config.config_id or str(position)
        sku = sku_by_name(config.sku, skus)
        try:
            pod_size, mhd_count = pod_shape(config)
        except (IndivisibleParams, FisherViolation) as exc:
            entries.append(
                SweepSkip(
                    config_id=config_id,
                    kind=config.kind,
                    mhd_ports=config.mhd_ports,
                    host_ports=config.host_ports,
                    sku=sku.name,
                    reason=str(exc),
                )
            )
            continue
        if cost_model is None:
            unit_cost = sku.unit_cost_usd
        else:
            anchor_sku = sku_by_name(anchor, skus)
            unit_cost = estimate_unit_cost(
                sku, anchor_sku, anchor_sku.unit_cost_usd, cost_model
            )
        entries.append(
            SweepRow(
                config_id=config_id,
                kind=config.kind,
                mhd_ports=config.mhd_ports,
                host_ports=config.host_ports,
                sku=sku.name,
                pod_size=pod_size,
                mhd_count=mhd_count,
                cost_per_host=mhd_count * unit_cost / pod_size,
            )
        )
    return SweepResult(entries=tuple(entries))


@dataclass(frozen=True)
class Frontier:
    """Non-dominated rows, ascending in pod size (and therefore cost)."""

    rows: tuple[SweepRow, ...]


def dominates(a: SweepRow, b: SweepRow) -> bool:
    """Weak dominance with one strict inequality: bigger-or-equal pod at
    smaller-or-equal cost."""
    if a.pod_size < b.pod_size or a.cost_per_host > b.cost_per_host:
        return False
    return a.pod_size > b.pod_size or a.cost_per_host < b.cost_per_host


def pareto_frontier(rows: Iterable[SweepRow]) -> Frontier:
    """Maximal non-dominated subset; exact ties keep the first-listed row."""
    indexed = list(rows)
    order = sorted(
        range(len(indexed)),
        key=lambda i: (-indexed[i].pod_size, indexed[i].cost_per_host, i),
    )
    kept: list[int] = []
    best_cost: float | None = None
    for i in order:
        cost = indexed[i].cost_per_host
        if best_cost is None or cost < best_cost:
            kept.append(i)
            best_cost = cost
    kept.sort()
    frontier_rows = sorted(
        (indexed[i] for i in kept), key=lambda r: (r.pod_size, r.cost_per_host)
    )
    return Frontier(rows=tuple(frontier_rows))


@dataclass(frozen=True)
class Comparison:
    """How a candidate row stacks up against a baseline row."""

    candidate: SweepRow
    baseline: SweepRow

    @property
    def host_ratio(self) -> float:
        return self.candidate.pod_size / self.baseline.pod_size

    @property
    def cost_change(self) -> float:
        """Fractional $/host change; negative means the candidate is cheaper."""
        return (
            self.candidate.cost_per_host - self.baseline.cost_per_host
        ) / self.baseline.cost_per_host


def compare_rows(candidate: SweepRow, baseline: SweepRow) -> Comparison:
    return Comparison(candidate=candidate, baseline=baseline)


def pod_size_curve(
    kinds: Sequence[TopologyKind],
    mhd_ports: int,
    host_ports_range: Sequence[int],
) -> dict[TopologyKind, list[tuple[int, int]]]:
    """Pod size as a function of host ports, per topology kind.

    The symmetric baseline is flat at the MHD port count; regular pods
    grow multiplicatively with the host port count.
    """
    if not host_ports_range:
        raise ValueError("host_ports_range must be non-empty")
    curves: dict[TopologyKind, list[tuple[int, int]]] = {}
    for kind in kinds:
        if kind is TopologyKind.SYMMETRIC:
            curves[kind] = [(x, mhd_ports) for x in host_ports_range]
        elif kind is TopologyKind.REGULAR:
            curves[kind] = [
                (x, 1 + x * (mhd_ports - 1)) for x in host_ports_range
            ]
        else:
            raise CxlPodError(f"no pod-size curve for kind {kind.value!r}")
    return curves

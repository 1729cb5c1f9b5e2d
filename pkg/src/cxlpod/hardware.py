"""MHD silicon cost model: wafer geometry, Murphy die yield, pod cost.

The built-in SKU table is the canonical dataset (including its printed
good-die counts and prices); the analytic wafer/yield pipeline is a
cross-check, not the source of record.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ZeroGoodDies
from .topology import PodTopology

# Minimax fit of the Murphy model (defects over active die area) to the
# built-in good-die counts; max relative error 8.7% across the four SKUs.
DEFAULT_DEFECT_DENSITY = 0.003532  # defects per mm^2
DEFAULT_WAFER_DIAMETER = 300.0  # mm


@dataclass(frozen=True)
class MhdSku:
    """One MHD hardware profile.

    ``good_dies`` and ``unit_cost_usd`` carry the canonical dataset
    values for the built-in SKUs; ``latency_is_floor`` marks latencies
    quoted as a lower bound (">400 ns").
    """

    name: str
    cxl_ports: int
    ddr5_channels: int
    die_area_mm2: float
    unused_area_mm2: float
    capacity_gb: int
    latency_ns: float
    unit_cost_usd: float
    good_dies: int | None = None
    latency_is_floor: bool = False

    def __post_init__(self) -> None:
        if self.die_area_mm2 <= 0:
            raise ValueError("die_area_mm2 must be positive")
        if self.unused_area_mm2 >= self.die_area_mm2 or self.unused_area_mm2 < 0:
            raise ValueError("unused_area_mm2 must be in [0, die_area_mm2)")
        if self.cxl_ports < 1:
            raise ValueError("cxl_ports must be >= 1")

    @property
    def active_area_mm2(self) -> float:
        return self.die_area_mm2 - self.unused_area_mm2


@dataclass(frozen=True)
class YieldModel:
    wafer_diameter_mm: float = DEFAULT_WAFER_DIAMETER
    defect_density: float = DEFAULT_DEFECT_DENSITY  # defects per mm^2

    def __post_init__(self) -> None:
        if self.wafer_diameter_mm <= 0 or self.defect_density <= 0:
            raise ValueError("wafer diameter and defect density must be positive")


BUILTIN_SKUS: tuple[MhdSku, ...] = (
    MhdSku("XSmall", 2, 2, 14.0, 0.0, 512, 230.0, 300.0, good_dies=4263),
    MhdSku("Small", 4, 4, 30.0, 2.0, 1024, 250.0, 670.0, good_dies=1912),
    MhdSku("Large", 8, 8, 69.0, 12.0, 2048, 350.0, 1600.0, good_dies=799),
    MhdSku("XLarge", 16, 12, 181.0, 77.0, 3072, 400.0, 5000.0, good_dies=260, latency_is_floor=True),
)


def sku_by_name(name: str, skus: tuple[MhdSku, ...] = BUILTIN_SKUS) -> MhdSku:
    for sku in skus:
        if sku.name == name:
            return sku
    raise KeyError(f"unknown SKU {name!r}; available: {[s.name for s in skus]}")


def gross_dies_per_wafer(model: YieldModel, die_area_mm2: float) -> int:
    """Die sites per wafer: area quotient minus edge loss, floored at 0."""
    if die_area_mm2 <= 0:
        raise ValueError("die_area_mm2 must be positive")
    d = model.wafer_diameter_mm
    count = math.pi * (d / 2) ** 2 / die_area_mm2 - math.pi * d / math.sqrt(
        2 * die_area_mm2
    )
    return max(0, math.floor(count))


def murphy_yield(model: YieldModel, defect_area_mm2: float) -> float:
    """Murphy die yield ((1 - e^(-A*D)) / (A*D))^2 over the defect-prone area."""
    if defect_area_mm2 < 0:
        raise ValueError("defect_area_mm2 must be non-negative")
    x = defect_area_mm2 * model.defect_density
    if x < 1e-12:
        return 1.0  # continuous extension at A*D -> 0
    return ((1.0 - math.exp(-x)) / x) ** 2


def good_dies_per_wafer(
    model: YieldModel, die_area_mm2: float, unused_area_mm2: float = 0.0
) -> int:
    """Sellable dies per wafer.

    Defects are counted against the active area only: a defect landing
    in unused silicon does not kill the die.
    """
    gross = gross_dies_per_wafer(model, die_area_mm2)
    return math.floor(gross * murphy_yield(model, die_area_mm2 - unused_area_mm2))


def good_dies_for_sku(model: YieldModel, sku: MhdSku) -> int:
    return good_dies_per_wafer(model, sku.die_area_mm2, sku.unused_area_mm2)


def _good_dies(sku: MhdSku, model: YieldModel | None) -> int:
    if model is None:
        if sku.good_dies is None:
            raise ValueError(
                f"SKU {sku.name!r} has no canonical good-die count; pass a YieldModel"
            )
        return sku.good_dies
    return good_dies_for_sku(model, sku)


def relative_cost(
    sku: MhdSku, reference: MhdSku, model: YieldModel | None = None
) -> float:
    """Cost of ``sku`` relative to ``reference``: reference dies / sku dies.

    With ``model=None`` the canonical good-die counts are used; passing
    a model recomputes both counts through the yield pipeline.
    """
    sku_dies = _good_dies(sku, model)
    if sku_dies == 0:
        raise ZeroGoodDies(f"SKU {sku.name!r} yields no good dies")
    return _good_dies(reference, model) / sku_dies


def estimate_unit_cost(
    sku: MhdSku,
    anchor: MhdSku,
    anchor_cost: float,
    model: YieldModel | None = None,
) -> float:
    """Price ``sku`` by scaling an anchor price with the good-die ratio."""
    if anchor_cost <= 0:
        raise ValueError("anchor_cost must be positive")
    sku_dies = _good_dies(sku, model)
    if sku_dies == 0:
        raise ZeroGoodDies(f"SKU {sku.name!r} yields no good dies")
    return anchor_cost * _good_dies(anchor, model) / sku_dies


def pod_cost_per_host(topology: PodTopology, sku: MhdSku) -> float:
    """MHD spend per host; cabling and power are deliberately excluded."""
    if not topology.hosts:
        raise ValueError("topology has no hosts")
    total = len(topology.mhds) * sku.unit_cost_usd * topology.multiplicity
    return total / len(topology.hosts)

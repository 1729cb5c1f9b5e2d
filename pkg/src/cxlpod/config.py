"""Run configuration: SKU table, yield model, and tool defaults."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .allocator import to_gb
from .hardware import BUILTIN_SKUS, MhdSku, YieldModel
from .placement import PAGE_SIZES
from .topology import DEFAULT_SEARCH_BUDGET


@dataclass(frozen=True)
class RunConfig:
    skus: tuple[MhdSku, ...] = BUILTIN_SKUS
    yield_model: YieldModel = field(default_factory=YieldModel)
    default_page_size: str = "2MiB"
    quantization_gb: Fraction = Fraction(1)
    search_budget: int = DEFAULT_SEARCH_BUDGET


def _sku_from_dict(raw: dict) -> MhdSku:
    try:
        return MhdSku(
            name=raw["name"],
            cxl_ports=int(raw["cxl_ports"]),
            ddr5_channels=int(raw["ddr5_channels"]),
            die_area_mm2=float(raw["die_area_mm2"]),
            unused_area_mm2=float(raw.get("unused_area_mm2", 0.0)),
            capacity_gb=int(raw["capacity_gb"]),
            latency_ns=float(raw["latency_ns"]),
            unit_cost_usd=float(raw["unit_cost_usd"]),
            good_dies=int(raw["good_dies"]) if "good_dies" in raw else None,
            latency_is_floor=bool(raw.get("latency_is_floor", False)),
        )
    except KeyError as exc:
        raise ValueError(f"SKU entry missing field {exc.args[0]!r}") from None


def load_config(path: str | Path | None) -> RunConfig:
    """Defaults, overridden field-by-field from a JSON config file."""
    if path is None:
        return RunConfig()
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, dict):
        raise ValueError("config file must contain a JSON object")

    defaults = RunConfig()
    skus = defaults.skus
    if "skus" in raw:
        skus = tuple(_sku_from_dict(entry) for entry in raw["skus"])

    yield_model = YieldModel(
        wafer_diameter_mm=float(
            raw.get("wafer_diameter_mm", defaults.yield_model.wafer_diameter_mm)
        ),
        defect_density=float(
            raw.get("defect_density_per_mm2", defaults.yield_model.defect_density)
        ),
    )

    page_size = raw.get("default_page_size", defaults.default_page_size)
    if page_size not in PAGE_SIZES:
        raise ValueError(f"default_page_size must be one of {sorted(PAGE_SIZES)}")

    quantization = to_gb(raw.get("quantization_gb", defaults.quantization_gb))
    if quantization <= 0:
        raise ValueError("quantization_gb must be positive")

    budget = int(raw.get("search_budget", defaults.search_budget))
    if budget < 1:
        raise ValueError("search_budget must be positive")

    return RunConfig(
        skus=skus,
        yield_model=yield_model,
        default_page_size=page_size,
        quantization_gb=quantization,
        search_budget=budget,
    )

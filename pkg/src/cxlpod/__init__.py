"""Design and evaluation toolkit for CXL memory pods.

Builds symmetric and block-design-based host/MHD topologies, models MHD
silicon cost from die area and wafer yield, simulates pooled-memory
allocation, plans page interleaving and pairwise queue placement, and
sweeps configurations onto a pod-size/cost Pareto frontier.
"""

from .allocator import (
    Allocation,
    AllocationPlan,
    PoolState,
    TraceEvent,
    TraceReport,
    allocate_highest_capacity,
    allocate_proportional,
    allocate_symmetric_equal,
    free,
    quantize_shares,
    replay_trace,
)
from .analysis import (
    Comparison,
    Frontier,
    SweepConfig,
    SweepResult,
    SweepRow,
    SweepSkip,
    compare_rows,
    pareto_frontier,
    pod_size_curve,
    sweep,
)
from .config import RunConfig, load_config
from .hardware import (
    BUILTIN_SKUS,
    MhdSku,
    YieldModel,
    estimate_unit_cost,
    good_dies_for_sku,
    good_dies_per_wafer,
    gross_dies_per_wafer,
    murphy_yield,
    pod_cost_per_host,
    relative_cost,
    sku_by_name,
)
from .placement import InterleavePlan, QueuePlan, interleave_plan, queue_plan
from .topology import (
    BibdParams,
    PodTopology,
    TopologyKind,
    ValidationReport,
    common_mhds,
    construct,
    construct_symmetric,
    derive_dense_params,
    derive_regular_params,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "AllocationPlan",
    "BibdParams",
    "BUILTIN_SKUS",
    "Comparison",
    "Frontier",
    "InterleavePlan",
    "MhdSku",
    "PodTopology",
    "PoolState",
    "QueuePlan",
    "RunConfig",
    "SweepConfig",
    "SweepResult",
    "SweepRow",
    "SweepSkip",
    "TopologyKind",
    "TraceEvent",
    "TraceReport",
    "ValidationReport",
    "YieldModel",
    "allocate_highest_capacity",
    "allocate_proportional",
    "allocate_symmetric_equal",
    "common_mhds",
    "compare_rows",
    "construct",
    "construct_symmetric",
    "derive_dense_params",
    "derive_regular_params",
    "estimate_unit_cost",
    "free",
    "good_dies_for_sku",
    "good_dies_per_wafer",
    "gross_dies_per_wafer",
    "interleave_plan",
    "load_config",
    "murphy_yield",
    "pareto_frontier",
    "pod_cost_per_host",
    "pod_size_curve",
    "quantize_shares",
    "queue_plan",
    "relative_cost",
    "replay_trace",
    "sku_by_name",
    "sweep",
    "validate",
]

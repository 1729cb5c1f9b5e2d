"""Page interleaving across an allocation's MHDs and pairwise queue placement."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .errors import EmptyPlan, NoCommonMhd, UnsupportedTopology
from .allocator import AllocationPlan, GbLike, to_gb
from .topology import PodTopology, TopologyKind, common_mhds, natural_key

PAGE_SIZES = {
    "4KiB": 4096,
    "2MiB": 2 * 1024 * 1024,
    "1GiB": 1024 * 1024 * 1024,
}
GB = 1024 * 1024 * 1024


@dataclass(frozen=True)
class InterleavePlan:
    """Deterministic page-to-MHD assignment for one allocation.

    Page n goes to the under-quota MHD (assigned_i < n*w_i, so taking
    the page cannot push it a full page ahead) with the highest award
    priority w_i / (assigned_i + 1); ties go to the lower MHD index.
    Every prefix then stays strictly within one page of the target
    weights on every MHD.
    """

    page_size: str
    page_bytes: int
    total_pages: int
    weights: dict[str, Fraction]  # per-MHD share of the request, sums to 1

    def first_pages(self, n: int) -> list[str]:
        n = min(n, self.total_pages)
        sequence, _ = self._walk(n)
        return sequence

    def counts_after(self, n: int) -> dict[str, int]:
        _, counts = self._walk(min(n, self.total_pages))
        return counts

    def _walk(self, n: int) -> tuple[list[str], dict[str, int]]:
        mhds = list(self.weights)
        # integer arithmetic: weight p_i/q with q the common denominator
        q = math.lcm(*(w.denominator for w in self.weights.values()))
        p = [self.weights[m].numerator * (q // self.weights[m].denominator) for m in mhds]
        assigned = [0] * len(mhds)
        sequence: list[str] = []
        for t in range(n):
            best = -1
            for i in range(len(mhds)):
                if q * assigned[i] >= (t + 1) * p[i]:
                    continue  # already at quota for this prefix
                if best < 0 or p[i] * (assigned[best] + 1) > p[best] * (assigned[i] + 1):
                    best = i
            assigned[best] += 1
            sequence.append(mhds[best])
        return sequence, dict(zip(mhds, assigned))


def interleave_plan(plan: AllocationPlan, page_size: str) -> InterleavePlan:
    """Weighted round-robin interleave of an allocation at page granularity."""
    if page_size not in PAGE_SIZES:
        raise ValueError(f"page_size must be one of {sorted(PAGE_SIZES)}, got {page_size!r}")
    shares = {m: s for m, s in plan.shares.items() if s > 0}
    if not shares:
        raise EmptyPlan("allocation plan has no shares to interleave")
    page_bytes = PAGE_SIZES[page_size]
    pages = plan.request * GB / page_bytes
    if pages.denominator != 1 or pages <= 0:
        raise ValueError(
            f"request {plan.request} GB is not a positive whole number of {page_size} pages"
        )
    ordered = sorted(shares, key=natural_key)
    weights = {m: shares[m] / plan.request for m in ordered}
    return InterleavePlan(
        page_size=page_size,
        page_bytes=page_bytes,
        total_pages=int(pages),
        weights=weights,
    )


@dataclass(frozen=True)
class QueuePlan:
    """One shared-queue region per unordered host pair, placed on a common MHD."""

    pair_size_gb: Fraction
    regions: tuple[tuple[str, str, str], ...]  # (host_a, host_b, mhd)
    per_mhd_regions: dict[str, int]
    per_mhd_gb: dict[str, Fraction]


def queue_plan(topology: PodTopology, per_pair_size: GbLike) -> QueuePlan:
    """Place a pairwise communication region for every host pair.

    On a regular pod each pair has exactly one common MHD, so placement
    is forced and every MHD ends up hosting the same number of regions.
    On a symmetric pod the pair goes to the least-loaded MHD (ties to
    the lower index).
    """
    size = to_gb(per_pair_size)
    if size <= 0:
        raise ValueError(f"per_pair_size must be positive, got {size}")
    if topology.kind is TopologyKind.DENSE:
        raise UnsupportedTopology(
            "queue placement on dense pods is not defined; use a regular or symmetric pod"
        )
    load: dict[str, Fraction] = {m: Fraction(0) for m in topology.mhds}
    count: dict[str, int] = {m: 0 for m in topology.mhds}
    regions: list[tuple[str, str, str]] = []
    for host_a, host_b in combinations(topology.hosts, 2):
        shared = sorted(common_mhds(topology, host_a, host_b), key=natural_key)
        if not shared:
            raise NoCommonMhd(f"hosts {host_a} and {host_b} share no MHD")
        if topology.kind is TopologyKind.SYMMETRIC:
            target = min(shared, key=lambda m: (load[m], natural_key(m)))
        else:
            target = shared[0]
        regions.append((host_a, host_b, target))
        load[target] += size
        count[target] += 1
    return QueuePlan(
        pair_size_gb=size,
        regions=tuple(regions),
        per_mhd_regions=count,
        per_mhd_gb=load,
    )

"""Pooled-memory allocation over a pod topology.

Shares are exact rationals internally so conservation and
proportionality hold bit-for-bit; reports quantize to a configured
granularity with largest-remainder apportionment.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

from .errors import (
    InsufficientCapacity,
    MalformedTrace,
    UnknownAllocation,
    UnknownHost,
    UnsupportedTopology,
)
from .hardware import MhdSku
from .topology import PodTopology, TopologyKind, natural_key

GbLike = Union[int, float, str, Fraction]


def to_gb(value: GbLike) -> Fraction:
    """Exact conversion; floats go through their decimal repr."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


@dataclass(frozen=True)
class AllocationPlan:
    """Per-MHD breakdown of one request; shares always sum to the request."""

    request: Fraction
    shares: dict[str, Fraction]


@dataclass(frozen=True)
class Allocation:
    allocation_id: str
    host: str
    plan: AllocationPlan


class PoolState:
    """Mutable per-MHD capacity plus the ledger of live allocations.

    Mutations are serialized (single-writer); failed allocations leave
    the state untouched.
    """

    def __init__(self, capacities: Mapping[str, GbLike]):
        self.totals = {m: to_gb(c) for m, c in capacities.items()}
        for mhd, total in self.totals.items():
            if total < 0:
                raise ValueError(f"negative capacity for {mhd}")
        self.available = dict(self.totals)
        self.ledger: dict[str, Allocation] = {}
        self._next_id = 1

    @classmethod
    def for_topology(
        cls, topology: PodTopology, capacity: Union[GbLike, MhdSku, Mapping[str, GbLike]]
    ) -> "PoolState":
        if isinstance(capacity, MhdSku):
            per_mhd: Mapping[str, GbLike] = {m: capacity.capacity_gb for m in topology.mhds}
        elif isinstance(capacity, Mapping):
            missing = [m for m in topology.mhds if m not in capacity]
            if missing:
                raise ValueError(f"missing capacities for {missing}")
            per_mhd = {m: capacity[m] for m in topology.mhds}
        else:
            per_mhd = {m: capacity for m in topology.mhds}
        return cls(per_mhd)

    def pod_free(self) -> Fraction:
        return sum(self.available.values(), Fraction(0))

    def used(self, mhd: str) -> Fraction:
        return self.totals[mhd] - self.available[mhd]

    def assert_consistent(self) -> None:
        ledger_loads: dict[str, Fraction] = {m: Fraction(0) for m in self.totals}
        for allocation in self.ledger.values():
            for mhd, share in allocation.plan.shares.items():
                ledger_loads[mhd] += share
        for mhd in self.totals:
            if not Fraction(0) <= self.available[mhd] <= self.totals[mhd]:
                raise AssertionError(f"available out of range on {mhd}")
            if self.totals[mhd] - self.available[mhd] != ledger_loads[mhd]:
                raise AssertionError(f"ledger does not match usage on {mhd}")

    def _register(self, host: str, plan: AllocationPlan) -> Allocation:
        allocation = Allocation(f"a{self._next_id}", host, plan)
        self._next_id += 1
        for mhd, share in plan.shares.items():
            self.available[mhd] -= share
        self.ledger[allocation.allocation_id] = allocation
        return allocation


def _connected(state: PoolState, topology: PodTopology, host: str) -> tuple[str, ...]:
    if host not in topology.mhds_by_host:
        raise UnknownHost(f"host {host!r} is not in the topology")
    return topology.mhds_by_host[host]


def _check_request(request: Fraction) -> Fraction:
    request = to_gb(request)
    if request <= 0:
        raise ValueError(f"request must be positive, got {request}")
    return request


def allocate_proportional(
    state: PoolState, topology: PodTopology, host: str, request: GbLike
) -> Allocation:
    """Split the request across connected MHDs proportionally to their
    free capacity, so a full-pool request drains every reachable MHD."""
    request = _check_request(request)
    mhds = _connected(state, topology, host)
    total_free = sum((state.available[m] for m in mhds), Fraction(0))
    if total_free < request:
        raise InsufficientCapacity(
            f"host {host} can reach only {total_free} GB free, needs {request} GB",
            total_free,
        )
    shares = {
        m: request * state.available[m] / total_free
        for m in mhds
        if state.available[m] > 0
    }
    return state._register(host, AllocationPlan(request, shares))


def allocate_symmetric_equal(
    state: PoolState, topology: PodTopology, host: str, request: GbLike
) -> Allocation:
    """Equal share from every MHD; only defined on symmetric pods."""
    if topology.kind is not TopologyKind.SYMMETRIC:
        raise UnsupportedTopology("equal-share allocation requires a symmetric pod")
    request = _check_request(request)
    mhds = _connected(state, topology, host)
    share = request / len(mhds)
    binding = min(mhds, key=lambda m: (state.available[m], natural_key(m)))
    if state.available[binding] < share:
        raise InsufficientCapacity(
            f"MHD {binding} has {state.available[binding]} GB free, "
            f"equal shares need {share} GB each",
            state.available[binding],
        )
    return state._register(host, AllocationPlan(request, {m: share for m in mhds}))


def allocate_highest_capacity(
    state: PoolState, topology: PodTopology, host: str, request: GbLike
) -> Allocation:
    """Fill from the most-free connected MHD, spilling only when drained."""
    request = _check_request(request)
    mhds = _connected(state, topology, host)
    total_free = sum((state.available[m] for m in mhds), Fraction(0))
    if total_free < request:
        raise InsufficientCapacity(
            f"host {host} can reach only {total_free} GB free, needs {request} GB",
            total_free,
        )
    shares: dict[str, Fraction] = {}
    remaining = request
    for mhd in sorted(mhds, key=lambda m: (-state.available[m], natural_key(m))):
        if remaining == 0:
            break
        take = min(remaining, state.available[mhd])
        if take > 0:
            shares[mhd] = take
            remaining -= take
    shares = {m: shares[m] for m in sorted(shares, key=natural_key)}
    return state._register(host, AllocationPlan(request, shares))


POLICIES = {
    "proportional": allocate_proportional,
    "symmetric-equal": allocate_symmetric_equal,
    "highest-capacity": allocate_highest_capacity,
}


def free(state: PoolState, allocation_id: str) -> None:
    """Return every share of the allocation to its MHD."""
    allocation = state.ledger.pop(allocation_id, None)
    if allocation is None:
        raise UnknownAllocation(f"allocation {allocation_id!r} is not live")
    for mhd, share in allocation.plan.shares.items():
        state.available[mhd] += share


def quantize_shares(
    plan: AllocationPlan, granularity: GbLike = 1
) -> dict[str, Fraction]:
    """Largest-remainder apportionment of the plan onto a page grid.

    Ties go to the lower MHD index. The request must be a whole number
    of granules.
    """
    granularity = to_gb(granularity)
    if granularity <= 0:
        raise ValueError("granularity must be positive")
    units = plan.request / granularity
    if units.denominator != 1:
        raise ValueError(
            f"request {plan.request} is not a whole number of {granularity} GB granules"
        )
    mhds = sorted(plan.shares, key=natural_key)
    quotas = {m: plan.shares[m] / granularity for m in mhds}
    counts = {m: quotas[m].numerator // quotas[m].denominator for m in mhds}
    leftover = int(units) - sum(counts.values())
    remainders = sorted(
        mhds, key=lambda m: (-(quotas[m] - counts[m]), natural_key(m))
    )
    for m in remainders[:leftover]:
        counts[m] += 1
    return {m: counts[m] * granularity for m in mhds}


@dataclass(frozen=True)
class TraceEvent:
    op: str  # "alloc" | "free"
    host: str | None = None
    gb: Fraction | None = None
    policy: str | None = None
    free_id: str | None = None
    line: int | None = None

    @classmethod
    def alloc(cls, host: str, gb: GbLike, policy: str | None = None) -> "TraceEvent":
        return cls(op="alloc", host=host, gb=to_gb(gb), policy=policy)

    @classmethod
    def free(cls, allocation_id: str) -> "TraceEvent":
        return cls(op="free", free_id=allocation_id)


@dataclass(frozen=True)
class EventOutcome:
    index: int  # 1-based event position
    op: str
    ok: bool
    host: str | None = None
    allocation_id: str | None = None
    policy: str | None = None
    request: Fraction | None = None
    shares: dict[str, Fraction] | None = None
    shares_quantized: dict[str, Fraction] | None = None
    error: str | None = None
    reachable_free: Fraction | None = None
    stranded: bool = False


@dataclass(frozen=True)
class TraceReport:
    outcomes: tuple[EventOutcome, ...]
    insufficient_capacity_events: int
    stranding_events: int
    peak_used_gb: dict[str, Fraction]
    final_available_gb: dict[str, Fraction]
    totals_gb: dict[str, Fraction]

    @property
    def stranded_indexes(self) -> tuple[int, ...]:
        return tuple(o.index for o in self.outcomes if o.stranded)


def replay_trace(
    topology: PodTopology,
    capacity: Union[GbLike, MhdSku, Mapping[str, GbLike]],
    events: Iterable[TraceEvent],
    *,
    default_policy: str = "proportional",
    granularity: GbLike = 1,
) -> TraceReport:
    """Deterministic sequential replay of alloc/free events.

    An allocation failure counts as stranding when the pod as a whole
    still has enough free capacity but the requesting host's reachable
    MHDs do not.
    """
    if default_policy not in POLICIES:
        raise ValueError(f"unknown policy {default_policy!r}")
    state = PoolState.for_topology(topology, capacity)
    outcomes: list[EventOutcome] = []
    insufficient = 0
    stranded_count = 0
    peak = {m: state.used(m) for m in topology.mhds}

    for index, event in enumerate(events, start=1):
        where = event.line if event.line is not None else index
        if event.op == "alloc":
            policy_name = event.policy or default_policy
            policy = POLICIES.get(policy_name)
            if policy is None:
                raise MalformedTrace(f"unknown policy {policy_name!r}", line=where)
            if event.host not in topology.mhds_by_host:
                raise MalformedTrace(f"unknown host {event.host!r}", line=where)
            if event.gb is None or event.gb <= 0:
                raise MalformedTrace("alloc size must be positive", line=where)
            pod_free = state.pod_free()
            reachable = sum(
                (state.available[m] for m in topology.mhds_by_host[event.host]),
                Fraction(0),
            )
            try:
                allocation = policy(state, topology, event.host, event.gb)
            except InsufficientCapacity as exc:
                insufficient += 1
                is_stranded = pod_free >= event.gb
                if is_stranded:
                    stranded_count += 1
                outcomes.append(
                    EventOutcome(
                        index=index,
                        op="alloc",
                        ok=False,
                        host=event.host,
                        policy=policy_name,
                        request=event.gb,
                        error=str(exc),
                        reachable_free=reachable,
                        stranded=is_stranded,
                    )
                )
            else:
                outcomes.append(
                    EventOutcome(
                        index=index,
                        op="alloc",
                        ok=True,
                        host=event.host,
                        allocation_id=allocation.allocation_id,
                        policy=policy_name,
                        request=event.gb,
                        shares=dict(allocation.plan.shares),
                        shares_quantized=quantize_shares(allocation.plan, granularity),
                    )
                )
        elif event.op == "free":
            if event.free_id is None:
                raise MalformedTrace("free event needs an allocation id", line=where)
            try:
                freed_host = state.ledger[event.free_id].host
            except KeyError:
                raise MalformedTrace(
                    f"allocation {event.free_id!r} is not live", line=where
                ) from None
            free(state, event.free_id)
            outcomes.append(
                EventOutcome(
                    index=index,
                    op="free",
                    ok=True,
                    host=freed_host,
                    allocation_id=event.free_id,
                )
            )
        else:
            raise MalformedTrace(f"unknown op {event.op!r}", line=where)
        for m in topology.mhds:
            used = state.used(m)
            if used > peak[m]:
                peak[m] = used

    return TraceReport(
        outcomes=tuple(outcomes),
        insufficient_capacity_events=insufficient,
        stranding_events=stranded_count,
        peak_used_gb=peak,
        final_available_gb=dict(state.available),
        totals_gb=dict(state.totals),
    )

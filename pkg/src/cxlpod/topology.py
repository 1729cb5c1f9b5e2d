"""Host-to-MHD pod topologies backed by balanced incomplete block designs.

A pod is a biregular bipartite graph: hosts on one side, multi-headed
devices (MHDs) on the other, CXL cables as edges. Three kinds are
supported:

* symmetric -- every host wired to every MHD (complete bipartite),
* regular   -- every host pair shares exactly one MHD (lambda = 1),
* dense     -- every host pair shares exactly lambda > 1 MHDs.

Regular and dense pods are 2-designs: v hosts placed in b blocks (MHDs)
of size k = MHD ports, each host in r = host ports blocks, each pair
co-occurring in lambda blocks. Construction is a deterministic
backtracking search over block-sorted canonical forms.
"""

from __future__ import annotations

import enum
import itertools
import sys
from dataclasses import dataclass
from functools import cached_property

from .errors import (
    FisherViolation,
    IndivisibleParams,
    NoDesignExists,
    SearchExhausted,
    UnknownHost,
)

DEFAULT_SEARCH_BUDGET = 2_000_000


class TopologyKind(enum.Enum):
    SYMMETRIC = "symmetric"
    REGULAR = "regular"
    DENSE = "dense"


def natural_key(identifier: str) -> tuple[str, int]:
    """Sort key for 'H10'/'P2'-style ids: prefix first, then numeric index."""
    i = 0
    while i < len(identifier) and not identifier[i].isdigit():
        i += 1
    suffix = identifier[i:]
    return (identifier[:i], int(suffix) if suffix.isdigit() else -1)


@dataclass(frozen=True)
class BibdParams:
    """Design parameters (v, b, r, k, lambda) with their counting identities."""

    v: int  # hosts
    b: int  # MHDs
    r: int  # blocks per host = host ports
    k: int  # hosts per block = MHD ports
    lam: int  # shared MHDs per host pair

    def __post_init__(self) -> None:
        for name in ("v", "b", "r", "k", "lam"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if self.b * self.k != self.v * self.r:
            raise ValueError(
                f"edge-count identity violated: b*k={self.b * self.k} != v*r={self.v * self.r}"
            )
        if self.lam * (self.v - 1) != self.r * (self.k - 1):
            raise ValueError(
                "pair-counting identity violated: "
                f"lambda*(v-1)={self.lam * (self.v - 1)} != r*(k-1)={self.r * (self.k - 1)}"
            )


@dataclass(frozen=True)
class PodTopology:
    """Immutable host/MHD incidence graph.

    ``multiplicity`` counts parallel cables per edge; 2 models the
    doubled-MHD variant that gives every host twice the lanes into the
    same block structure.
    """

    kind: TopologyKind
    hosts: tuple[str, ...]
    mhds: tuple[str, ...]
    edges: frozenset[tuple[str, str]]
    params: BibdParams | None = None
    multiplicity: int = 1

    @cached_property
    def mhds_by_host(self) -> dict[str, tuple[str, ...]]:
        adj: dict[str, list[str]] = {h: [] for h in self.hosts}
        for host, mhd in self.edges:
            adj[host].append(mhd)
        return {h: tuple(sorted(ms, key=natural_key)) for h, ms in adj.items()}

    @cached_property
    def hosts_by_mhd(self) -> dict[str, tuple[str, ...]]:
        adj: dict[str, list[str]] = {m: [] for m in self.mhds}
        for host, mhd in self.edges:
            adj[mhd].append(host)
        return {m: tuple(sorted(hs, key=natural_key)) for m, hs in adj.items()}

    @property
    def host_ports(self) -> int:
        """Expected host degree X."""
        if self.params is not None:
            return self.params.r
        return len(self.mhds)

    @property
    def mhd_ports(self) -> int:
        """Expected MHD degree N."""
        if self.params is not None:
            return self.params.k
        return len(self.hosts)

    @property
    def pair_coverage(self) -> int:
        """Expected number of MHDs shared by any host pair."""
        if self.params is not None:
            return self.params.lam
        return len(self.mhds)


@dataclass(frozen=True)
class ValidationReport:
    """Per-invariant check results; violations are entries, not errors."""

    expected_host_degree: int
    expected_mhd_degree: int
    expected_pair_coverage: int
    host_degree_violations: tuple[tuple[str, int], ...]
    mhd_degree_violations: tuple[tuple[str, int], ...]
    pair_coverage_violations: tuple[tuple[str, str, int], ...]
    reachability_violations: tuple[tuple[str, str], ...]

    @property
    def passed(self) -> bool:
        return not (
            self.host_degree_violations
            or self.mhd_degree_violations
            or self.pair_coverage_violations
            or self.reachability_violations
        )

    def lines(self) -> list[str]:
        out = []
        checks = [
            (
                f"host degree = {self.expected_host_degree}",
                [f"host {h} has degree {d}" for h, d in self.host_degree_violations],
            ),
            (
                f"mhd degree = {self.expected_mhd_degree}",
                [f"mhd {m} has degree {d}" for m, d in self.mhd_degree_violations],
            ),
            (
                f"pair coverage = {self.expected_pair_coverage}",
                [
                    f"pair ({a}, {b}) shares {n} mhds"
                    for a, b, n in self.pair_coverage_violations
                ],
            ),
            (
                "two-hop reachability",
                [f"pair ({a}, {b}) unreachable" for a, b in self.reachability_violations],
            ),
        ]
        for title, violations in checks:
            status = "ok" if not violations else f"{len(violations)} violation(s)"
            out.append(f"{title}: {status}")
            out.extend(f"  violation: {line}" for line in violations)
        return out


def derive_regular_params(host_ports: int, mhd_ports: int) -> BibdParams:
    """Parameters of the regular (lambda = 1) pod for X host / N MHD ports.

    Pod size is v = 1 + X*(N-1); the MHD count b = v*X/N must come out
    integral, otherwise no design exists for the port counts.
    """
    _check_ports(host_ports, mhd_ports)
    v = 1 + host_ports * (mhd_ports - 1)
    if (v * host_ports) % mhd_ports != 0:
        raise IndivisibleParams(
            f"no integral MHD count for host_ports={host_ports}, mhd_ports={mhd_ports}: "
            f"{v}*{host_ports} is not divisible by {mhd_ports}"
        )
    b = v * host_ports // mhd_ports
    return BibdParams(v=v, b=b, r=host_ports, k=mhd_ports, lam=1)


def derive_dense_params(host_ports: int, mhd_ports: int, lam: int) -> BibdParams:
    """Parameters of a dense pod where every host pair shares ``lam`` > 1 MHDs."""
    _check_ports(host_ports, mhd_ports)
    if lam < 2:
        raise ValueError(f"dense topologies require lambda >= 2, got {lam}")
    span = host_ports * (mhd_ports - 1)
    if span % lam != 0:
        raise IndivisibleParams(
            f"no integral pod size: {host_ports}*({mhd_ports}-1) is not divisible by lambda={lam}"
        )
    v = 1 + span // lam
    if (v * host_ports) % mhd_ports != 0:
        raise IndivisibleParams(
            f"no integral MHD count: {v}*{host_ports} is not divisible by {mhd_ports}"
        )
    b = v * host_ports // mhd_ports
    if b < v:
        raise FisherViolation(f"MHD count {b} smaller than pod size {v}")
    return BibdParams(v=v, b=b, r=host_ports, k=mhd_ports, lam=lam)


def _check_ports(host_ports: int, mhd_ports: int) -> None:
    if host_ports < 1:
        raise ValueError(f"host_ports must be >= 1, got {host_ports}")
    if mhd_ports < 2:
        raise ValueError(f"mhd_ports must be >= 2, got {mhd_ports}")


def host_id(index: int) -> str:
    return f"H{index + 1}"


def mhd_id(index: int) -> str:
    return f"P{index + 1}"


def _topology_from_blocks(
    params: BibdParams, blocks: list[tuple[int, ...]]
) -> PodTopology:
    hosts = tuple(host_id(i) for i in range(params.v))
    mhds = tuple(mhd_id(i) for i in range(params.b))
    edges = frozenset(
        (hosts[h], mhds[bi]) for bi, block in enumerate(blocks) for h in block
    )
    kind = TopologyKind.REGULAR if params.lam == 1 else TopologyKind.DENSE
    return PodTopology(kind=kind, hosts=hosts, mhds=mhds, edges=edges, params=params)


def construct(
    params: BibdParams, search_budget: int = DEFAULT_SEARCH_BUDGET
) -> PodTopology:
    """Build a pod topology realizing ``params`` by backtracking search.

    The search is deterministic: blocks are filled in lexicographic
    order with hosts tried ascending, so identical inputs always yield
    identical designs. Isomorphic branches are pruned (the first block
    is canonically the first k hosts, fresh hosts are introduced in
    label order, and hosts whose current block memberships coincide are
    interchangeable, so only the smallest is tried).

    The budget is counted in candidate host placements. Exceeding it
    raises :class:`SearchExhausted`; exhausting the pruned tree without
    a design proves none exists and raises :class:`NoDesignExists`.
    """
    blocks, _ = _search_design(params, search_budget)
    return _topology_from_blocks(params, blocks)


def _search_design(
    params: BibdParams, budget: int
) -> tuple[list[tuple[int, ...]], int]:
    v, b, r, k, lam = params.v, params.b, params.r, params.k, params.lam
    deg = [0] * v  # blocks joined so far, per host
    pair = [[0] * v for _ in range(v)]  # co-occurrences per host pair
    need = [lam * (v - 1)] * v  # unmet partner slots per host
    sig: list[tuple[int, ...]] = [()] * v  # block indices holding each host
    blocks: list[tuple[int, ...]] = []
    nodes = 0

    # depth: one frame per placed host plus one per block boundary
    required = b * (k + 2) + 200
    if sys.getrecursionlimit() < required:
        sys.setrecursionlimit(required)

    def place_ok(h: int, cur: list[int]) -> bool:
        if deg[h] >= r:
            return False
        row = pair[h]
        return all(row[u] < lam for u in cur)

    def do_place(h: int, cur: list[int], block_index: int) -> None:
        deg[h] += 1
        sig[h] = sig[h] + (block_index,)
        for u in cur:
            pair[h][u] += 1
            pair[u][h] += 1
            need[h] -= 1
            need[u] -= 1

    def undo_place(h: int, cur: list[int]) -> None:
        deg[h] -= 1
        sig[h] = sig[h][:-1]
        for u in cur:
            pair[h][u] -= 1
            pair[u][h] -= 1
            need[h] += 1
            need[u] += 1

    def feasible_after(h: int, cur: list[int]) -> bool:
        # Partner capacity: each future block supplies k-1 partners, the
        # current block still supplies k-m to its m members.
        m = len(cur) + 1
        for x in itertools.chain(cur, (h,)):
            if (r - deg[x]) * (k - 1) + (k - m) < need[x]:
                return False
        return True

    def extend(cur: list[int], prev: tuple[int, ...] | None, tight: bool) -> bool:
        nonlocal nodes
        block_index = len(blocks)
        if len(cur) == k:
            blocks.append(tuple(cur))
            if len(blocks) == b or search():
                return True
            blocks.pop()
            return False
        slot = len(cur)
        if not cur:
            # In a block-sorted design every new block starts with the
            # smallest host that still has ports left; forced choice.
            first = next((i for i in range(v) if deg[i] < r), None)
            if first is None or (tight and prev is not None and first < prev[0]):
                return False
            nodes += 1
            if nodes > budget:
                raise SearchExhausted(
                    f"search budget of {budget} node expansions exhausted", nodes
                )
            if place_ok(first, cur):
                do_place(first, cur, block_index)
                still_tight = tight and prev is not None and first == prev[0]
                if feasible_after(first, cur) and extend([first], prev, still_tight):
                    return True
                undo_place(first, cur)
            return False
        lo = cur[-1] + 1
        if tight and prev is not None:
            lo = max(lo, prev[slot])
        seen: set[tuple[int, ...]] = set()
        for h in range(lo, v):
            membership = sig[h]
            if membership in seen:
                continue  # interchangeable with an already-tried host
            seen.add(membership)
            nodes += 1
            if nodes > budget:
                raise SearchExhausted(
                    f"search budget of {budget} node expansions exhausted", nodes
                )
            if not place_ok(h, cur):
                continue
            do_place(h, cur, block_index)
            still_tight = tight and prev is not None and h == prev[slot]
            if feasible_after(h, cur) and extend(cur + [h], prev, still_tight):
                return True
            undo_place(h, cur)
        return False

    def search() -> bool:
        prev = blocks[-1] if blocks else None
        return extend([], prev, prev is not None)

    if search():
        return blocks, nodes
    raise NoDesignExists(
        f"no design exists for (v={v}, b={b}, r={r}, k={k}, lambda={lam}); "
        f"search tree exhausted after {nodes} node expansions",
        nodes,
    )


def construct_symmetric(host_count: int, mhd_count: int) -> PodTopology:
    """Complete bipartite pod: every host wired to every MHD."""
    if host_count < 1 or mhd_count < 1:
        raise ValueError("host_count and mhd_count must be >= 1")
    hosts = tuple(host_id(i) for i in range(host_count))
    mhds = tuple(mhd_id(i) for i in range(mhd_count))
    edges = frozenset((h, m) for h in hosts for m in mhds)
    return PodTopology(kind=TopologyKind.SYMMETRIC, hosts=hosts, mhds=mhds, edges=edges)


def validate(topology: PodTopology) -> ValidationReport:
    """Check degrees, pair coverage, and two-hop reachability.

    Violations become report entries so callers can inspect partial
    damage; nothing raises.
    """
    expected_x = topology.host_ports
    expected_n = topology.mhd_ports
    expected_lam = topology.pair_coverage

    host_degree = [
        (h, len(topology.mhds_by_host[h]))
        for h in topology.hosts
        if len(topology.mhds_by_host[h]) != expected_x
    ]
    mhd_degree = [
        (m, len(topology.hosts_by_mhd[m]))
        for m in topology.mhds
        if len(topology.hosts_by_mhd[m]) != expected_n
    ]

    pair_violations: list[tuple[str, str, int]] = []
    unreachable: list[tuple[str, str]] = []
    neighbor_sets = {h: set(ms) for h, ms in topology.mhds_by_host.items()}
    for a, b in itertools.combinations(topology.hosts, 2):
        shared = len(neighbor_sets[a] & neighbor_sets[b])
        if shared != expected_lam:
            pair_violations.append((a, b, shared))
        if shared == 0:
            unreachable.append((a, b))

    return ValidationReport(
        expected_host_degree=expected_x,
        expected_mhd_degree=expected_n,
        expected_pair_coverage=expected_lam,
        host_degree_violations=tuple(host_degree),
        mhd_degree_violations=tuple(mhd_degree),
        pair_coverage_violations=tuple(pair_violations),
        reachability_violations=tuple(unreachable),
    )


def common_mhds(topology: PodTopology, host_a: str, host_b: str) -> frozenset[str]:
    """MHDs adjacent to both hosts: the places the pair can meet."""
    if host_a == host_b:
        raise ValueError(f"need two distinct hosts, got {host_a!r} twice")
    for h in (host_a, host_b):
        if h not in topology.mhds_by_host:
            raise UnknownHost(f"host {h!r} is not in the topology")
    return frozenset(topology.mhds_by_host[host_a]) & frozenset(
        topology.mhds_by_host[host_b]
    )

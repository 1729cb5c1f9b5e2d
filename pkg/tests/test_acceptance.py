"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines as they complete.
"""

import itertools
import random
import time
from fractions import Fraction
from importlib import resources

import numpy as np
import pytest

from cxlpod import (
    PoolState,
    TraceEvent,
    YieldModel,
    allocate_highest_capacity,
    allocate_proportional,
    compare_rows,
    construct,
    derive_regular_params,
    estimate_unit_cost,
    free,
    good_dies_for_sku,
    interleave_plan,
    pareto_frontier,
    relative_cost,
    replay_trace,
    sku_by_name,
    sweep,
    validate,
)
from cxlpod.allocator import AllocationPlan
from cxlpod.analysis import SweepRow, TopologyKind, dominates
from cxlpod.errors import InsufficientCapacity, SearchExhausted
from cxlpod.serialization import frontier_to_csv, parse_sweep_configs, sweep_to_csv


def _record(line: str) -> None:
    print(f"ACCEPTANCE PASS: {line}")


def load_reference_configs():
    text = (
        resources.files("cxlpod.data").joinpath("reference_configs.json").read_text()
    )
    return parse_sweep_configs(text)


def test_criterion_1_reference_table_reproduction():
    configs = load_reference_configs()
    start = time.perf_counter()
    result = sweep(configs)
    frontier = pareto_frontier(result.rows)
    sweep_csv = sweep_to_csv(result)
    frontier_to_csv(frontier)
    elapsed = time.perf_counter() - start

    rows = result.rows
    assert [r.pod_size for r in rows] == [2, 3, 5, 4, 13, 25, 8, 57]
    assert [r.mhd_count for r in rows] == [2, 3, 10, 4, 13, 50, 8, 57]
    assert [r.cost_per_host for r in rows] == [
        300, 300, 600, 670, 670, 1340, 1600, 1600,
    ]
    assert len(sweep_csv.splitlines()) == 9
    assert elapsed < 1.0, f"sweep took {elapsed:.3f}s"
    _record(
        "criterion 1: reference table reproduced exactly "
        f"({elapsed * 1000:.1f} ms)"
    )


def test_criterion_2_headline_claims():
    rows = sweep(load_reference_configs()).rows
    by_id = {r.config_id: r for r in rows}

    # the 25-host design against the 8-host symmetric pod at X=8
    big = compare_rows(by_id["6"], by_id["7"])
    assert big.host_ratio == pytest.approx(3.125)
    assert big.cost_change == pytest.approx(-0.1625)
    assert abs(big.host_ratio - 3.0) <= 0.15
    assert abs(-100 * big.cost_change - 17.0) <= 1.0

    # the 13-host design against an 8-host symmetric pod built from
    # Large MHDs with the same four host ports
    from cxlpod import SweepConfig

    extra = sweep([SweepConfig(TopologyKind.SYMMETRIC, host_ports=4, mhd_ports=8,
                               sku="Large")]).rows[0]
    assert extra.pod_size == 8 and extra.cost_per_host == 800.0
    mid = compare_rows(by_id["5"], extra)
    assert mid.host_ratio == pytest.approx(13 / 8)
    assert 100 * (mid.host_ratio - 1) == pytest.approx(62.5)
    assert abs(100 * (mid.host_ratio - 1) - 63.0) <= 1.0
    assert mid.cost_change == pytest.approx(-0.1625)
    assert abs(-100 * mid.cost_change - 16.0) <= 1.0
    _record(
        "criterion 2: headline comparisons hold (3.125x hosts at 16.25% lower "
        "cost; 62.5% more hosts at 16.25% lower cost)"
    )


def test_criterion_3_cost_table_cross_check():
    model = YieldModel()  # frozen calibrated defect density
    names = ("XSmall", "Small", "Large", "XLarge")
    skus = [sku_by_name(n) for n in names]

    # analytic good dies within +/-10% of the canonical counts
    for sku in skus:
        analytic = good_dies_for_sku(model, sku)
        error = analytic / sku.good_dies - 1
        assert abs(error) <= 0.10, (sku.name, analytic, sku.good_dies, error)

    # relative costs from canonical die counts round to the published percents
    large = sku_by_name("Large")
    percents = [round(100 * relative_cost(sku, large)) for sku in skus]
    assert percents == [19, 42, 100, 307]

    # unit-cost estimates from canonical die counts within +/-5% of table prices
    anchor = sku_by_name("XLarge")
    for sku in skus:
        estimate = estimate_unit_cost(sku, anchor, anchor.unit_cost_usd)
        assert abs(estimate / sku.unit_cost_usd - 1) <= 0.05, (sku.name, estimate)
    _record(
        "criterion 3: analytic dies within 10%, cost ratios round to "
        "19/42/100/307%, estimated prices within 5%"
    )


def _assert_design_invariants(topology):
    params = topology.params
    report = validate(topology)
    assert report.passed, report.lines()
    host_degrees = sum(len(topology.mhds_by_host[h]) for h in topology.hosts)
    mhd_degrees = sum(len(topology.hosts_by_mhd[m]) for m in topology.mhds)
    assert host_degrees == mhd_degrees == params.v * params.r == params.b * params.k


def test_criterion_4_design_property_suite():
    constructed = []
    for x, n in ((2, 2), (3, 3), (4, 4), (4, 2)):
        topology = construct(derive_regular_params(x, n))
        _assert_design_invariants(topology)
        constructed.append((x, n))

    eight_note = ""
    try:
        topology = construct(derive_regular_params(8, 8))
    except SearchExhausted as exc:
        # documented outcome: the lexicographic search does not reach the
        # 57-host design within the default node budget
        eight_note = (
            f"; (8,8) documented SearchExhausted at {exc.nodes_expanded} nodes"
        )
    else:
        _assert_design_invariants(topology)
        constructed.append((8, 8))

    # every random edge mutation is caught
    base = construct(derive_regular_params(4, 4))
    rng = random.Random(1234)
    edges = sorted(base.edges)
    caught = 0
    for _ in range(100):
        host, mhd = edges[rng.randrange(len(edges))]
        attached = set(base.hosts_by_mhd[mhd])
        stranger = rng.choice([h for h in base.hosts if h not in attached])
        import dataclasses

        mutated_edges = set(base.edges)
        mutated_edges.remove((host, mhd))
        mutated_edges.add((stranger, mhd))
        mutant = dataclasses.replace(base, edges=frozenset(mutated_edges))
        if not validate(mutant).passed:
            caught += 1
    assert caught == 100
    _record(
        f"criterion 4: designs {constructed} construct and validate; "
        f"100/100 mutants caught{eight_note}"
    )


class OracleSimulator:
    """Independent brute-force pool model: availability is recomputed from
    the full allocation list at every step instead of being tracked."""

    def __init__(self, topology, capacity):
        self.topology = topology
        self.totals = {m: Fraction(capacity) for m in topology.mhds}
        self.allocations = {}
        self.counter = 0

    def available(self, mhd):
        used = sum(
            (shares.get(mhd, Fraction(0)) for shares in self.allocations.values()),
            Fraction(0),
        )
        return self.totals[mhd] - used

    def pod_free(self):
        return sum(self.available(m) for m in self.totals)

    def reachable(self, host):
        return sum(self.available(m) for m in self.topology.mhds_by_host[host])

    def alloc(self, host, gb, policy):
        gb = Fraction(gb)
        mhds = self.topology.mhds_by_host[host]
        total = self.reachable(host)
        stranded = self.pod_free() >= gb > total
        if total < gb:
            return None, stranded
        if policy == "proportional":
            shares = {
                m: gb * self.available(m) / total
                for m in mhds
                if self.available(m) > 0
            }
        else:  # highest capacity first, index tie-break
            shares = {}
            remaining = gb
            for m in sorted(mhds, key=lambda m: (-self.available(m), int(m[1:]))):
                take = min(remaining, self.available(m))
                if take > 0:
                    shares[m] = take
                    remaining -= take
                if remaining == 0:
                    break
        self.counter += 1
        name = f"a{self.counter}"
        self.allocations[name] = shares
        return name, False

    def free(self, name):
        del self.allocations[name]


def test_criterion_5_allocation_oracle(triangle):
    # the worked narrative, exact values
    state = PoolState.for_topology(triangle, 100)
    allocate_proportional(state, triangle, "H1", 100)
    plan_150 = None
    probe = PoolState.for_topology(triangle, 100)
    allocate_proportional(probe, triangle, "H1", 100)
    plan_150 = allocate_proportional(probe, triangle, "H3", 150).plan
    assert plan_150.shares == {"P2": Fraction(50), "P3": Fraction(100)}
    plan_100 = allocate_proportional(state, triangle, "H3", 100).plan
    assert plan_100.shares == {"P2": Fraction(100, 3), "P3": Fraction(200, 3)}

    # exhaustive check over all orders of a fixed allocation set
    requests = [("H1", 120), ("H2", 90), ("H3", 80), ("H1", 60)]
    for order in itertools.permutations(range(4)):
        state = PoolState.for_topology(triangle, 100)
        oracle = OracleSimulator(triangle, 100)
        for i in order:
            host, gb = requests[i]
            before = dict(state.available)
            try:
                allocate_proportional(state, triangle, host, gb)
                module_ok = True
            except InsufficientCapacity:
                module_ok = False
                assert state.available == before  # atomic failure
            name, _ = oracle.alloc(host, gb, "proportional")
            assert module_ok == (name is not None)
            state.assert_consistent()
            for m in triangle.mhds:
                assert state.available[m] == oracle.available(m)

    # randomized traces against the oracle
    rng = random.Random(99)
    traces = 0
    stranding_seen = 0
    while traces < 1000:
        traces += 1
        state = PoolState.for_topology(triangle, 100)
        oracle = OracleSimulator(triangle, 100)
        live_module = []
        live_oracle = []
        for _ in range(rng.randint(4, 14)):
            if live_module and rng.random() < 0.3:
                pick = rng.randrange(len(live_module))
                free(state, live_module.pop(pick))
                oracle.free(live_oracle.pop(pick))
            else:
                host = rng.choice(triangle.hosts)
                gb = rng.randint(1, 160)
                policy = rng.choice(["proportional", "highest-capacity"])
                impl = (
                    allocate_proportional
                    if policy == "proportional"
                    else allocate_highest_capacity
                )
                pod_free_before = state.pod_free()
                reachable_before = sum(
                    state.available[m] for m in triangle.mhds_by_host[host]
                )
                before = dict(state.available)
                try:
                    allocation = impl(state, triangle, host, gb)
                except InsufficientCapacity as exc:
                    assert state.available == before  # atomic failure
                    assert exc.available == reachable_before
                    stranded = pod_free_before >= gb > reachable_before
                    name, oracle_stranded = oracle.alloc(host, gb, policy)
                    assert name is None
                    assert oracle_stranded == stranded
                    if stranded:
                        stranding_seen += 1
                else:
                    live_module.append(allocation.allocation_id)
                    name, _ = oracle.alloc(host, gb, policy)
                    assert name is not None
                    assert allocation.plan.shares == oracle.allocations[name]
                    live_oracle.append(name)
            state.assert_consistent()
            for m in triangle.mhds:
                assert state.available[m] == oracle.available(m)
    assert stranding_seen > 0, "random traces never exercised stranding"
    _record(
        "criterion 5: worked allocations exact; oracle agreement over all "
        f"orders and 1000 random traces ({stranding_seen} stranding events)"
    )


def test_criterion_5_stranding_in_replay(triangle):
    events = [
        TraceEvent.alloc("H1", 200),
        TraceEvent.alloc("H2", 100),
        TraceEvent.free("a1"),
        TraceEvent.alloc("H3", 150),
    ]
    report = replay_trace(triangle, 100, events)
    assert report.stranding_events == 1
    assert report.insufficient_capacity_events == 1


def test_criterion_6_interleave_balance():
    rng = np.random.default_rng(2024)
    vectors = 10_000
    width = 8
    pages = 10_000

    counts = rng.integers(1, width + 1, size=vectors)
    weights = rng.integers(1, 1001, size=(vectors, width))
    weights[np.arange(width)[None, :] >= counts[:, None]] = 0
    q = weights.sum(axis=1)

    assigned = np.zeros((vectors, width), dtype=np.int64)
    rows = np.arange(vectors)
    worst = -np.inf
    for t in range(pages):
        n = t + 1
        eligible = q[:, None] * assigned < n * weights
        # award priority w_i/(a_i+1); ineligible lanes sink below any real one
        priority = np.where(eligible, weights / (assigned + 1.0), -1.0)
        choice = priority.argmax(axis=1)
        assert (priority[rows, choice] > 0).all()
        assigned[rows, choice] += 1
        deviation = np.abs(q[:, None] * assigned - n * weights) - q[:, None]
        worst = max(worst, deviation.max())
    assert worst < 0, "some prefix strayed a full page from its weight"

    # the production planner walks the same sequence
    check = np.random.default_rng(7)
    for _ in range(40):
        m = int(check.integers(1, width + 1))
        shares = {f"P{i + 1}": int(check.integers(1, 1001)) for i in range(m)}
        plan = AllocationPlan(
            Fraction(sum(shares.values())),
            {k: Fraction(v) for k, v in shares.items()},
        )
        sequence = interleave_plan(plan, "1GiB").first_pages(400)
        p = np.array([shares[f"P{i + 1}"] for i in range(m)], dtype=np.int64)
        qq = p.sum()
        a = np.zeros(m, dtype=np.int64)
        for step, got in enumerate(sequence, start=1):
            eligible = qq * a < step * p
            priority = np.where(eligible, p / (a + 1.0), -1.0)
            expect = int(priority.argmax())
            assert got == f"P{expect + 1}"
            a[expect] += 1
    _record(
        "criterion 6: 10,000 share vectors stay within one page of weight "
        "over every prefix up to 10,000 pages"
    )


def test_criterion_7_pareto_soundness():
    rows = sweep(load_reference_configs()).rows
    frontier = pareto_frontier(rows)
    assert [(r.pod_size, r.cost_per_host) for r in frontier.rows] == [
        (3, 300.0), (5, 600.0), (13, 670.0), (25, 1340.0), (57, 1600.0),
    ]

    def oracle(rows):
        kept = []
        for i, row in enumerate(rows):
            dominated = any(
                dominates(other, row) for j, other in enumerate(rows) if j != i
            )
            duplicated = any(
                other.pod_size == row.pod_size
                and other.cost_per_host == row.cost_per_host
                for other in rows[:i]
            )
            if not dominated and not duplicated:
                kept.append(row)
        return sorted(kept, key=lambda r: (r.pod_size, r.cost_per_host))

    rng = random.Random(31)
    for _ in range(100):
        sample = [
            SweepRow(
                config_id=str(i),
                kind=TopologyKind.REGULAR,
                mhd_ports=4,
                host_ports=4,
                sku="Small",
                pod_size=rng.randint(1, 80),
                mhd_count=1,
                cost_per_host=float(10 * rng.randint(1, 50)),
            )
            for i in range(rng.randint(0, 60))
        ]
        assert list(pareto_frontier(sample).rows) == oracle(sample)
    _record(
        "criterion 7: frontier matches the 5-point reference set and the "
        "quadratic dominance oracle on 100 random row sets"
    )

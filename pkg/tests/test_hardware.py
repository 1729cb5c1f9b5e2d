import math
from fractions import Fraction

import pytest

from cxlpod import (
    BUILTIN_SKUS,
    MhdSku,
    YieldModel,
    construct_symmetric,
    estimate_unit_cost,
    good_dies_for_sku,
    good_dies_per_wafer,
    gross_dies_per_wafer,
    murphy_yield,
    pod_cost_per_host,
    relative_cost,
    sku_by_name,
)
from cxlpod.errors import ZeroGoodDies
from cxlpod.hardware import DEFAULT_DEFECT_DENSITY

MODEL = YieldModel()


def formula_gross(area, diameter=300.0):
    """Direct evaluation of the wafer-geometry formula, used as oracle."""
    return max(
        0,
        math.floor(
            math.pi * (diameter / 2) ** 2 / area
            - math.pi * diameter / math.sqrt(2 * area)
        ),
    )


class TestGrossDies:
    def test_wafer_sized_die_yields_nothing(self):
        area = math.pi * 150.0**2
        assert gross_dies_per_wafer(MODEL, area) == 0

    @pytest.mark.parametrize("area, expected", [(69.0, 944), (14.0, 4870)])
    def test_against_formula_oracle(self, area, expected):
        assert formula_gross(area) == expected
        assert gross_dies_per_wafer(MODEL, area) == expected

    def test_strictly_decreasing_in_area(self):
        counts = [gross_dies_per_wafer(MODEL, a) for a in (14, 30, 69, 181)]
        assert counts == sorted(counts, reverse=True)
        assert len(set(counts)) == len(counts)


class TestMurphyYield:
    def test_vanishing_defect_density_gives_full_yield(self):
        model = YieldModel(defect_density=1e-15)
        assert murphy_yield(model, 100.0) == 1.0

    def test_unit_exposure(self):
        # A*D = 1: ((1 - 1/e) / 1)^2
        model = YieldModel(defect_density=0.01)
        expected = (1 - math.exp(-1.0)) ** 2
        assert murphy_yield(model, 100.0) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(0.39958, abs=5e-5)

    def test_strictly_decreasing_in_area(self):
        previous = 1.0
        for area in (1, 5, 20, 80, 200, 500):
            current = murphy_yield(MODEL, area)
            assert current < previous
            previous = current

    def test_bounded(self):
        for area in (0.001, 1, 100, 10000):
            assert 0 < murphy_yield(MODEL, area) <= 1


class TestGoodDies:
    # frozen outputs of the calibrated pipeline (defect density fitted
    # minimax to the canonical good-die counts)
    FROZEN = {"XSmall": 4635, "Small": 2025, "Large": 774, "XLarge": 238}

    @pytest.mark.parametrize("name", ["XSmall", "Small", "Large", "XLarge"])
    def test_frozen_pipeline_values(self, name):
        sku = sku_by_name(name)
        assert good_dies_for_sku(MODEL, sku) == self.FROZEN[name]

    @pytest.mark.parametrize("name", ["XSmall", "Small", "Large", "XLarge"])
    def test_within_ten_percent_of_canonical(self, name):
        sku = sku_by_name(name)
        analytic = good_dies_for_sku(MODEL, sku)
        assert abs(analytic / sku.good_dies - 1) <= 0.10

    def test_unused_area_does_not_change_gross(self):
        with_unused = good_dies_per_wafer(MODEL, 69.0, 12.0)
        without = good_dies_per_wafer(MODEL, 69.0, 0.0)
        assert with_unused > without  # defects only land on active area


class TestRelativeCost:
    def test_canonical_ratios_round_to_printed_percentages(self):
        large = sku_by_name("Large")
        percents = [
            round(100 * relative_cost(sku_by_name(n), large))
            for n in ("XSmall", "Small", "Large", "XLarge")
        ]
        assert percents == [19, 42, 100, 307]

    def test_identity(self):
        large = sku_by_name("Large")
        assert relative_cost(large, large) == 1.0

    def test_transitivity_exact_with_canonical_counts(self):
        xs, sm, lg = (sku_by_name(n) for n in ("XSmall", "Small", "Large"))
        lhs = Fraction(sm.good_dies, xs.good_dies) * Fraction(lg.good_dies, sm.good_dies)
        assert lhs == Fraction(lg.good_dies, xs.good_dies)

    def test_zero_good_dies(self):
        huge = MhdSku("Huge", 16, 12, 80000.0, 0.0, 0, 500.0, 1.0)
        with pytest.raises(ZeroGoodDies):
            relative_cost(huge, sku_by_name("Large"), MODEL)


class TestEstimateUnitCost:
    def test_small_estimate_tracks_canonical_price(self):
        anchor = sku_by_name("XLarge")
        small = sku_by_name("Small")
        estimate = estimate_unit_cost(small, anchor, 5000.0)
        assert estimate == pytest.approx(5000 * 260 / 1912)
        assert abs(estimate / small.unit_cost_usd - 1) < 0.02

    def test_large_estimate_tracks_canonical_price(self):
        anchor = sku_by_name("XLarge")
        large = sku_by_name("Large")
        estimate = estimate_unit_cost(large, anchor, 5000.0)
        assert estimate == pytest.approx(5000 * 260 / 799)
        assert abs(estimate / large.unit_cost_usd - 1) < 0.02

    def test_anchor_priced_at_anchor_cost(self):
        anchor = sku_by_name("XLarge")
        assert estimate_unit_cost(anchor, anchor, 5000.0) == 5000.0

    def test_analytic_monotone_in_die_area(self):
        anchor = sku_by_name("XLarge")
        costs = [
            estimate_unit_cost(sku_by_name(n), anchor, 5000.0, MODEL)
            for n in ("XSmall", "Small", "Large", "XLarge")
        ]
        assert costs == sorted(costs)


class TestPodCost:
    def test_regular_13_13(self, design_13):
        assert pod_cost_per_host(design_13, sku_by_name("Small")) == 670.0

    def test_triangle(self, triangle):
        assert pod_cost_per_host(triangle, sku_by_name("XSmall")) == 300.0

    def test_symmetric_8x4_large(self, symmetric_8x4):
        assert pod_cost_per_host(symmetric_8x4, sku_by_name("Large")) == 800.0

    def test_doubled_mhds(self, design_13):
        import dataclasses

        doubled = dataclasses.replace(design_13, multiplicity=2)
        assert pod_cost_per_host(doubled, sku_by_name("Small")) == 1340.0

    def test_symmetric_equals_regular_at_same_ports(self, design_13):
        # M/H = X/N on both, so $/host coincides
        sym = construct_symmetric(4, 4)
        small = sku_by_name("Small")
        assert pod_cost_per_host(sym, small) == pod_cost_per_host(design_13, small)


class TestBuiltinTable:
    def test_canonical_values(self):
        rows = {
            s.name: (
                s.cxl_ports, s.ddr5_channels, s.die_area_mm2, s.unused_area_mm2,
                s.latency_ns, s.unit_cost_usd, s.good_dies,
            )
            for s in BUILTIN_SKUS
        }
        assert rows == {
            "XSmall": (2, 2, 14.0, 0.0, 230.0, 300.0, 4263),
            "Small": (4, 4, 30.0, 2.0, 250.0, 670.0, 1912),
            "Large": (8, 8, 69.0, 12.0, 350.0, 1600.0, 799),
            "XLarge": (16, 12, 181.0, 77.0, 400.0, 5000.0, 260),
        }

    def test_xlarge_latency_is_open_lower_bound(self):
        assert sku_by_name("XLarge").latency_is_floor
        assert not sku_by_name("Large").latency_is_floor

    def test_capacity_scales_with_channels(self):
        for sku in BUILTIN_SKUS:
            assert sku.capacity_gb == sku.ddr5_channels * 256

    def test_default_defect_density_is_frozen(self):
        assert DEFAULT_DEFECT_DENSITY == 0.003532

    def test_invalid_sku_rejected(self):
        with pytest.raises(ValueError):
            MhdSku("bad", 2, 2, 10.0, 11.0, 512, 230.0, 300.0)
        with pytest.raises(KeyError):
            sku_by_name("Mythical")

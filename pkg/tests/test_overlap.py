import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import overlapselect as ov
from overlapselect.dataset import DatasetError

import oracles
from conftest import random_integer_dataset


def unit_distribution(densities, start=0.0):
    """Distribution on unit-width bins starting at `start`."""
    densities = np.asarray(densities, dtype=float)
    edges = start + np.arange(len(densities) + 1.0)
    return ov.DifferenceDistribution(edges, densities, 100)


class TestDifferences:
    def test_wisconsin_intra_count_benign(self, wisconsin_split0):
        train, _ = wisconsin_split0
        diffs = ov.intra_differences(train, 0, 0)
        assert len(diffs) == sum(229 - i for i in range(1, 229))
        assert len(diffs) == 26106

    def test_wisconsin_inter_count(self, wisconsin_split0):
        train, _ = wisconsin_split0
        assert len(ov.inter_differences(train, 0, 0)) == 229 * 120

    def test_identical_values_give_zeros(self):
        ds = ov.Dataset.from_arrays([[5], [5], [5], [0], [1]],
                                    ["a", "a", "a", "b", "b"])
        assert ov.intra_differences(ds, 0, 0).tolist() == [0.0, 0.0, 0.0]

    def test_hand_enumerated_intra_multiset(self):
        ds = ov.Dataset.from_arrays([[1], [4], [6], [0], [0]],
                                    ["a", "a", "a", "b", "b"])
        assert sorted(ov.intra_differences(ds, 0, 0)) == [2.0, 3.0, 5.0]

    def test_hand_enumerated_inter(self):
        ds = ov.Dataset.from_arrays([[1], [3], [2]], ["a", "a", "b"])
        assert sorted(ov.inter_differences(ds, 0, 0)) == [1.0, 1.0]

    def test_inter_zero_differences(self):
        ds = ov.Dataset.from_arrays([[2], [2], [2]], ["a", "b", "b"])
        assert ov.inter_differences(ds, 0, 0).tolist() == [0.0, 0.0]

    def test_intra_needs_two_instances(self):
        ds = ov.Dataset.from_arrays([[1], [2], [3]], ["a", "b", "b"])
        with pytest.raises(DatasetError):
            ov.intra_differences(ds, 0, 0)

    def test_inter_needs_other_classes(self):
        ds = ov.Dataset.from_arrays([[1], [2]], ["a", "a"])
        with pytest.raises(DatasetError):
            ov.inter_differences(ds, 0, 0)


class TestBuildHistogram:
    def test_single_bin_mass(self):
        dist = ov.build_histogram([0.2, 0.3, 0.1], np.array([0.0, 0.5, 1.0]))
        assert dist.densities[0] == pytest.approx(1 / 0.5)
        assert dist.densities[1] == 0.0

    def test_two_unit_bins_hand_normalized(self):
        dist = ov.build_histogram([0, 0, 1, 1], np.array([-0.5, 0.5, 1.5]))
        assert dist.densities.tolist() == [0.5, 0.5]

    def test_sample_count_recorded(self):
        dist = ov.build_histogram([0, 1, 2], np.array([-0.5, 2.5]))
        assert dist.sample_count == 3

    def test_last_bin_closed_on_right(self):
        dist = ov.build_histogram([1.0], np.array([0.0, 0.5, 1.0]))
        assert dist.densities.tolist() == [0.0, 2.0]

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError):
            ov.build_histogram([], np.array([0.0, 1.0]))

    def test_value_outside_edges_rejected(self):
        with pytest.raises(ValueError, match="outside"):
            ov.build_histogram([2.0], np.array([0.0, 1.0]))

    @given(st.lists(st.integers(0, 9), min_size=1, max_size=60))
    def test_area_is_one(self, values):
        dist = ov.build_histogram(values, np.arange(11.0) - 0.5)
        area = float(np.sum(dist.densities * np.diff(dist.bin_edges)))
        assert abs(area - 1.0) <= 1e-9


class TestBuildSmoothed:
    def test_area_is_one(self):
        edges = ov.shared_edges([0, 1, 1, 3], [2, 2, 4], ov.BinSpec())
        dist = ov.build_smoothed([0, 1, 1, 3], edges)
        area = float(np.sum(dist.densities * np.diff(dist.bin_edges)))
        assert abs(area - 1.0) <= 1e-9
        assert dist.sample_count == 4

    def test_default_bandwidth_is_silverman(self):
        # hand value for {1, 3}: sd = sqrt(2), n = 2
        expected = math.sqrt(2.0) * (4.0 / 6.0) ** 0.2
        assert ov.silverman_bandwidth(np.array([1.0, 3.0])) == pytest.approx(expected)

    def test_degenerate_set_falls_back_to_unit_sigma(self):
        assert ov.silverman_bandwidth(np.array([2.0, 2.0])) == pytest.approx(
            (4.0 / 6.0) ** 0.2)

    def test_matches_loop_oracle(self):
        diffs = [0.0, 1.0, 1.0, 2.0, 5.0]
        edges = ov.shared_edges(diffs, diffs, ov.BinSpec(grid_size=40))
        dist = ov.build_smoothed(diffs, edges)
        expected = oracles.smooth_density(diffs, list(edges))
        assert np.allclose(dist.densities, expected, atol=1e-12)


class TestOverlapArea:
    def test_identical_distributions_near_one(self):
        dist = unit_distribution([0.3, 0.5, 0.2])
        correction = (0.3 + 0.2) / 4.0  # endpoint trapezoids on unit bins
        assert ov.overlap_area(dist, dist) == pytest.approx(1.0 - correction)

    def test_disjoint_supports_zero(self):
        p = unit_distribution([1.0, 0.0, 0.0, 0.0])
        q = unit_distribution([0.0, 0.0, 0.0, 1.0])
        assert ov.overlap_area(p, q) == 0.0

    def test_two_bin_hand_value(self):
        # rectangle min-sum gives 0.5; trapezoid with zero pads gives 0.375:
        # 0.5 * (0.5*0.25 + 1.0*0.5 + 0.5*0.25)
        p = unit_distribution([0.75, 0.25])
        q = unit_distribution([0.25, 0.75])
        assert ov.overlap_area(p, q) == pytest.approx(0.375)

    def test_symmetry(self):
        p = unit_distribution([0.6, 0.1, 0.3])
        q = unit_distribution([0.2, 0.5, 0.3])
        assert ov.overlap_area(p, q) == ov.overlap_area(q, p)

    def test_mismatched_edges_rejected(self):
        p = unit_distribution([1.0])
        q = unit_distribution([1.0], start=1.0)
        with pytest.raises(ValueError, match="edges"):
            ov.overlap_area(p, q)

    @given(st.lists(st.integers(0, 6), min_size=1, max_size=40),
           st.lists(st.integers(0, 6), min_size=1, max_size=40))
    def test_bounded_and_symmetric(self, a, b):
        edges = np.arange(8.0) - 0.5
        p = ov.build_histogram(a, edges)
        q = ov.build_histogram(b, edges)
        area = ov.overlap_area(p, q)
        assert 0.0 <= area <= 1.0
        assert area == ov.overlap_area(q, p)

    @given(st.lists(st.integers(0, 6), min_size=2, max_size=40),
           st.lists(st.integers(0, 6), min_size=2, max_size=40))
    def test_unit_bins_match_min_sum_with_endpoint_correction(self, a, b):
        """Trapezoid area equals the rectangle min-sum minus the two endpoint
        trapezoids: (y_first + y_last) * width / 4 on uniform bins."""
        edges = np.arange(8.0) - 0.5
        p = ov.build_histogram(a, edges)
        q = ov.build_histogram(b, edges)
        y = np.minimum(p.densities, q.densities)
        rect = oracles.rectangle_min_sum(p.densities, q.densities, 1.0)
        assert ov.overlap_area(p, q) == pytest.approx(
            rect - (y[0] + y[-1]) / 4.0, abs=1e-12)


class TestSharedEdges:
    def test_integer_mode_unit_bins(self):
        edges = ov.shared_edges([0, 2], [1, 4], ov.BinSpec(mode="integer"))
        assert edges.tolist() == [-0.5, 0.5, 1.5, 2.5, 3.5, 4.5]

    def test_integer_mode_rejects_fractional(self):
        with pytest.raises(ValueError, match="integral"):
            ov.shared_edges([0.5], [1.0], ov.BinSpec(mode="integer"))

    def test_uniform_mode_count_default_clamped(self):
        edges = ov.shared_edges([0.1] * 4, [0.2] * 9, ov.BinSpec(mode="uniform"))
        assert len(edges) == 11  # ceil(sqrt(4)) = 2 clamps up to 10 bins

    def test_uniform_mode_explicit_count(self):
        edges = ov.shared_edges([0.0, 2.0], [1.0], ov.BinSpec(mode="uniform", bin_count=4))
        assert edges.tolist() == [0.0, 0.5, 1.0, 1.5, 2.0]

    def test_uniform_degenerate_all_zero(self):
        edges = ov.shared_edges([0.0, 0.0], [0.0], ov.BinSpec(mode="uniform"))
        assert edges.tolist() == [-0.5, 0.5]

    def test_auto_picks_integer_for_integral_values(self):
        spec = ov.BinSpec(mode="auto")
        edges = ov.shared_edges([0, 1], [2], spec)
        assert edges.tolist() == [-0.5, 0.5, 1.5, 2.5]
        edges = ov.shared_edges([0.25, 1.0], [2.0], spec)
        assert edges[0] == 0.0  # fell through to uniform

    def test_smooth_extends_by_three_bandwidths(self):
        spec = ov.BinSpec(grid_size=10)
        dia, die = np.array([0.0, 4.0]), np.array([1.0, 2.0])
        h = max(ov.silverman_bandwidth(dia), ov.silverman_bandwidth(die))
        edges = ov.shared_edges(dia, die, spec)
        assert edges[0] == pytest.approx(-3 * h)
        assert edges[-1] == pytest.approx(4 + 3 * h)
        assert len(edges) == 11


class TestOverlapTable:
    def test_wisconsin_cell_size_attains_zero_min_overlap(self, wisconsin_split0):
        train, _ = wisconsin_split0
        table = ov.overlap_table(train)
        cell_size = train.attribute_names.index("cell_size_uniformity")
        assert table.min_overlap[cell_size] == 0.0
        assert table.overlap[:, 0].argmin() == cell_size

    def test_single_attribute_relative_is_zero(self):
        ds = ov.Dataset.from_arrays([[1], [2], [8], [9]], ["a", "a", "b", "b"])
        table = ov.overlap_table(ds)
        assert np.all(table.relative == 0.0)
        assert table.min_overlap.tolist() == [0.0]

    @pytest.mark.parametrize("mode", ["smooth", "integer"])
    def test_toy_table_matches_brute_force(self, toy3, mode):
        table = ov.overlap_table(toy3, ov.BinSpec(mode=mode, grid_size=50))
        expected, _, expected_min = oracles.brute_overlap_table(
            toy3.values.tolist(), toy3.labels.tolist(), mode, grid_size=50)
        assert np.allclose(table.overlap, expected, atol=1e-9)
        assert np.allclose(table.min_overlap, expected_min, atol=1e-9)

    def test_needs_two_classes(self):
        ds = ov.Dataset.from_arrays([[1], [2]], ["a", "a"])
        with pytest.raises(DatasetError):
            ov.overlap_table(ds)

    def test_invariants_on_random_datasets(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            ds = random_integer_dataset(rng)
            table = ov.overlap_table(ds, ov.BinSpec(grid_size=50))
            assert np.all(table.overlap >= 0.0) and np.all(table.overlap <= 1.0)
            assert np.allclose(table.relative.min(axis=0), 0.0)
            assert np.all(table.min_overlap[:, None] <= table.relative + 1e-15)

    @pytest.mark.parametrize("mode", ["smooth", "integer", "uniform"])
    def test_permutation_invariance_exact(self, toy3, mode):
        spec = ov.BinSpec(mode=mode, grid_size=50)
        table = ov.overlap_table(toy3, spec)
        rng = np.random.default_rng(3)
        perm = rng.permutation(toy3.n_instances)
        shuffled = ov.Dataset.from_arrays(toy3.values[perm],
                                          [toy3.class_names[c] for c in toy3.labels[perm]],
                                          class_names=toy3.class_names)
        other = ov.overlap_table(shuffled, spec)
        assert np.array_equal(table.overlap, other.overlap)
        assert np.array_equal(table.min_overlap, other.min_overlap)

    def test_pair_cap_is_deterministic(self, toy3):
        a = ov.overlap_table(toy3, max_pairs=3, pair_seed=11)
        b = ov.overlap_table(toy3, max_pairs=3, pair_seed=11)
        assert np.array_equal(a.overlap, b.overlap)

    def test_attribute_chunking_does_not_change_results(self, toy3):
        a = ov.overlap_table(toy3, attribute_chunk=1)
        b = ov.overlap_table(toy3, attribute_chunk=64)
        assert np.array_equal(a.overlap, b.overlap)


class TestOverlapTableSerialization:
    def make_table(self):
        return ov.OverlapTable.from_overlap(
            np.array([[0.5, 0.75], [0.25, 0.5]]), ("alpha", "beta"), ("c0", "c1"))

    def test_csv_layout(self):
        buf = io.StringIO()
        self.make_table().to_csv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "attribute,A_o_c0,A_o_c1,A_r_c0,A_r_c1,A_min"
        assert lines[1] == "alpha,0.5,0.75,0.25,0.25,0.25"
        assert lines[2] == "beta,0.25,0.5,0.0,0.0,0.0"

    def test_dict_round_trip(self):
        table = self.make_table()
        clone = ov.OverlapTable.from_dict(table.to_dict())
        assert np.array_equal(clone.overlap, table.overlap)
        assert clone.attribute_names == table.attribute_names

    def test_invalid_relative_rejected(self):
        with pytest.raises(ValueError):
            ov.OverlapTable(np.array([[0.5]]), np.array([[0.2]]),
                            np.array([0.2]), ("a",), ("c",))

"""Recursive binary segmentation."""

import numpy as np
import pytest

from edscan import default_min_segment, segment_series


def three_segment_series(rng, sizes=(50, 50, 50), means=(0.0, 5.0, 0.0)):
    parts = [rng.normal(mean, 1.0, size) for mean, size in zip(means, sizes)]
    return np.concatenate(parts)


class TestDefaultMinSegment:
    def test_reference_lengths(self):
        assert default_min_segment(100) == 20
        assert default_min_segment(10) == 4
        assert default_min_segment(200) == 40

    def test_floor_at_four(self):
        assert default_min_segment(4) == 4
        assert default_min_segment(15) == 4

    def test_near_integer_product(self):
        # 2 * 0.1 * 30 = 6.000000000000001 must stay at 6
        assert default_min_segment(30) == 6

    def test_scales_with_trim(self):
        assert default_min_segment(100, trim=0.2) == 40


class TestSegmentSeries:
    def test_recovers_two_changes(self):
        rng = np.random.default_rng(40)
        report = segment_series(three_segment_series(rng),
                                n_permutations=199, random_state=1)
        assert len(report.change_points) == 2
        assert abs(report.change_points[0] - 50) <= 3
        assert abs(report.change_points[1] - 100) <= 3
        assert report.depth >= 1

    def test_change_points_sorted_and_interior(self):
        rng = np.random.default_rng(41)
        report = segment_series(three_segment_series(rng, means=(0, 4, 8)),
                                n_permutations=199, random_state=2)
        points = report.change_points
        assert np.all(np.diff(points) >= 2)
        assert np.all((points >= 2) & (points <= report.n_samples - 2))

    def test_bonferroni_level_divides_alpha_by_budget(self):
        rng = np.random.default_rng(42)
        x = three_segment_series(rng)
        report = segment_series(x, n_permutations=199, correction="bonferroni",
                                max_tests=100, random_state=3)
        assert report.tested_level == pytest.approx(0.0005)
        # clear changes exceed even the tightened critical value
        assert len(report.change_points) == 2

    def test_bonferroni_default_budget_is_segment_count(self):
        rng = np.random.default_rng(52)
        x = three_segment_series(rng)
        report = segment_series(x, n_permutations=199, correction="bonferroni",
                                random_state=3)
        # n = 150 with min segment 30 budgets 5 tests
        assert report.tested_level == pytest.approx(0.01)

    def test_bonferroni_detects_subset_of_uncorrected(self):
        rng = np.random.default_rng(43)
        x = three_segment_series(rng, means=(0.0, 1.2, 0.0))
        plain = segment_series(x, n_permutations=199, random_state=4)
        corrected = segment_series(x, n_permutations=199, random_state=4,
                                   correction="bonferroni")
        assert set(corrected.change_points) <= set(plain.change_points)

    def test_max_tests_requires_bonferroni(self):
        with pytest.raises(ValueError):
            segment_series(np.arange(20.0), max_tests=5)

    def test_constant_series_becomes_annotated_leaf(self):
        report = segment_series(np.full(30, 2.0), random_state=5)
        assert report.change_points.size == 0
        notes = [node.note for node in report.nodes if node.note]
        assert any("constant" in note for note in notes)

    def test_short_segments_left_untested(self):
        rng = np.random.default_rng(44)
        report = segment_series(rng.normal(size=40), min_segment=50,
                                n_permutations=49, random_state=6)
        assert report.change_points.size == 0
        assert report.nodes[0].decision is None
        assert "short" in report.nodes[0].note

    def test_min_segment_floor(self):
        with pytest.raises(ValueError):
            segment_series(np.arange(20.0), min_segment=3)

    def test_unknown_correction_rejected(self):
        with pytest.raises(ValueError):
            segment_series(np.arange(20.0), correction="holm")

    def test_nodes_partition_each_level(self):
        rng = np.random.default_rng(45)
        report = segment_series(three_segment_series(rng),
                                n_permutations=199, random_state=7)
        root = report.nodes[0]
        assert (root.start, root.stop) == (0, 150)
        for node in report.nodes:
            assert 0 <= node.start < node.stop <= 150
            if node.decision is not None and node.decision.reject:
                assert node.start < node.split < node.stop
                children = [c for c in report.nodes
                            if c.depth == node.depth + 1
                            and node.start <= c.start < c.stop <= node.stop]
                spans = sorted((c.start, c.stop) for c in children)
                assert spans == [(node.start, node.split),
                                 (node.split, node.stop)]

    def test_same_seed_reproduces_report(self):
        rng = np.random.default_rng(46)
        x = three_segment_series(rng)
        first = segment_series(x, n_permutations=199, random_state=8)
        second = segment_series(x, n_permutations=199, random_state=8)
        assert np.array_equal(first.change_points, second.change_points)
        firsts = [(n.start, n.stop, n.split) for n in first.nodes]
        seconds = [(n.start, n.stop, n.split) for n in second.nodes]
        assert firsts == seconds

    def test_null_series_usually_stays_whole(self):
        rng = np.random.default_rng(47)
        empty = 0
        for seed in range(40):
            report = segment_series(rng.normal(size=60),
                                    n_permutations=99, random_state=seed)
            empty += report.change_points.size == 0
        assert empty >= 32

    def test_block_scheme_with_short_blocks_finds_changes(self):
        # long blocks keep much of the shift pattern inside each replicate
        # and cost power, so pin a short block length here
        rng = np.random.default_rng(48)
        report = segment_series(three_segment_series(rng),
                                n_permutations=99, scheme="circular_block",
                                block_length=3, random_state=9)
        assert abs(report.change_points[0] - 50) <= 3
        assert abs(report.change_points[1] - 100) <= 3

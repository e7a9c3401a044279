"""Scikit-learn interface contracts for the estimator front-ends."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from edscan import EnergyChangeDetector, EnergySegmenter


def shifted_series(seed=0, sizes=(40, 40), means=(0.0, 4.0)):
    rng = np.random.default_rng(seed)
    return np.concatenate([
        rng.normal(mean, 1.0, size) for mean, size in zip(means, sizes)
    ])


class TestEnergyChangeDetector:
    def test_get_params_round_trip(self):
        detector = EnergyChangeDetector(trim=0.2, alpha=0.01, random_state=3)
        params = detector.get_params()
        assert params["trim"] == 0.2
        assert params["alpha"] == 0.01
        rebuilt = EnergyChangeDetector(**params)
        assert rebuilt.get_params() == params

    def test_set_params_returns_self(self):
        detector = EnergyChangeDetector()
        assert detector.set_params(alpha=0.1) is detector
        assert detector.alpha == 0.1

    def test_clone_is_unfitted(self):
        detector = EnergyChangeDetector(random_state=0).fit(shifted_series())
        copy = clone(detector)
        assert copy.get_params() == detector.get_params()
        with pytest.raises(NotFittedError):
            copy.predict()

    def test_predict_before_fit_raises(self):
        with pytest.raises(NotFittedError):
            EnergyChangeDetector().predict()

    def test_fit_stores_decision(self):
        detector = EnergyChangeDetector(n_permutations=199, random_state=1)
        out = detector.fit(shifted_series())
        assert out is detector
        assert detector.decision_.reject
        assert detector.p_value_ == detector.decision_.p_value
        assert detector.n_samples_ == 80
        assert abs(detector.change_point_ - 40) <= 1

    def test_predict_returns_int_array(self):
        detector = EnergyChangeDetector(n_permutations=199,
                                        random_state=1).fit(shifted_series())
        points = detector.predict()
        assert points.dtype == np.int64
        assert points.tolist() == [detector.change_point_]

    def test_predict_empty_without_rejection(self):
        rng = np.random.default_rng(5)
        detector = EnergyChangeDetector(alpha=0.001, n_permutations=999,
                                        random_state=2)
        detector.fit(rng.normal(size=40))
        if not detector.decision_.reject:
            assert detector.predict().size == 0

    def test_two_dimensional_input(self):
        rng = np.random.default_rng(6)
        x = np.vstack([rng.normal(0, 1, (30, 2)), rng.normal(3, 1, (30, 2))])
        detector = EnergyChangeDetector(n_permutations=199,
                                        random_state=3).fit(x)
        assert abs(detector.change_point_ - 30) <= 1


class TestEnergySegmenter:
    def test_fit_predict_finds_changes(self):
        x = shifted_series(seed=7, sizes=(50, 50, 50), means=(0, 5, 0))
        segmenter = EnergySegmenter(n_permutations=199, random_state=4)
        points = segmenter.fit_predict(x)
        assert abs(points[0] - 50) <= 3
        assert abs(points[1] - 100) <= 3

    def test_transform_labels_segments(self):
        x = shifted_series(seed=7, sizes=(50, 50, 50), means=(0, 5, 0))
        segmenter = EnergySegmenter(n_permutations=199, random_state=4).fit(x)
        labels = segmenter.transform()
        assert labels.shape == (150,)
        assert labels[0] == 0
        assert labels[-1] == 2
        assert np.all(np.diff(labels) >= 0)
        boundaries = np.flatnonzero(np.diff(labels)) + 1
        assert boundaries.tolist() == segmenter.change_points_.tolist()

    def test_predict_copies_points(self):
        x = shifted_series(seed=7, sizes=(50, 50, 50), means=(0, 5, 0))
        segmenter = EnergySegmenter(n_permutations=99, random_state=4).fit(x)
        points = segmenter.predict()
        points[:] = -1
        assert np.all(segmenter.change_points_ >= 0)

    def test_report_available(self):
        segmenter = EnergySegmenter(n_permutations=49, random_state=5)
        segmenter.fit(shifted_series())
        assert segmenter.report_.n_samples == 80
        assert segmenter.report_.nodes

    def test_clone_and_not_fitted(self):
        segmenter = EnergySegmenter(min_segment=10)
        assert clone(segmenter).min_segment == 10
        with pytest.raises(NotFittedError):
            segmenter.predict()

"""Estimator front-ends following the scikit-learn conventions.

Both estimators store constructor arguments verbatim, defer all work and
validation to ``fit``, and expose fitted state through trailing-underscore
attributes, so ``get_params`` / ``set_params`` / ``clone`` behave as usual.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .calibration import detect_single
from .segmentation import segment_series

__all__ = ["EnergyChangeDetector", "EnergySegmenter"]


class EnergyChangeDetector(BaseEstimator):
    """Permutation-calibrated test for a single change point.

    Parameters
    ----------
    trim : float, default=0.1
        Fraction of the series excluded from each end when searching for
        the split.
    exponent : float, default=1.0
        Power applied to euclidean distances, in (0, 2).
    alpha : float, default=0.05
        Level of the permutation test.
    n_permutations : int, default=999
        Number of permutation replicates.
    scheme : {"uniform", "circular_block"}, default="uniform"
        Permutation scheme; the block scheme preserves short-range
        dependence.
    block_length : int or None, default=None
        Block length for the circular block scheme; ceil(sqrt(n)) when
        None.
    random_state : None, int or numpy.random.SeedSequence, default=None
        Seed for the permutation stream.

    Attributes
    ----------
    decision_ : DetectionDecision
        Full test outcome.
    change_point_ : int or None
        Left-segment size of the detected change, None if not rejected.
    statistic_ : float
        Observed scan statistic.
    p_value_ : float
        Permutation p-value.
    n_samples_ : int
        Number of fitted observations.

    Examples
    --------
    >>> import numpy as np
    >>> rng = np.random.default_rng(7)
    >>> x = np.concatenate([rng.normal(0, 1, 60), rng.normal(3, 1, 60)])
    >>> det = EnergyChangeDetector(random_state=0).fit(x)
    >>> det.predict()
    array([60])
    """

    def __init__(self, trim=0.1, exponent=1.0, alpha=0.05, n_permutations=999,
                 scheme="uniform", block_length=None, random_state=None):
        self.trim = trim
        self.exponent = exponent
        self.alpha = alpha
        self.n_permutations = n_permutations
        self.scheme = scheme
        self.block_length = block_length
        self.random_state = random_state

    def fit(self, X, y=None):
        """Run the test on a series of observations.

        Parameters
        ----------
        X : array-like of shape (n_samples,) or (n_samples, n_features)
            Ordered observations.
        y : ignored
            Present for interface compatibility.
        """
        decision = detect_single(
            X,
            trim=self.trim,
            exponent=self.exponent,
            alpha=self.alpha,
            n_permutations=self.n_permutations,
            scheme=self.scheme,
            block_length=self.block_length,
            random_state=self.random_state,
        )
        self.decision_ = decision
        self.change_point_ = decision.change_point
        self.statistic_ = decision.statistic
        self.p_value_ = decision.p_value
        self.n_samples_ = decision.n_samples
        return self

    def predict(self, X=None):
        """Detected change points as left-segment sizes.

        Returns an empty array when the test did not reject. ``X`` is
        accepted and ignored so the method composes with pipelines.
        """
        check_is_fitted(self)
        if self.change_point_ is None:
            return np.empty(0, dtype=np.int64)
        return np.array([self.change_point_], dtype=np.int64)


class EnergySegmenter(BaseEstimator):
    """Recursive binary segmentation into homogeneous stretches.

    Parameters
    ----------
    trim : float, default=0.1
        Split-search trimming fraction within each segment.
    exponent : float, default=1.0
        Power applied to euclidean distances, in (0, 2).
    alpha : float, default=0.05
        Level of each permutation test.
    n_permutations : int, default=999
        Permutation replicates per tested segment.
    scheme : {"uniform", "circular_block"}, default="uniform"
        Permutation scheme.
    block_length : int or None, default=None
        Block length for the circular block scheme.
    min_segment : int or None, default=None
        Shortest segment still tested; max(4, ceil(2 * trim * n)) when
        None.
    correction : {"none", "bonferroni"}, default="none"
        Multiplicity correction across the recursion.
    max_tests : int or None, default=None
        Test budget for the bonferroni correction.
    random_state : None, int or numpy.random.SeedSequence, default=None
        Master seed; each segment derives its own stream from it.

    Attributes
    ----------
    report_ : SegmentationReport
        Full recursion trace.
    change_points_ : ndarray
        Sorted change points (left-count boundaries).
    n_samples_ : int
        Number of fitted observations.
    """

    def __init__(self, trim=0.1, exponent=1.0, alpha=0.05, n_permutations=999,
                 scheme="uniform", block_length=None, min_segment=None,
                 correction="none", max_tests=None, random_state=None):
        self.trim = trim
        self.exponent = exponent
        self.alpha = alpha
        self.n_permutations = n_permutations
        self.scheme = scheme
        self.block_length = block_length
        self.min_segment = min_segment
        self.correction = correction
        self.max_tests = max_tests
        self.random_state = random_state

    def fit(self, X, y=None):
        """Segment a series of observations.

        Parameters
        ----------
        X : array-like of shape (n_samples,) or (n_samples, n_features)
            Ordered observations.
        y : ignored
            Present for interface compatibility.
        """
        report = segment_series(
            X,
            trim=self.trim,
            exponent=self.exponent,
            alpha=self.alpha,
            n_permutations=self.n_permutations,
            scheme=self.scheme,
            block_length=self.block_length,
            min_segment=self.min_segment,
            correction=self.correction,
            max_tests=self.max_tests,
            random_state=self.random_state,
        )
        self.report_ = report
        self.change_points_ = report.change_points
        self.n_samples_ = report.n_samples
        return self

    def predict(self, X=None):
        """Sorted change points found by the recursion."""
        check_is_fitted(self)
        return self.change_points_.copy()

    def transform(self, X=None):
        """Segment label of each observation, 0-based and increasing."""
        check_is_fitted(self)
        labels = np.zeros(self.n_samples_, dtype=np.int64)
        for point in self.change_points_:
            labels[point:] += 1
        return labels

    def fit_predict(self, X, y=None):
        return self.fit(X, y).predict()

"""Studentized scan over candidate splits and the argmax change estimate.

The raw energy gap shrinks like 1/k + 1/m as segments grow, so gaps at
different splits are not comparable. Rescaling by k * m / n and dividing
by a pooled scale estimate puts every split on a common footing:

    score(k) = k * (n - k) / (sqrt(2) * n * scale) * energy(k).

The scale is the root mean square of the double-centered distance matrix,
a pooled quantity shared by all splits. The scan statistic is the largest
absolute score over the trimmed candidate set, and the split attaining it
is the change-point estimate.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._validation import (
    as_points,
    check_exponent,
    check_split,
    check_trim,
    tolerant_ceil,
    tolerant_floor,
)
from .energy import (
    SplitStatistics,
    _check_distance_matrix,
    _pair_prefix_sums,
    _segment_sums,
    _split_energies,
    distance_matrix,
)
from .exceptions import DegenerateScaleError

__all__ = [
    "ScaleEstimate",
    "ScanResult",
    "SplitWeights",
    "double_centered_scale",
    "candidate_splits",
    "studentize",
    "scan",
    "split_weights",
]

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class ScaleEstimate:
    """Pooled scale of the double-centered distance matrix.

    ``squared`` is the mean of the squared double-centered entries over
    unordered pairs; ``value`` is its square root, in kernel units.
    """

    value: float
    squared: float
    n_samples: int


@dataclass(frozen=True)
class ScanResult:
    """Scores for every candidate split plus the scan maximum.

    Attributes
    ----------
    splits : ndarray of int
        Candidate left-segment sizes, ascending.
    scores : ndarray of float
        Studentized score per split, aligned with ``splits``.
    statistic : float
        ``max(abs(scores))``.
    best_split : int
        Split attaining the maximum absolute score; ties resolve to the
        smallest split so repeated runs agree.
    scale : ScaleEstimate
    trim : float
        Fraction trimmed from each end when building the candidate set.
    """

    splits: np.ndarray
    scores: np.ndarray
    statistic: float
    best_split: int
    scale: ScaleEstimate
    trim: float


def double_centered_scale(dist):
    """Scale estimate from the double-centered distance matrix.

    Each entry is centered by its two row means and the grand mean,

        centered(i, j) = d(i, j) - rowmean(i) - rowmean(j) + grandmean,

    and the squared scale is the average of centered(i, j)**2 over
    unordered pairs. Row means exclude the diagonal. The result depends
    only on the multiset of pairwise distances, not on observation order.
    """
    dist = _check_distance_matrix(dist, min_size=3)
    n = dist.shape[0]
    row_means = dist.sum(axis=1) / (n - 1.0)
    grand_mean = dist.sum() / (n * (n - 1.0))
    centered = dist - row_means[:, np.newaxis] - row_means[np.newaxis, :] + grand_mean
    np.fill_diagonal(centered, 0.0)
    squared = float((centered**2).sum() / (n * (n - 1.0)))
    return ScaleEstimate(value=math.sqrt(squared), squared=squared, n_samples=n)


def candidate_splits(n_samples, trim=0.1):
    """Admissible splits after trimming a fraction from each end.

    Returns every split k with ceil(trim * n) <= k <= floor((1 - trim) * n),
    further clamped so both segments keep at least two observations.
    """
    trim = check_trim(trim)
    n = int(n_samples)
    if n < 4:
        raise ValueError(f"need at least 4 observations, got {n}")
    lo = max(2, tolerant_ceil(trim * n))
    hi = min(n - 2, tolerant_floor((1.0 - trim) * n))
    if lo > hi:
        raise ValueError(
            f"no admissible splits for n={n} with trim={trim}; "
            "decrease trim or provide more observations"
        )
    return np.arange(lo, hi + 1)


def studentize(stats, scale, n_samples):
    """Convert one split's energy gap into its studentized score."""
    if not isinstance(stats, SplitStatistics):
        raise TypeError("stats must be a SplitStatistics instance")
    if scale.value <= 0.0:
        raise DegenerateScaleError(
            "scale estimate is zero; the series is constant and the "
            "scan statistic is undefined"
        )
    k = stats.split
    m = n_samples - k
    return k * m / (_SQRT2 * n_samples * scale.value) * stats.energy


def scan(points, trim=0.1, exponent=1.0):
    """Score every candidate split of a series and locate the maximum.

    Parameters
    ----------
    points : array-like, shape (n,) or (n, d)
        Ordered observations.
    trim : float in (0, 0.5)
        Fraction of the series excluded from each end of the candidate
        set, keeping both segments large enough to estimate their means.
    exponent : float in (0, 2)
        Distance power, as in :func:`edscan.distance_matrix`.

    Raises
    ------
    DegenerateScaleError
        If all pairwise distances are zero (constant series).
    """
    trim = check_trim(trim)
    exponent = check_exponent(exponent)
    points = as_points(points, min_rows=4)
    dist = distance_matrix(points, exponent)
    splits = candidate_splits(points.shape[0], trim)
    return _scan_distances(dist, splits, trim)


def _scan_distances(dist, splits, trim):
    """Scan a prepared distance matrix (internal, shared with calibration)."""
    n = dist.shape[0]
    scale = double_centered_scale(dist)
    if scale.value <= 0.0:
        raise DegenerateScaleError(
            "all pairwise distances are zero (max distance "
            f"{dist.max():.3g}); the series is constant and the scan "
            "statistic is undefined",
            max_distance=float(dist.max()),
        )
    prefix_within, prefix_rows, total = _pair_prefix_sums(dist)
    left, cross, right = _segment_sums(prefix_within, prefix_rows, total, splits)
    energies = _split_energies(n, splits, left, cross, right)
    k = splits.astype(np.float64)
    scores = k * (n - k) / (_SQRT2 * n * scale.value) * energies
    magnitudes = np.abs(scores)
    best = int(np.argmax(magnitudes))
    return ScanResult(
        splits=splits,
        scores=scores,
        statistic=float(magnitudes[best]),
        best_split=int(splits[best]),
        scale=scale,
        trim=float(trim),
    )


@dataclass(frozen=True)
class SplitWeights:
    """Pair weights that express the rescaled energy gap as one sum.

    For a split with left size k and right size m = n - k, assign to each
    unordered pair the weight ``between`` when it straddles the split and
    ``within_left`` or ``within_right`` otherwise. Then

        (k * m / n) * energy = (1 / n) * sum over pairs of weight * distance,

    and every row of the weight matrix sums to zero, which is what removes
    the first-order fluctuations of the distances from the scan statistic.
    Used as a diagnostic and as a test oracle; with ``exact=True`` the
    weights are Fractions and the zero identities hold exactly.
    """

    n_samples: int
    split: int
    within_left: object
    between: object
    within_right: object

    def matrix(self):
        """Full n x n weight matrix with a zero diagonal."""
        n, k = self.n_samples, self.split
        if isinstance(self.between, Fraction):
            w = np.empty((n, n), dtype=object)
            zero = Fraction(0)
        else:
            w = np.empty((n, n))
            zero = 0.0
        w[:k, :k] = self.within_left
        w[k:, k:] = self.within_right
        w[:k, k:] = self.between
        w[k:, :k] = self.between
        for i in range(n):
            w[i, i] = zero
        return w

    def row_sums(self):
        """Per-row sums of the weight matrix (all zero by construction)."""
        n, k = self.n_samples, self.split
        m = n - k
        left_row = (k - 1) * self.within_left + m * self.between
        right_row = k * self.between + (m - 1) * self.within_right
        return [left_row] * k + [right_row] * m

    def total_sum(self):
        """Sum of weights over unordered pairs (zero by construction)."""
        n, k = self.n_samples, self.split
        m = n - k
        pairs_left = k * (k - 1) // 2
        pairs_right = m * (m - 1) // 2
        return (
            pairs_left * self.within_left
            + k * m * self.between
            + pairs_right * self.within_right
        )

    def square_sum(self):
        """Sum of squared weights over unordered pairs, in closed form."""
        n, k = self.n_samples, self.split
        m = n - k
        if isinstance(self.between, Fraction):
            return (
                2 * k * Fraction(m * m, k - 1)
                + 4 * k * m
                + 2 * m * Fraction(k * k, m - 1)
            )
        return 2.0 * k * m * m / (k - 1.0) + 4.0 * k * m + 2.0 * m * k * k / (m - 1.0)

    def normalized_square_sum(self):
        """``square_sum / n**2``, which approaches 2 for interior splits."""
        total = self.square_sum()
        if isinstance(total, Fraction):
            return total / Fraction(self.n_samples**2)
        return total / float(self.n_samples**2)


def split_weights(n_samples, split, exact=False):
    """Construct the pair weights for one split.

    With ``exact=True`` the three weight values are Fractions, so the
    row-sum and total-sum identities can be checked with no rounding.
    """
    n = int(n_samples)
    k = check_split(n, split)
    m = n - k
    if exact:
        within_left = Fraction(-2 * m, k - 1)
        between = Fraction(2)
        within_right = Fraction(-2 * k, m - 1)
    else:
        within_left = -2.0 * m / (k - 1.0)
        between = 2.0
        within_right = -2.0 * k / (m - 1.0)
    return SplitWeights(
        n_samples=n,
        split=k,
        within_left=within_left,
        between=between,
        within_right=within_right,
    )

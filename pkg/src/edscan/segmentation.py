"""Recursive binary segmentation for multiple change points.

Each segment is tested for a single change with the permutation-
calibrated scan. On rejection the segment splits at the estimated change
point and both halves are tested in turn, depth first, left first.
Recursion stops at segments shorter than a minimum length, at segments
with no admissible splits, and at constant segments, which become leaves
with a recorded note rather than failures.

Every tested node derives its own seed from the run seed and the node's
global bounds, so reports are reproducible and do not depend on the
order in which siblings are processed.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import (
    as_points,
    as_seed_sequence,
    check_alpha,
    check_trim,
    spawn_seed,
    tolerant_ceil,
)
from .calibration import DetectionDecision, detect_single
from .exceptions import DegenerateScaleError
from .scan import candidate_splits

__all__ = [
    "SegmentNode",
    "SegmentationReport",
    "default_min_segment",
    "segment_series",
]

_CORRECTIONS = ("none", "bonferroni")


@dataclass(frozen=True)
class SegmentNode:
    """One node of the segmentation recursion.

    ``start``/``stop`` bound the segment as 0-based half-open indices
    into the full series. ``decision`` is None when the segment was not
    tested (too short, no admissible splits, or constant), in which case
    ``note`` says why. ``split`` is the accepted global change point
    (number of observations to its left) or None.
    """

    start: int
    stop: int
    depth: int
    decision: DetectionDecision | None
    split: int | None
    note: str | None


@dataclass(frozen=True)
class SegmentationReport:
    """All accepted change points plus the full recursion trace.

    A change point c means the distribution differs between observations
    1..c and c+1..n (c counts the observations to its left).
    """

    change_points: np.ndarray
    nodes: list
    depth: int
    n_samples: int
    min_segment: int
    tested_level: float


def default_min_segment(n_samples, trim=0.1):
    """Minimum segment length: twice the trimmed fraction of the root.

    Computed once from the full series length and clamped below at 4 so
    each side of any tested split keeps at least two observations.
    """
    trim = check_trim(trim)
    return max(4, tolerant_ceil(2.0 * trim * int(n_samples)))


def _has_admissible_split(length, trim):
    try:
        candidate_splits(length, trim)
    except ValueError:
        return False
    return True


def segment_series(points, *, trim=0.1, exponent=1.0, alpha=0.05,
                   n_permutations=999, scheme="uniform", block_length=None,
                   min_segment=None, correction="none", max_tests=None,
                   random_state=None):
    """Discover multiple change points by recursive testing.

    Parameters
    ----------
    points : array-like, shape (n,) or (n, d)
        Ordered observations.
    min_segment : int, optional
        Segments shorter than this are never tested. Defaults to
        :func:`default_min_segment` of the full series.
    correction : {"none", "bonferroni"}
        With "bonferroni", each segment is tested at level
        ``alpha / max_tests`` to bound the familywise error over the
        recursion.
    max_tests : int, optional
        Divisor for the Bonferroni correction; defaults to
        ``n // min_segment``, an upper bound on the number of testable
        segments. Only meaningful with ``correction="bonferroni"``.
    block_length : int, optional
        For the circular_block scheme. A fixed value is clamped to each
        segment's length; by default each segment uses the ceiling of the
        square root of its own length.

    Returns
    -------
    SegmentationReport
        Change points sorted ascending, plus one node per visited
        segment in depth-first, left-first order.
    """
    points = as_points(points, min_rows=4)
    n = points.shape[0]
    trim = check_trim(trim)
    alpha = check_alpha(alpha)
    if correction not in _CORRECTIONS:
        raise ValueError(
            f"correction must be one of {_CORRECTIONS}, got {correction!r}"
        )
    if min_segment is None:
        min_segment = default_min_segment(n, trim)
    else:
        min_segment = int(min_segment)
        if min_segment < 4:
            raise ValueError(f"min_segment must be >= 4, got {min_segment}")
    if correction == "bonferroni":
        if max_tests is None:
            max_tests = max(1, n // min_segment)
        else:
            max_tests = int(max_tests)
            if max_tests < 1:
                raise ValueError(f"max_tests must be >= 1, got {max_tests}")
        tested_level = alpha / max_tests
    else:
        if max_tests is not None:
            raise ValueError("max_tests requires correction='bonferroni'")
        tested_level = alpha

    root_seed = as_seed_sequence(random_state)
    nodes = []
    change_points = []
    stack = [(0, n, 0)]
    while stack:
        start, stop, depth = stack.pop()
        length = stop - start
        if length < min_segment:
            nodes.append(SegmentNode(
                start=start, stop=stop, depth=depth, decision=None,
                split=None,
                note=f"segment shorter than minimum length {min_segment}",
            ))
            continue
        if not _has_admissible_split(length, trim):
            nodes.append(SegmentNode(
                start=start, stop=stop, depth=depth, decision=None,
                split=None, note="no admissible splits at this length",
            ))
            continue
        node_block = None
        if scheme == "circular_block" and block_length is not None:
            node_block = min(int(block_length), length)
        try:
            decision = detect_single(
                points[start:stop],
                trim=trim, exponent=exponent, alpha=tested_level,
                n_permutations=n_permutations, scheme=scheme,
                block_length=node_block,
                random_state=spawn_seed(root_seed, start, stop),
            )
        except DegenerateScaleError:
            nodes.append(SegmentNode(
                start=start, stop=stop, depth=depth, decision=None,
                split=None, note="constant segment, no change detectable",
            ))
            continue
        if decision.reject:
            split = start + decision.change_point
            nodes.append(SegmentNode(
                start=start, stop=stop, depth=depth, decision=decision,
                split=split, note=None,
            ))
            change_points.append(split)
            # push right first so the left child is processed next
            stack.append((split, stop, depth + 1))
            stack.append((start, split, depth + 1))
        else:
            nodes.append(SegmentNode(
                start=start, stop=stop, depth=depth, decision=decision,
                split=None, note=None,
            ))
    return SegmentationReport(
        change_points=np.array(sorted(change_points), dtype=np.int64),
        nodes=nodes,
        depth=max(node.depth for node in nodes),
        n_samples=n,
        min_segment=min_segment,
        tested_level=tested_level,
    )

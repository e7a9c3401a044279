"""Slow, independent reference implementations.

Everything here recomputes the package's quantities from their defining
sums, in pure Python with ``math.fsum``, so agreement with the vectorized
code is evidence rather than tautology.
"""

import math
from fractions import Fraction


def pair_distance(a, b, exponent=1.0):
    gap = math.sqrt(math.fsum((x - y) ** 2 for x, y in zip(a, b)))
    return gap**exponent


def within_mean(points, indices, exponent=1.0):
    """Mean distance over unordered pairs inside one index set."""
    terms = [
        pair_distance(points[i], points[j], exponent)
        for pos, i in enumerate(indices)
        for j in indices[pos + 1 :]
    ]
    count = len(indices) * (len(indices) - 1) // 2
    return math.fsum(terms) / count


def between_mean(points, left, right, exponent=1.0):
    terms = [
        pair_distance(points[i], points[j], exponent) for i in left for j in right
    ]
    return math.fsum(terms) / (len(left) * len(right))


def split_energy(points, split, exponent=1.0):
    """Energy gap at one split from the defining triple sums."""
    n = len(points)
    left = list(range(split))
    right = list(range(split, n))
    return (
        2.0 * between_mean(points, left, right, exponent)
        - within_mean(points, left, exponent)
        - within_mean(points, right, exponent)
    )


def centered_scale_squared(points, exponent=1.0):
    """Mean squared double-centered distance over unordered pairs."""
    n = len(points)
    dist = [
        [pair_distance(points[i], points[j], exponent) for j in range(n)]
        for i in range(n)
    ]
    row = [
        math.fsum(dist[i][j] for j in range(n) if j != i) / (n - 1)
        for i in range(n)
    ]
    grand = math.fsum(row) / n
    total = math.fsum(
        (dist[i][j] - row[i] - row[j] + grand) ** 2
        for i in range(n)
        for j in range(n)
        if i != j
    )
    return total / (n * (n - 1))


def studentized_score(points, split, exponent=1.0):
    n = len(points)
    scale = math.sqrt(centered_scale_squared(points, exponent))
    rate = split * (n - split) / (math.sqrt(2.0) * n * scale)
    return rate * split_energy(points, split, exponent)


def weight_matrix(n, split):
    """Exact pair-weight matrix built cell by cell from the definitions."""
    m = n - split
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            if i == j:
                row.append(Fraction(0))
            elif i < split and j < split:
                row.append(Fraction(-2 * m, split - 1))
            elif i >= split and j >= split:
                row.append(Fraction(-2 * split, m - 1))
            else:
                row.append(Fraction(2))
        rows.append(row)
    return rows


def pairwise_energy(left, right):
    """Two-sample energy over all ordered pairs, including diagonals."""
    n, m = len(left), len(right)
    cross = math.fsum(abs(x - y) for x in left for y in right) / (n * m)
    inner_left = math.fsum(abs(x - y) for x in left for y in left) / (n * n)
    inner_right = math.fsum(abs(x - y) for x in right for y in right) / (m * m)
    return 2.0 * cross - inner_left - inner_right

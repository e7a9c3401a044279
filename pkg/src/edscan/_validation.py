"""Input validation and seed-derivation helpers shared across the package."""

import math
import numbers

import numpy as np


def tolerant_ceil(x, tol=1e-9):
    """Ceiling that forgives floating noise around integers.

    0.1 * 30 evaluates to 3.0000000000000004; a plain ceil would bump the
    result to 4 and silently change index sets, so values within tol of an
    integer snap to it first.
    """
    nearest = round(x)
    if abs(x - nearest) < tol:
        return int(nearest)
    return int(math.ceil(x))


def tolerant_floor(x, tol=1e-9):
    """Floor with the same integer snapping as :func:`tolerant_ceil`."""
    nearest = round(x)
    if abs(x - nearest) < tol:
        return int(nearest)
    return int(math.floor(x))


def as_points(data, min_rows=1):
    """Coerce input to a float64 array of shape (n, d).

    Accepts a 1-d sequence (treated as n scalar observations) or a 2-d
    array with one row per observation. Rejects non-finite coordinates.
    """
    points = np.asarray(data, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, np.newaxis]
    if points.ndim != 2:
        raise ValueError(
            f"expected a 1-d or 2-d array of observations, got ndim={points.ndim}"
        )
    if points.shape[0] < min_rows:
        raise ValueError(
            f"need at least {min_rows} observations, got {points.shape[0]}"
        )
    if points.shape[1] < 1:
        raise ValueError("observations must have at least one coordinate")
    if not np.all(np.isfinite(points)):
        raise ValueError("observations must be finite (no NaN or inf)")
    return np.ascontiguousarray(points)


def check_exponent(exponent):
    exponent = float(exponent)
    if not 0.0 < exponent < 2.0:
        raise ValueError(f"exponent must lie in (0, 2), got {exponent}")
    return exponent


def check_trim(trim):
    trim = float(trim)
    if not 0.0 < trim < 0.5:
        raise ValueError(f"trim must lie in (0, 0.5), got {trim}")
    return trim


def check_alpha(alpha):
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def check_split(n_samples, split):
    split = int(split)
    if not 2 <= split <= n_samples - 2:
        raise ValueError(
            f"split must satisfy 2 <= split <= n - 2 with n={n_samples}, got {split}"
        )
    return split


def as_seed_sequence(random_state):
    """Resolve user-facing random_state into a SeedSequence.

    None draws fresh OS entropy; an int seeds reproducibly; an existing
    SeedSequence passes through untouched.
    """
    if random_state is None:
        return np.random.SeedSequence()
    if isinstance(random_state, np.random.SeedSequence):
        return random_state
    if isinstance(random_state, numbers.Integral):
        return np.random.SeedSequence(int(random_state))
    raise TypeError(
        "random_state must be None, an int, or a numpy SeedSequence, "
        f"got {type(random_state).__name__}"
    )


def spawn_seed(root, *key):
    """Derive a child SeedSequence as a pure function of (root, key).

    Children with distinct keys are statistically independent streams, and
    the derivation does not depend on call order, so parallel schedules
    reproduce serial results exactly.
    """
    base = tuple(root.spawn_key)
    return np.random.SeedSequence(entropy=root.entropy, spawn_key=base + key)

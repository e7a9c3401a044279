"""Monte Carlo harness: generators with injected changes, size, power,
localization, and the small analytic oracles used to check them.

Scenarios pair a base distribution with an optional change at a fixed
fraction of the series. Runners replay a scenario many times with
per-replicate seeds derived from a master seed, so summaries are exactly
reproducible at any parallelism.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np
from joblib import Parallel, delayed

from ._validation import as_seed_sequence, spawn_seed, tolerant_floor
from .calibration import detect_single
from .scan import scan

__all__ = [
    "Normal",
    "SkewNormal",
    "Exponential",
    "Change",
    "DetectorSettings",
    "Scenario",
    "SimulationSummary",
    "apply_change",
    "generate",
    "run_size",
    "run_power",
    "run_localization",
    "two_sample_energy",
    "mixture_energy",
    "drift_curve",
    "preset_scenario",
    "standard_family",
    "PRESET_NAMES",
]


@dataclass(frozen=True)
class Normal:
    mean: float = 0.0
    variance: float = 1.0

    def __post_init__(self):
        if self.variance <= 0:
            raise ValueError(f"variance must be positive, got {self.variance}")

    def sample(self, rng, size):
        return rng.normal(self.mean, math.sqrt(self.variance), size)

    def describe(self):
        return {"family": "normal", "mean": self.mean, "variance": self.variance}


@dataclass(frozen=True)
class SkewNormal:
    """Skew-normal with location, scale and shape parameters.

    Sampled through the half-normal representation: with delta =
    shape / sqrt(1 + shape**2) and independent standard normals Z1, Z2,

        X = location + scale * (delta * |Z1| + sqrt(1 - delta**2) * Z2).

    shape = 0 reduces to Normal(location, scale**2); larger shape skews
    the distribution to the right.
    """

    location: float = 0.0
    scale: float = 1.0
    shape: float = 0.0

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError(f"scale must be positive, got {self.scale}")

    def sample(self, rng, size):
        delta = self.shape / math.sqrt(1.0 + self.shape**2)
        z1 = rng.normal(size=size)
        z2 = rng.normal(size=size)
        mixed = delta * np.abs(z1) + math.sqrt(1.0 - delta**2) * z2
        return self.location + self.scale * mixed

    def describe(self):
        return {
            "family": "skew-normal",
            "location": self.location,
            "scale": self.scale,
            "shape": self.shape,
        }


@dataclass(frozen=True)
class Exponential:
    rate: float = 1.0

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError(f"rate must be positive, got {self.rate}")

    def sample(self, rng, size):
        return rng.exponential(1.0 / self.rate, size)

    def describe(self):
        return {"family": "exponential", "rate": self.rate}


@dataclass(frozen=True)
class Change:
    """Post-change parameter adjustments applied after a fraction of the series.

    ``fraction`` locates the change: the first floor(fraction * n)
    observations come from the base distribution, the rest from the
    adjusted one. The other fields are parameter-level changes; fields a
    family does not support raise when applied.
    """

    fraction: float
    mean_shift: float | None = None
    variance: float | None = None
    shape: float | None = None

    def __post_init__(self):
        if not 0.0 < self.fraction < 1.0:
            raise ValueError(f"fraction must lie in (0, 1), got {self.fraction}")
        if self.mean_shift is None and self.variance is None and self.shape is None:
            raise ValueError("change must adjust at least one parameter")


def apply_change(base, change):
    """Distribution for the post-change segment."""
    if isinstance(base, Normal):
        if change.shape is not None:
            raise ValueError("normal distribution has no shape parameter")
        out = base
        if change.mean_shift is not None:
            out = replace(out, mean=out.mean + change.mean_shift)
        if change.variance is not None:
            out = replace(out, variance=change.variance)
        return out
    if isinstance(base, SkewNormal):
        out = base
        if change.mean_shift is not None:
            out = replace(out, location=out.location + change.mean_shift)
        if change.variance is not None:
            # the squared scale parameter is set to the requested value
            out = replace(out, scale=math.sqrt(change.variance))
        if change.shape is not None:
            out = replace(out, shape=change.shape)
        return out
    if isinstance(base, Exponential):
        if change.mean_shift is not None or change.shape is not None:
            raise ValueError(
                "exponential changes are variance-only (rate = 1/sqrt(variance))"
            )
        return replace(base, rate=1.0 / math.sqrt(change.variance))
    raise TypeError(f"unsupported distribution {type(base).__name__}")


@dataclass(frozen=True)
class DetectorSettings:
    """Detector configuration shared by all replicates of a scenario."""

    trim: float = 0.1
    exponent: float = 1.0
    alpha: float = 0.05
    n_permutations: int = 999
    scheme: str = "uniform"
    block_length: int | None = None

    def as_kwargs(self):
        return {
            "trim": self.trim,
            "exponent": self.exponent,
            "alpha": self.alpha,
            "n_permutations": self.n_permutations,
            "scheme": self.scheme,
            "block_length": self.block_length,
        }


@dataclass(frozen=True)
class Scenario:
    base: object
    n_samples: int
    change: Change | None = None
    replications: int = 1000
    detector: DetectorSettings = field(default_factory=DetectorSettings)

    def __post_init__(self):
        if self.n_samples < 4:
            raise ValueError(f"n_samples must be >= 4, got {self.n_samples}")
        if self.replications < 1:
            raise ValueError(
                f"replications must be >= 1, got {self.replications}"
            )

    def change_index(self):
        """True change point (left-segment size), or None without a change."""
        if self.change is None:
            return None
        pre = tolerant_floor(self.change.fraction * self.n_samples)
        if not 1 <= pre <= self.n_samples - 1:
            raise ValueError(
                f"change fraction {self.change.fraction} leaves an empty "
                f"segment for n={self.n_samples}"
            )
        return pre


def generate(scenario, random_state=None):
    """Draw one series from a scenario.

    The first floor(fraction * n) observations come from the base
    distribution and the remainder from the changed one; without a change
    the whole series is drawn from the base.
    """
    rng = np.random.default_rng(as_seed_sequence(random_state))
    n = scenario.n_samples
    if scenario.change is None:
        return scenario.base.sample(rng, n)
    pre = scenario.change_index()
    post_dist = apply_change(scenario.base, scenario.change)
    return np.concatenate([
        scenario.base.sample(rng, pre),
        post_dist.sample(rng, n - pre),
    ])


@dataclass(frozen=True)
class SimulationSummary:
    """Aggregates over the replicates of one scenario.

    ``rejection_rate`` is None for runs that never test (pure
    localization); ``localization_error`` is None for size runs and for
    conditional localization runs with zero rejections. Standard errors
    use sqrt(p * (1 - p) / R) for rates and the sample standard error for
    localization means.
    """

    rejection_rate: float | None
    rejection_se: float | None
    localization_error: float | None
    localization_se: float | None
    replications: int
    records: list | None = None


def _replicate_record(scenario, mode, master_seed, index):
    data = generate(scenario, spawn_seed(master_seed, index, 0))
    record = {"replicate": index}
    settings = scenario.detector
    if mode == "scan_only":
        result = scan(data, trim=settings.trim, exponent=settings.exponent)
        record["best_split"] = result.best_split
        record["rejected"] = None
    else:
        decision = detect_single(
            data,
            random_state=spawn_seed(master_seed, index, 1),
            **settings.as_kwargs(),
        )
        record["rejected"] = decision.reject
        # argmax is defined by the scan whether or not the test rejects
        result = scan(data, trim=settings.trim, exponent=settings.exponent)
        record["best_split"] = result.best_split
    truth = scenario.change_index()
    if truth is not None:
        record["error"] = abs(record["best_split"] - truth) / scenario.n_samples
    return record


def _collect_records(scenario, mode, random_state, n_jobs):
    master = as_seed_sequence(random_state)
    indices = range(scenario.replications)
    if n_jobs in (None, 1):
        return [_replicate_record(scenario, mode, master, i) for i in indices]
    worker = delayed(_replicate_record)
    return Parallel(n_jobs=n_jobs)(
        worker(scenario, mode, master, i) for i in indices
    )


def _rate_summary(records, keep):
    flags = [r["rejected"] for r in records]
    count = len(flags)
    rate = sum(flags) / count
    se = math.sqrt(rate * (1.0 - rate) / count)
    return rate, se, (records if keep else None)


def _error_summary(errors):
    if not errors:
        return None, None
    mean = float(np.mean(errors))
    if len(errors) > 1:
        se = float(np.std(errors, ddof=1) / math.sqrt(len(errors)))
    else:
        se = 0.0
    return mean, se


def run_size(scenario, *, random_state=None, n_jobs=1, keep_records=False):
    """Empirical type I error of the detector under a no-change scenario."""
    if scenario.change is not None:
        raise ValueError("run_size requires a scenario without a change")
    records = _collect_records(scenario, "detect", random_state, n_jobs)
    rate, se, kept = _rate_summary(records, keep_records)
    return SimulationSummary(
        rejection_rate=rate, rejection_se=se,
        localization_error=None, localization_se=None,
        replications=scenario.replications, records=kept,
    )


def run_power(scenario, *, random_state=None, n_jobs=1, keep_records=False):
    """Empirical power plus the unconditional localization error."""
    if scenario.change is None:
        raise ValueError("run_power requires a scenario with a change")
    records = _collect_records(scenario, "detect", random_state, n_jobs)
    rate, se, kept = _rate_summary(records, keep_records)
    error, error_se = _error_summary([r["error"] for r in records])
    return SimulationSummary(
        rejection_rate=rate, rejection_se=se,
        localization_error=error, localization_se=error_se,
        replications=scenario.replications, records=kept,
    )


def run_localization(scenario, *, conditional=False, random_state=None,
                     n_jobs=1, keep_records=False):
    """Mean scaled distance between the estimated and true change point.

    By default the error averages over all replicates, using the scan
    argmax whether or not the test would reject; no permutations are run,
    which makes the default mode fast. With ``conditional=True`` the full
    test runs and the error averages over rejecting replicates only.
    """
    if scenario.change is None:
        raise ValueError("run_localization requires a scenario with a change")
    mode = "detect" if conditional else "scan_only"
    records = _collect_records(scenario, mode, random_state, n_jobs)
    if conditional:
        rate, rate_se, kept = _rate_summary(records, keep_records)
        errors = [r["error"] for r in records if r["rejected"]]
    else:
        rate, rate_se = None, None
        kept = records if keep_records else None
        errors = [r["error"] for r in records]
    error, error_se = _error_summary(errors)
    return SimulationSummary(
        rejection_rate=rate, rejection_se=rate_se,
        localization_error=error, localization_se=error_se,
        replications=scenario.replications, records=kept,
    )


def _sorted_pair_mean(values, exclude_self=False):
    """Mean absolute difference over ordered pairs of one sample."""
    x = np.sort(np.asarray(values, dtype=np.float64))
    n = x.size
    if n < 2:
        return 0.0
    weights = 2.0 * np.arange(n) - (n - 1.0)
    pairs = n * (n - 1.0) if exclude_self else float(n) * n
    return 2.0 * float(weights @ x) / pairs


def _cross_pair_mean(left, right):
    """Mean absolute difference over pairs drawn from two samples."""
    x = np.sort(np.asarray(left, dtype=np.float64))
    y = np.asarray(right, dtype=np.float64)
    n, m = x.size, y.size
    cum = np.concatenate([[0.0], np.cumsum(x)])
    counts = np.searchsorted(x, y, side="right")
    below = cum[counts]
    total = cum[-1]
    sums = y * counts - below + (total - below) - y * (n - counts)
    return float(sums.sum()) / (n * m)


def two_sample_energy(left, right, unbiased=False):
    """Energy distance between two univariate samples.

    Twice the mean cross-sample absolute difference minus the two
    within-sample means. By default the within means run over all
    ordered pairs, which makes the value a nonnegative plug-in distance
    between the two empirical distributions. With ``unbiased=True`` the
    within means exclude self-pairs, removing the O(1/n) positive bias:
    the value is then an unbiased estimate of the population energy
    distance for independent samples (exactly zero in expectation when
    the distributions agree) but can come out slightly negative.
    """
    return (
        2.0 * _cross_pair_mean(left, right)
        - _sorted_pair_mean(left, exclude_self=unbiased)
        - _sorted_pair_mean(right, exclude_self=unbiased)
    )


def _sample_mixture(f1, f2, weight, rng, size):
    take_first = rng.random(size) < weight
    count = int(take_first.sum())
    out = np.empty(size)
    out[take_first] = f1.sample(rng, count)
    out[~take_first] = f2.sample(rng, size - count)
    return out


def mixture_energy(f1, f2, a, b, size, random_state=None):
    """Monte Carlo energy distance between two mixtures of f1 and f2.

    Draws ``size`` points from each of a * f1 + (1 - a) * f2 and
    b * f1 + (1 - b) * f2 and evaluates the unbiased form of
    :func:`two_sample_energy`, so the estimate is centered on the
    population value (a - b)**2 times the energy distance between f1
    and f2 even where that value is zero.
    """
    for name, value in (("a", a), ("b", b)):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {value}")
    rng = np.random.default_rng(as_seed_sequence(random_state))
    sample_a = _sample_mixture(f1, f2, a, rng, size)
    sample_b = _sample_mixture(f1, f2, b, rng, size)
    return two_sample_energy(sample_a, sample_b, unbiased=True)


def drift_curve(gamma, tau_star):
    """Expected rescaled energy profile of a single change, up to a constant.

    As a function of the evaluated split fraction gamma, with the true
    change at fraction tau_star, the profile rises to a unique maximum at
    gamma = tau_star and falls away on either side:

        (1 - tau_star)**2 * gamma / (1 - gamma)   for gamma <= tau_star,
        tau_star**2 * (1 - gamma) / gamma         for gamma > tau_star.

    At the peak the value is tau_star * (1 - tau_star). Used as a test
    oracle for where the mean scan profile should peak.
    """
    for name, value in (("gamma", gamma), ("tau_star", tau_star)):
        if not 0.0 < value < 1.0:
            raise ValueError(f"{name} must lie in (0, 1), got {value}")
    if gamma <= tau_star:
        return (1.0 - tau_star) ** 2 * gamma / (1.0 - gamma)
    return tau_star**2 * (1.0 - gamma) / gamma


_FAMILIES = {
    "normal": lambda: Normal(),
    "skew-normal": lambda: SkewNormal(shape=1.0),
    "skew_normal": lambda: SkewNormal(shape=1.0),
    "exponential": lambda: Exponential(),
}


def standard_family(name):
    """Standard member of a named family: N(0,1), skew-normal with unit
    scale and shape 1, or unit-rate exponential."""
    if name not in _FAMILIES:
        raise ValueError(
            f"family must be one of {sorted(set(_FAMILIES))}, got {name!r}"
        )
    return _FAMILIES[name]()

_PRESET_SIZES = (20, 30, 50, 100, 200)
_PRESET_FRACTIONS = (0.1, 0.2, 0.3, 0.4, 0.5)
_PRESET_SHIFTS = (0.5, 1.0, 1.5, 2.0)

PRESET_NAMES = ("table1", "power", "localization")


def preset_scenario(preset, *, dist="normal", n=100, shift=None, at=0.5,
                    replications=1000, detector=None):
    """Build one cell of a replication preset.

    ``table1`` cells are no-change size runs over the three standard
    families; ``power`` and ``localization`` cells add a normal mean
    shift at a fraction of the series. Returns (scenario, runner_kind)
    where runner_kind names the runner to use.
    """
    if preset not in PRESET_NAMES:
        raise ValueError(f"preset must be one of {PRESET_NAMES}, got {preset!r}")
    if dist not in _FAMILIES:
        raise ValueError(
            f"dist must be one of {sorted(set(_FAMILIES))}, got {dist!r}"
        )
    n = int(n)
    if n not in _PRESET_SIZES:
        raise ValueError(f"preset n must be one of {_PRESET_SIZES}, got {n}")
    detector = detector or DetectorSettings()
    base = _FAMILIES[dist]()
    if preset == "table1":
        if shift is not None:
            raise ValueError("table1 cells take no shift")
        scenario = Scenario(base=base, n_samples=n, change=None,
                            replications=replications, detector=detector)
        return scenario, "size"
    if shift is None:
        raise ValueError(f"{preset} cells need shift=<value>")
    shift = float(shift)
    if shift not in _PRESET_SHIFTS:
        raise ValueError(
            f"preset shift must be one of {_PRESET_SHIFTS}, got {shift}"
        )
    at = float(at)
    if at not in _PRESET_FRACTIONS:
        raise ValueError(
            f"preset change fraction must be one of {_PRESET_FRACTIONS}, got {at}"
        )
    if dist != "normal":
        raise ValueError(f"{preset} preset covers the normal mean shift only")
    change = Change(fraction=at, mean_shift=shift)
    scenario = Scenario(base=base, n_samples=n, change=change,
                        replications=replications, detector=detector)
    return scenario, "power" if preset == "power" else "localization"

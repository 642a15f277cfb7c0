"""Shuffle and shift surrogates for attributing cross multifractality.

Shifts are circular rotations so every surrogate keeps the original length.
Replicate ``i`` of an ensemble draws from ``SeedSequence(seed, spawn_key=(i,))``,
which makes ensembles reproducible and independent of execution order.
"""
from __future__ import annotations

import enum
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import AnalysisConfig
from .errors import ShapeMismatch, ShiftOutOfRange

MIN_ENSEMBLE = 50
LEAD_SHIFT_OFFSET = 100


class SurrogateKind(str, enum.Enum):
    SRG1 = "srg1"  # shuffle x, keep y
    SRG2 = "srg2"  # keep x, shuffle y
    SRG3 = "srg3"  # co-shuffle: one permutation for both
    SRG4 = "srg4"  # independent shuffles
    LEAD1 = "lead1"  # x leads y by n_shift
    LEAD2 = "lead2"  # y leads x by n_shift

    @property
    def is_lead(self):
        return self in (SurrogateKind.LEAD1, SurrogateKind.LEAD2)


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def replicate_rng(seed, index):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def make_surrogate(x, y, kind, n_shift=0, seed=None):
    """Surrogate pair ``(x', y')`` of the given kind.

    Lead kinds pair ``x(t)`` with ``y(t + n_shift)`` (``lead1``) or ``y(t)``
    with ``x(t + n_shift)`` (``lead2``); the shifted series wraps around.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ShapeMismatch("surrogates need two 1-d series of equal length")
    kind = SurrogateKind(kind)
    n = x.size
    if kind.is_lead:
        if not 0 <= n_shift < n:
            raise ShiftOutOfRange(f"n_shift = {n_shift} outside [0, {n})")
        if kind is SurrogateKind.LEAD1:
            return x.copy(), np.roll(y, -n_shift)
        return np.roll(x, -n_shift), y.copy()
    rng = _rng(seed)
    if kind is SurrogateKind.SRG1:
        return x[rng.permutation(n)], y.copy()
    if kind is SurrogateKind.SRG2:
        return x.copy(), y[rng.permutation(n)]
    if kind is SurrogateKind.SRG3:
        perm = rng.permutation(n)
        return x[perm], y[perm]
    return x[rng.permutation(n)], y[rng.permutation(n)]


@dataclass
class SurrogateReport:
    kind: str
    count: int
    widths: np.ndarray
    observed: float
    seed: int
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        self.widths = np.sort(np.asarray(self.widths, dtype=float))

    @property
    def mean(self):
        return float(np.mean(self.widths))

    @property
    def std(self):
        return float(np.std(self.widths, ddof=1))

    @property
    def stderr(self):
        return self.std / np.sqrt(self.widths.size)

    @property
    def p_value(self):
        exceed = int(np.count_nonzero(self.widths >= self.observed))
        return (1 + exceed) / (1 + self.widths.size)

    def to_dict(self):
        return {
            "kind": self.kind,
            "count": self.count,
            "seed": self.seed,
            "observed_width": self.observed,
            "mean": self.mean,
            "std": self.std,
            "stderr": self.stderr,
            "p_value": self.p_value,
            "widths": [float(w) for w in self.widths],
            "config": self.config,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _replicate_width(args):
    x, y, kind, index, seed, config = args
    if SurrogateKind(kind).is_lead:
        xs, ys = make_surrogate(x, y, kind, n_shift=LEAD_SHIFT_OFFSET + 1 + index)
    else:
        xs, ys = make_surrogate(x, y, kind, seed=replicate_rng(seed, index))
    return config.width(xs, ys)


def _map(fn, jobs, n_jobs):
    if n_jobs is None or n_jobs <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * n_jobs))))


def surrogate_ensemble(x, y, kind, count, seed, config=None, observed=None, n_jobs=1):
    """Width distribution over ``count`` surrogates of one kind.

    Lead kinds use shifts ``101 .. 100 + count``; shuffle kinds use one
    sub-seed per replicate.
    """
    if count < MIN_ENSEMBLE:
        raise ValueError(f"ensemble size must be at least {MIN_ENSEMBLE}")
    if seed is None:
        raise ValueError("surrogate ensembles require an explicit seed")
    kind = SurrogateKind(kind)
    config = config or AnalysisConfig()
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if kind.is_lead and LEAD_SHIFT_OFFSET + count >= x.size:
        raise ShiftOutOfRange(f"shifts up to {LEAD_SHIFT_OFFSET + count} exceed series length {x.size}")
    if observed is None:
        observed = config.width(x, y)
    jobs = [(x, y, kind.value, i, seed, config) for i in range(count)]
    widths = _map(_replicate_width, jobs, n_jobs)
    return SurrogateReport(kind.value, count, widths, float(observed), int(seed), config.to_dict())


def shift_scan(x, y, shifts, config=None):
    """Widths for each shift with x leading (``lead1``) and y leading (``lead2``)."""
    config = config or AnalysisConfig()
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shifts = [int(s) for s in shifts]
    if shifts and max(shifts) >= x.size / 10:
        raise ShiftOutOfRange(f"largest shift {max(shifts)} must stay below n/10 = {x.size / 10}")
    out = {"shifts": shifts, "original": config.width(x, y), "x_leads": [], "y_leads": []}
    for s in shifts:
        out["x_leads"].append(config.width(*make_surrogate(x, y, SurrogateKind.LEAD1, s)))
        out["y_leads"].append(config.width(*make_surrogate(x, y, SurrogateKind.LEAD2, s)))
    return out

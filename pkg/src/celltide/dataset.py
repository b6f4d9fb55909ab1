"""Supervised window construction, chronological splitting, normalization,
and a synthetic diurnal traffic generator for tests and demos."""

import math
from dataclasses import dataclass

import numpy as np

from .cdr import ActivitySeries

# Nov 1 2013 00:00 CET, origin of the 62-day Milan record
DEFAULT_T0_MS = 1_383_260_400_000


@dataclass(frozen=True)
class ScalerParams:
    """Min-max normalization fitted on the training slice only."""

    min: float
    max: float

    def transform(self, values):
        return (np.asarray(values, dtype=np.float64) - self.min) / (self.max - self.min)

    def inverse(self, values):
        return np.asarray(values, dtype=np.float64) * (self.max - self.min) + self.min


def fit_scaler(train_values) -> ScalerParams:
    train_values = np.asarray(train_values, dtype=np.float64)
    lo, hi = float(train_values.min()), float(train_values.max())
    if hi <= lo:
        raise ValueError("cannot fit scaler on a constant training slice")
    return ScalerParams(lo, hi)


@dataclass
class WindowSet:
    """Sliding input windows and next-step targets.

    inputs[i] covers target_slots[i]-T .. target_slots[i]-1 of the source
    series; targets[i] is the value at target_slots[i].
    """

    window_len: int
    inputs: np.ndarray       # (n_windows, T)
    targets: np.ndarray      # (n_windows,)
    target_slots: np.ndarray  # (n_windows,) absolute indices into the series

    def __len__(self) -> int:
        return len(self.targets)


def make_windows(values, window_len: int) -> WindowSet:
    """Stride-1 windows over the whole series: one per target index in [T, n)."""
    return windows_for_range(values, window_len, window_len, len(np.asarray(values)))


def windows_for_range(values, window_len: int, start: int, stop: int) -> WindowSet:
    """Windows whose targets fall in [start, stop).

    Targets near a slice boundary draw their input history from the preceding
    slice; the earliest usable target index is `window_len`.
    """
    values = np.asarray(values, dtype=np.float64)
    if window_len < 1:
        raise ValueError("window length must be >= 1")
    start = max(start, window_len)
    if not (start < stop <= len(values)):
        raise ValueError(
            f"no targets in range [{start}, {stop}) for series of length {len(values)}")
    slots = np.arange(start, stop)
    inputs = np.stack([values[i - window_len:i] for i in slots])
    return WindowSet(window_len, inputs, values[slots].copy(), slots)


@dataclass(frozen=True)
class SplitSpec:
    """Chronological head/middle/tail split: train, then validation, then test."""

    train_frac: float
    n_train: int
    n_val: int
    n_test: int

    @property
    def val_start(self) -> int:
        return self.n_train

    @property
    def test_start(self) -> int:
        return self.n_train + self.n_val


def split(n_total: int, train_frac: float) -> SplitSpec:
    """floor(frac*N) training slots, ceil(0.10*N) each for validation and test.

    Reproduces the 8928-slot reference counts: 0.8 -> (7142, 893, 893),
    0.4 -> 3571 train, 0.1 -> 892 train.
    """
    if not (0.0 < train_frac <= 0.8):
        raise ValueError("train_frac must be in (0, 0.8]")
    n_train = math.floor(train_frac * n_total)
    n_val = n_test = math.ceil(0.10 * n_total)
    if n_train < 1 or n_val < 1:
        raise ValueError(f"split of {n_total} slots leaves an empty part")
    if n_train + n_val + n_test > n_total:
        raise ValueError(
            f"split parts {n_train}+{n_val}+{n_test} exceed {n_total} slots")
    return SplitSpec(train_frac, n_train, n_val, n_test)


def gen_synthetic(days: int, slots_per_day: int = 144, seed: int = 0,
                  grid_id: int = 1, channel: str = "internet") -> ActivitySeries:
    """Deterministic synthetic traffic: a rectified two-peak diurnal pattern
    (morning and evening busy hours), a weekly swell, and Gaussian noise,
    floored at zero."""
    if days < 1:
        raise ValueError("days must be >= 1")
    rng = np.random.default_rng(seed)
    t = np.arange(days * slots_per_day)
    base = 20.0
    phase = 2 * np.pi * t / slots_per_day
    daily = 100.0 * np.maximum(0.0, np.sin(phase - 0.5) + 0.5 * np.sin(3 * phase - 0.3))
    weekly = 12.0 * np.sin(2 * np.pi * t / (7 * slots_per_day))
    noise = rng.normal(0.0, 2.0, size=t.shape)
    values = np.maximum(base + daily + weekly + noise, 0.0)
    return ActivitySeries(grid_id, channel, DEFAULT_T0_MS, values)

"""Signal preprocessing: smoothing, 1 s windowing, feature stacking,
normalization and subject-disjoint splitting of IMU gait recordings."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InvalidInput

SAMPLE_RATE_HZ = 100
FRAMES_PER_WINDOW = 100
CHANNELS = ("GX", "GY", "GZ", "AX", "AY", "AZ")
N_FEATURES = len(CHANNELS) * FRAMES_PER_WINDOW
STD_FLOOR = 1e-12


class Gender(enum.IntEnum):
    """Class label. The integer value is the output-neuron index."""

    FEMALE = 0
    MALE = 1

    @property
    def code(self) -> str:
        return "F" if self is Gender.FEMALE else "M"

    @classmethod
    def from_code(cls, code: str) -> "Gender":
        try:
            return {"F": cls.FEMALE, "M": cls.MALE}[code]
        except KeyError:
            raise InvalidInput(f"gender code must be 'F' or 'M', got {code!r}") from None


def axis_slice(axis: str | int, frame_len: int = FRAMES_PER_WINDOW) -> slice:
    """Index range of one channel inside a stacked feature vector."""
    i = CHANNELS.index(axis) if isinstance(axis, str) else int(axis)
    return slice(i * frame_len, (i + 1) * frame_len)


@dataclass
class TimeSeriesRecording:
    subject_id: str
    gender: Gender
    channels: np.ndarray  # (6, n_samples), rows in CHANNELS order
    sample_rate: int = SAMPLE_RATE_HZ

    def __post_init__(self):
        self.gender = Gender(self.gender)
        self.channels = np.asarray(self.channels, dtype=np.float64)
        if self.sample_rate != SAMPLE_RATE_HZ:
            raise InvalidInput(f"sample_rate must be {SAMPLE_RATE_HZ} Hz, got {self.sample_rate}")
        if self.channels.ndim != 2 or self.channels.shape[0] != len(CHANNELS):
            raise InvalidInput(f"expected channels of shape (6, n), got {self.channels.shape}")

    @property
    def n_samples(self) -> int:
        return self.channels.shape[1]


@dataclass(frozen=True, eq=False)
class FeatureWindow:
    features: np.ndarray
    label: Gender
    subject_id: str
    window_index: int

    @property
    def key(self) -> tuple[str, int]:
        return (self.subject_id, self.window_index)


@dataclass(frozen=True, eq=False)
class NormStats:
    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        if self.mean.shape != self.std.shape or self.mean.ndim != 1:
            raise InvalidInput("mean and std must be 1-D vectors of equal length")
        if np.any(self.std <= 0):
            raise InvalidInput("std entries must be positive")


@dataclass
class DatasetSplit:
    train: list[FeatureWindow] = field(default_factory=list)
    validation: list[FeatureWindow] = field(default_factory=list)
    test: list[FeatureWindow] = field(default_factory=list)

    def part(self, name: str) -> list[FeatureWindow]:
        if name not in ("train", "validation", "test"):
            raise InvalidInput(f"unknown split part {name!r}")
        return getattr(self, name)


def moving_average(series: Sequence[float], window: int) -> np.ndarray:
    """Trailing moving average; the first ``window - 1`` outputs average
    over the available prefix so the output has the input's length."""
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise InvalidInput("moving_average needs a non-empty 1-D series")
    if int(window) != window or window < 1:
        raise InvalidInput(f"window must be a positive integer, got {window}")
    window = int(window)
    if window == 1:
        return x.copy()
    padded = np.concatenate([np.full(window - 1, np.nan), x])
    return np.nanmean(sliding_window_view(padded, window), axis=1)


def stack_features(slices: Sequence[Sequence[float]], frame_len: int = FRAMES_PER_WINDOW) -> np.ndarray:
    if len(slices) != len(CHANNELS):
        raise InvalidInput(f"expected {len(CHANNELS)} channel slices, got {len(slices)}")
    parts = [np.asarray(s, dtype=np.float64) for s in slices]
    for name, p in zip(CHANNELS, parts):
        if p.shape != (frame_len,):
            raise InvalidInput(f"slice {name} has shape {p.shape}, expected ({frame_len},)")
    return np.concatenate(parts)


def segment_windows(
    recording: TimeSeriesRecording,
    window_len: int = FRAMES_PER_WINDOW,
    stride: int = FRAMES_PER_WINDOW,
) -> list[FeatureWindow]:
    """Cut non-padded windows at offsets 0, stride, 2*stride, ...; a trailing
    partial window is dropped."""
    if window_len < 1 or stride < 1:
        raise InvalidInput("window_len and stride must be >= 1")
    n = recording.n_samples
    windows = []
    for idx, start in enumerate(range(0, n - window_len + 1, stride)):
        chunk = recording.channels[:, start:start + window_len]
        windows.append(FeatureWindow(
            features=stack_features(list(chunk), frame_len=window_len),
            label=recording.gender,
            subject_id=recording.subject_id,
            window_index=idx,
        ))
    return windows


def extract_windows(
    recording: TimeSeriesRecording,
    filter_window: int = 10,
    window_len: int = FRAMES_PER_WINDOW,
    stride: int = FRAMES_PER_WINDOW,
) -> list[FeatureWindow]:
    """Smooth every channel of the full recording, then segment it."""
    smoothed = np.stack([moving_average(ch, filter_window) for ch in recording.channels])
    return segment_windows(replace(recording, channels=smoothed), window_len, stride)


def windows_to_arrays(windows: Sequence[FeatureWindow]) -> tuple[np.ndarray, np.ndarray]:
    X = np.stack([w.features for w in windows])
    y = np.array([int(w.label) for w in windows], dtype=np.int64)
    return X, y


def fit_normalizer(train_windows: Sequence[FeatureWindow]) -> NormStats:
    if len(train_windows) < 2:
        raise InvalidInput("fit_normalizer needs at least 2 windows")
    X, _ = windows_to_arrays(train_windows)
    mean = X.mean(axis=0)
    std = X.std(axis=0)  # population std (ddof=0)
    std[std < STD_FLOOR] = 1.0
    return NormStats(mean=mean, std=std)


def apply_normalizer(stats: NormStats, window: FeatureWindow) -> FeatureWindow:
    if window.features.shape != stats.mean.shape:
        raise InvalidInput(
            f"feature length {window.features.shape[0]} does not match stats length {stats.mean.shape[0]}")
    return replace(window, features=(window.features - stats.mean) / stats.std)


def normalize_split(stats: NormStats, split: DatasetSplit) -> DatasetSplit:
    return DatasetSplit(*[[apply_normalizer(stats, w) for w in part]
                          for part in (split.train, split.validation, split.test)])


def split_dataset(
    windows: Sequence[FeatureWindow],
    ratios: tuple[float, float, float] = (0.6, 0.2, 0.2),
    seed: int = 0,
) -> DatasetSplit:
    """Shuffle subjects (not windows) and cut by cumulative ratio.

    Every part receives at least one subject. Window order within a part
    follows the input order.
    """
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3 or min(ratios) <= 0 or abs(sum(ratios) - 1.0) > 1e-9:
        raise InvalidInput(f"ratios must be three positive numbers summing to 1, got {ratios}")
    subjects = sorted({w.subject_id for w in windows})
    n = len(subjects)
    if n < 3:
        raise InvalidInput(f"need at least 3 distinct subjects to split, got {n}")

    order = np.random.default_rng(seed).permutation(n)
    shuffled = [subjects[i] for i in order]
    b1 = min(max(round(ratios[0] * n), 1), n - 2)
    b2 = min(max(round((ratios[0] + ratios[1]) * n), b1 + 1), n - 1)
    part_of = {s: 0 for s in shuffled[:b1]}
    part_of.update({s: 1 for s in shuffled[b1:b2]})
    part_of.update({s: 2 for s in shuffled[b2:]})

    split = DatasetSplit()
    parts = (split.train, split.validation, split.test)
    for w in windows:
        parts[part_of[w.subject_id]].append(w)
    return split

"""Synthetic 6-axis gait recordings with a controllable gender effect.

Each channel is a three-harmonic sinusoid at the subject's stride
frequency plus white noise. Female recordings get their amplitude scaled
by ``1 + effect_size`` on ``effect_channels`` and their stride frequency
shifted by ``freq_effect``; nothing else depends on gender.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidInput
from .signals import CHANNELS, SAMPLE_RATE_HZ, Gender, TimeSeriesRecording

N_HARMONICS = 3
FREQ_JITTER_HZ = 0.05
TEMPLATE_SEED = 20220101
# GX, GY, GZ in rad/s; AX, AY, AZ in g (gravity-free)
DEFAULT_AMPLITUDES = (0.5, 0.3, 0.4, 0.2, 1.0, 0.3)


@dataclass(frozen=True)
class GaitGenConfig:
    n_subjects: int = 200
    duration_s: float = 10.0
    stride_freq_hz: float = 1.0
    base_amplitudes: tuple[float, ...] = DEFAULT_AMPLITUDES
    effect_channels: frozenset[str] = frozenset({"AX"})
    effect_size: float = 0.3
    freq_effect: float = -0.05
    noise_std: float = 0.05
    phase_spread: float = 0.2
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "effect_channels", frozenset(self.effect_channels))
        object.__setattr__(self, "base_amplitudes", tuple(float(a) for a in self.base_amplitudes))
        if self.n_subjects < 2:
            raise InvalidInput("n_subjects must be >= 2 so that both genders are represented")
        if self.duration_s < 1:
            raise InvalidInput("duration_s must be >= 1")
        if self.noise_std < 0 or self.effect_size < 0 or self.phase_spread < 0:
            raise InvalidInput("noise_std, effect_size and phase_spread must be non-negative")
        if len(self.base_amplitudes) != len(CHANNELS):
            raise InvalidInput("base_amplitudes needs one entry per channel")
        unknown = self.effect_channels - set(CHANNELS)
        if unknown:
            raise InvalidInput(f"unknown effect channels: {sorted(unknown)}")

    @property
    def n_samples(self) -> int:
        return int(round(self.duration_s * SAMPLE_RATE_HZ))


class SubjectParams(NamedTuple):
    stride_freq_hz: float
    amplitudes: np.ndarray  # (6, N_HARMONICS)
    phases: np.ndarray  # (6, N_HARMONICS)


def phase_template() -> np.ndarray:
    """Population waveform shape: phase of each (channel, harmonic) relative
    to the start of a gait cycle."""
    return np.random.default_rng(TEMPLATE_SEED).uniform(0.0, 2 * np.pi, size=(len(CHANNELS), N_HARMONICS))


def subject_params(cfg: GaitGenConfig, gender: Gender, rng: np.random.Generator) -> SubjectParams:
    """Per-subject frequency, amplitudes and phases.

    Channels share one gait cycle, so phases are the population template
    shifted by a uniformly drawn cycle offset (``h * theta`` for harmonic
    ``h``) plus a Gaussian per-subject deviation of std ``phase_spread``.
    """
    female = Gender(gender) is Gender.FEMALE
    harmonics = np.arange(1, N_HARMONICS + 1)
    jitter = rng.uniform(-FREQ_JITTER_HZ, FREQ_JITTER_HZ)
    theta = rng.uniform(0.0, 2 * np.pi)
    deviation = rng.normal(0.0, 1.0, size=(len(CHANNELS), N_HARMONICS)) * cfg.phase_spread
    phases = np.mod(phase_template() + harmonics[None, :] * theta + deviation, 2 * np.pi)
    amps = np.array(cfg.base_amplitudes)[:, None] / harmonics[None, :]
    if female:
        for c in cfg.effect_channels:
            amps[CHANNELS.index(c)] *= 1.0 + cfg.effect_size
    f = cfg.stride_freq_hz + (cfg.freq_effect if female else 0.0) + jitter
    return SubjectParams(f, amps, phases)


def generate_subject(cfg: GaitGenConfig, gender: Gender, subject_seed: int,
                     subject_id: str | None = None) -> TimeSeriesRecording:
    # draw order is gender-independent so equal seeds share phases and noise
    rng = np.random.default_rng(subject_seed)
    params = subject_params(cfg, gender, rng)
    noise = rng.normal(0.0, 1.0, size=(len(CHANNELS), cfg.n_samples)) * cfg.noise_std

    t = np.arange(cfg.n_samples) / SAMPLE_RATE_HZ
    h = np.arange(1, N_HARMONICS + 1)
    arg = 2 * np.pi * params.stride_freq_hz * h[None, :, None] * t[None, None, :] + params.phases[:, :, None]
    signal = np.sum(params.amplitudes[:, :, None] * np.sin(arg), axis=1)
    return TimeSeriesRecording(
        subject_id=subject_id or f"subj-{subject_seed}",
        gender=Gender(gender),
        channels=signal + noise,
    )


def subject_seed(base_seed: int, index: int) -> int:
    return int(np.random.SeedSequence([base_seed, index]).generate_state(1, np.uint64)[0])


def generate_dataset(cfg: GaitGenConfig) -> list[TimeSeriesRecording]:
    """``n_subjects`` recordings with alternating genders, Female first."""
    return [
        generate_subject(cfg, Gender.FEMALE if i % 2 == 0 else Gender.MALE,
                         subject_seed(cfg.seed, i), subject_id=f"S{i:04d}")
        for i in range(cfg.n_subjects)
    ]

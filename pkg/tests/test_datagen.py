import numpy as np
import pytest

from gaitrel.datagen import GaitGenConfig, generate_dataset, generate_subject, subject_params
from gaitrel.errors import InvalidInput
from gaitrel.signals import CHANNELS, Gender


def test_no_gender_terms_means_identical_recordings():
    cfg = GaitGenConfig(noise_std=0.0, effect_size=0.0, freq_effect=0.0)
    f = generate_subject(cfg, Gender.FEMALE, 42)
    m = generate_subject(cfg, Gender.MALE, 42)
    np.testing.assert_array_equal(f.channels, m.channels)


def test_null_config_identical_even_with_noise():
    cfg = GaitGenConfig(effect_size=0.0, freq_effect=0.0)
    np.testing.assert_array_equal(generate_subject(cfg, Gender.FEMALE, 5).channels,
                                  generate_subject(cfg, Gender.MALE, 5).channels)


def test_deterministic():
    cfg = GaitGenConfig(n_subjects=4, seed=3)
    a, b = generate_dataset(cfg), generate_dataset(cfg)
    for ra, rb in zip(a, b):
        assert ra.channels.tobytes() == rb.channels.tobytes()


@pytest.mark.parametrize("gender", list(Gender))
def test_noise_free_signal_is_periodic(gender):
    cfg = GaitGenConfig(noise_std=0.0, duration_s=10)
    seed = 99
    f = subject_params(cfg, gender, np.random.default_rng(seed)).stride_freq_hz
    rec = generate_subject(cfg, gender, seed)
    expected_lag = round(100 / f)
    for ch in rec.channels:
        x = ch - ch.mean()
        lags = np.arange(50, 151)
        ac = [np.dot(x[:-k], x[k:]) / np.dot(x[:-k], x[:-k]) for k in lags]
        assert lags[int(np.argmax(ac))] == expected_lag


def test_balanced_genders_and_shapes():
    recs = generate_dataset(GaitGenConfig(n_subjects=10, duration_s=2))
    assert sum(r.gender is Gender.FEMALE for r in recs) == 5
    assert all(r.channels.shape == (6, 200) for r in recs)
    assert len({r.subject_id for r in recs}) == 10


def test_odd_subject_count_balance():
    recs = generate_dataset(GaitGenConfig(n_subjects=7, duration_s=1))
    assert abs(sum(r.gender is Gender.FEMALE for r in recs) * 2 - 7) == 1


def test_effect_confined_to_effect_channels():
    cfg = GaitGenConfig(freq_effect=0.0)
    f = subject_params(cfg, Gender.FEMALE, np.random.default_rng(1))
    m = subject_params(cfg, Gender.MALE, np.random.default_rng(1))
    ratio = f.amplitudes / m.amplitudes
    for i, c in enumerate(CHANNELS):
        np.testing.assert_allclose(ratio[i], 1.3 if c == "AX" else 1.0)
    assert f.stride_freq_hz == m.stride_freq_hz


def test_frequency_effect():
    cfg = GaitGenConfig(freq_effect=-0.05)
    f = subject_params(cfg, Gender.FEMALE, np.random.default_rng(1)).stride_freq_hz
    m = subject_params(cfg, Gender.MALE, np.random.default_rng(1)).stride_freq_hz
    assert f - m == pytest.approx(-0.05)


def test_planted_amplitude_gap_statistics():
    recs = generate_dataset(GaitGenConfig(n_subjects=200, effect_size=0.3, noise_std=0.05, seed=4))
    rms = np.array([np.sqrt(np.mean(r.channels ** 2, axis=1)) for r in recs])
    female = np.array([r.gender is Gender.FEMALE for r in recs])

    def z(col):
        a, b = rms[female, col], rms[~female, col]
        se = np.sqrt(a.var(ddof=1) / len(a) + b.var(ddof=1) / len(b))
        return abs(a.mean() - b.mean()) / se

    assert z(CHANNELS.index("AX")) > 5
    assert z(CHANNELS.index("GX")) < 2


@pytest.mark.parametrize("kw", [dict(n_subjects=1), dict(duration_s=0.5), dict(noise_std=-1),
                                dict(effect_size=-0.1), dict(effect_channels={"QX"})])
def test_invalid_config(kw):
    with pytest.raises(InvalidInput):
        GaitGenConfig(**kw)

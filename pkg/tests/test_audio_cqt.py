import numpy as np
import pytest
import soundfile as sf

from app.exceptions import AudioFormatError, AudioIOError, CqtConfigError, StandardizerError
from app.models.audio import AudioBuffer, CqtConfig, CqtMatrix
from app.utils.audio_cqt import (
    apply_standardizer, compute_cqt, context_window, cqt_frequencies, fit_standardizer,
    fit_standardizer_chunks, load_wav, write_wav,
)

SR = 22050
CONFIG = CqtConfig()


def tone(frequency, seconds=2.0, sample_rate=SR, amplitude=0.5):
    t = np.arange(int(seconds * sample_rate)) / sample_rate
    return AudioBuffer(samples=amplitude * np.sin(2 * np.pi * frequency * t), sample_rate=sample_rate)


def oracle_cqt(samples, sample_rate, config):
    """Direct windowed projection of every frame onto every bin frequency"""
    q = 1.0 / (2.0 ** (1.0 / config.bins_per_octave) - 1.0)
    n_frames = len(samples) // config.hop + 1
    out = np.zeros((n_frames, config.n_bins))
    for k in range(config.n_bins):
        f = config.f_min * 2.0 ** (k / config.bins_per_octave)
        length = int(round(q * sample_rate / f))
        m = np.arange(length)
        window = 0.5 - 0.5 * np.cos(2 * np.pi * m / (length - 1))
        basis = window * np.exp(-2j * np.pi * f * (m - length // 2) / sample_rate)
        for n in range(n_frames):
            idx = n * config.hop - length // 2 + m
            valid = (idx >= 0) & (idx < len(samples))
            segment = np.zeros(length)
            segment[valid] = samples[idx[valid]]
            out[n, k] = abs(np.sum(segment * basis)) / window.sum()
    return out


@pytest.mark.parametrize("seed", range(10))
def test_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    audio = AudioBuffer(samples=rng.uniform(-1, 1, SR), sample_rate=SR)
    cqt = compute_cqt(audio, CONFIG)
    np.testing.assert_allclose(cqt.frames, oracle_cqt(audio.samples, SR, CONFIG), rtol=1e-9, atol=1e-14)


def test_a440_peaks_at_bin_90():
    cqt = compute_cqt(tone(440.0, sample_rate=44100), CONFIG)
    assert cqt.n_frames == 2 * 44100 // 4096 + 1
    assert np.all(np.argmax(cqt.frames, axis=1) == 90)


def test_f_min_tone_peaks_at_bin_0():
    audio = tone(CONFIG.f_min)
    cqt = compute_cqt(audio, CONFIG)
    half = int(round(CONFIG.quality_factor * SR / CONFIG.f_min)) // 2
    interior = [n for n in range(cqt.n_frames) if half <= n * CONFIG.hop < len(audio.samples) - half]
    assert interior
    assert np.all(np.argmax(cqt.frames[interior], axis=1) == 0)


def test_bin_centre_tones_peak_at_their_bin():
    rng = np.random.default_rng(7)
    frequencies = cqt_frequencies(CONFIG)
    for k in rng.integers(24, CONFIG.n_bins, size=10):
        cqt = compute_cqt(tone(frequencies[k]), CONFIG)
        assert np.all(np.argmax(cqt.frames[3:-3], axis=1) == k)


def test_silence_gives_zero_matrix():
    cqt = compute_cqt(AudioBuffer(samples=np.zeros(SR), sample_rate=SR), CONFIG)
    assert cqt.frames.shape == (SR // CONFIG.hop + 1, 192)
    assert not cqt.frames.any()


def test_homogeneity():
    rng = np.random.default_rng(3)
    samples = rng.uniform(-0.5, 0.5, SR)
    base = compute_cqt(AudioBuffer(samples=samples, sample_rate=SR), CONFIG).frames
    scaled = compute_cqt(AudioBuffer(samples=3.5 * samples, sample_rate=SR), CONFIG).frames
    np.testing.assert_allclose(scaled, 3.5 * base, rtol=1e-9, atol=1e-14)


def test_frame_times_spacing():
    cqt = compute_cqt(tone(220.0), CONFIG)
    assert np.allclose(np.diff(cqt.frame_times), CONFIG.hop / SR, rtol=0, atol=1e-12)
    assert cqt.frame_times[0] == 0.0


def test_nyquist_violation():
    with pytest.raises(CqtConfigError):
        compute_cqt(AudioBuffer(samples=np.zeros(16000), sample_rate=16000), CONFIG)


def constant_matrix(n_frames, values):
    return CqtMatrix(
        frames=np.tile(values, (n_frames, 1)),
        frame_times=np.arange(n_frames) * CONFIG.hop / SR,
        sample_rate=SR,
        config=CONFIG,
    )


def test_context_window_padding():
    values = np.arange(1, 193, dtype=float)
    matrix = constant_matrix(100, values)
    first = context_window(matrix, 0, radius=7)
    assert first.shape == (2880,)
    assert not first[:7 * 192].any()
    assert np.array_equal(first[7 * 192:], np.tile(values, 8))
    last = context_window(matrix, 99, radius=7)
    assert not last[-7 * 192:].any()
    assert np.array_equal(context_window(matrix, 50, radius=7), np.tile(values, 15))


@pytest.mark.parametrize("frame", [-1, 100])
def test_context_window_out_of_range(frame):
    with pytest.raises(IndexError):
        context_window(constant_matrix(100, np.ones(192)), frame, radius=7)


def test_standardizer_identical_vectors():
    features = np.tile(np.linspace(0, 2, 12), (5, 1))
    stats = fit_standardizer(features)
    assert np.array_equal(stats.scale, np.ones(12))
    assert np.allclose(apply_standardizer(stats, features), 0.0, atol=1e-12)


def test_standardizer_moments(rng):
    features = rng.gamma(2.0, 1.5, size=(400, 30))
    standardized = apply_standardizer(fit_standardizer(features), features)
    assert np.all(np.abs(standardized.mean(axis=0)) < 1e-9)
    assert np.all(np.abs(standardized.var(axis=0) - 1.0) < 1e-6)


def test_chunked_fit_matches_single_pass(rng):
    features = rng.gamma(2.0, 1.5, size=(300, 8))
    whole = fit_standardizer(features)
    chunked = fit_standardizer_chunks(lambda: (features[i:i + 64] for i in range(0, 300, 64)))
    np.testing.assert_allclose(chunked.mean, whole.mean, rtol=1e-12)
    np.testing.assert_allclose(chunked.scale, whole.scale, rtol=1e-12)


def test_empty_standardizer():
    with pytest.raises(StandardizerError):
        fit_standardizer(np.zeros((0, 4)))


def test_load_pcm16_mono(tmp_path):
    path = tmp_path / "mono.wav"
    sf.write(str(path), np.zeros(44100, dtype=np.int16), 44100, subtype="PCM_16")
    audio = load_wav(path)
    assert audio.sample_rate == 44100
    assert len(audio.samples) == 44100


def test_pcm16_scaling(tmp_path):
    path = tmp_path / "scale.wav"
    sf.write(str(path), np.array([16384, -32768, 0], dtype=np.int16), 8000, subtype="PCM_16")
    assert np.array_equal(load_wav(path).samples, [0.5, -1.0, 0.0])


def test_stereo_downmix(tmp_path):
    path = tmp_path / "stereo.wav"
    data = np.tile([0.5, -0.5], (1000, 1)).astype(np.float32)
    sf.write(str(path), data, 22050, subtype="FLOAT")
    assert not load_wav(path).samples.any()


def test_write_then_load(tmp_path):
    audio = tone(330.0, seconds=0.25)
    write_wav(tmp_path / "out.wav", audio, subtype="FLOAT")
    np.testing.assert_allclose(load_wav(tmp_path / "out.wav").samples, audio.samples, atol=1e-7)


def test_eight_bit_is_rejected(tmp_path):
    path = tmp_path / "u8.wav"
    sf.write(str(path), np.zeros(100), 8000, subtype="PCM_U8")
    with pytest.raises(AudioFormatError):
        load_wav(path)


def test_truncated_and_missing_files(tmp_path):
    path = tmp_path / "full.wav"
    sf.write(str(path), np.zeros(1000), 8000, subtype="PCM_16")
    truncated = tmp_path / "cut.wav"
    truncated.write_bytes(path.read_bytes()[:20])
    with pytest.raises(AudioIOError):
        load_wav(truncated)
    with pytest.raises(AudioIOError):
        load_wav(tmp_path / "missing.wav")

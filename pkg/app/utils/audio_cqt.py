"""WAV loading, constant-Q magnitudes and the context windows fed to the network.

The transform is evaluated directly: for every bin a Hann-windowed complex
exponential at the bin's centre frequency is projected onto the signal segment
centred on each frame. Frames sit at multiples of the hop and the signal is
zero-padded so edge frames are defined.
"""
import logging
from functools import lru_cache
from pathlib import Path
from typing import Callable, Iterable, Optional, Tuple

import numpy as np
import soundfile as sf
from numpy.lib.stride_tricks import sliding_window_view

from app.config import settings
from app.exceptions import AudioFormatError, AudioIOError, StandardizerError
from app.models.audio import AudioBuffer, CqtConfig, CqtMatrix, StandardizerStats
from app.utils.time_utils import frame_count, frame_times

logger = logging.getLogger(__name__)

SUPPORTED_SUBTYPES = ("PCM_16", "FLOAT")
SUPPORTED_FORMATS = ("WAV", "WAVEX")
SCALE_FLOOR = 1e-12


def load_wav(path) -> AudioBuffer:
    """Read a 16-bit PCM or 32-bit float WAV file, downmixing stereo to mono"""
    path = Path(path)
    if not path.is_file():
        raise AudioIOError(f"audio file not found: {path}")
    try:
        info = sf.info(str(path))
    except RuntimeError as e:
        logger.error(f"Cannot open audio file {path}: {e}")
        raise AudioIOError(f"cannot read {path}: {e}") from e

    if info.format not in SUPPORTED_FORMATS:
        raise AudioFormatError(f"{path}: unsupported container {info.format}")
    if info.subtype not in SUPPORTED_SUBTYPES:
        raise AudioFormatError(f"{path}: unsupported sample format {info.subtype}")
    if info.channels not in (1, 2):
        raise AudioFormatError(f"{path}: {info.channels} channels, expected mono or stereo")

    try:
        data, sample_rate = sf.read(str(path), dtype="float64", always_2d=True)
    except RuntimeError as e:
        logger.error(f"Cannot decode audio file {path}: {e}")
        raise AudioIOError(f"cannot decode {path}: {e}") from e
    if data.shape[0] < info.frames:
        raise AudioIOError(f"{path}: truncated, read {data.shape[0]} of {info.frames} frames")

    return AudioBuffer(samples=data.mean(axis=1), sample_rate=sample_rate)


def write_wav(path, audio: AudioBuffer, subtype: str = "PCM_16") -> None:
    if subtype not in SUPPORTED_SUBTYPES:
        raise AudioFormatError(f"unsupported sample format {subtype}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    sf.write(str(path), audio.samples, audio.sample_rate, subtype=subtype, format="WAV")


def cqt_frequencies(config: CqtConfig) -> np.ndarray:
    return config.f_min * 2.0 ** (np.arange(config.n_bins) / config.bins_per_octave)


def window_lengths(sample_rate: int, config: CqtConfig) -> np.ndarray:
    lengths = np.round(config.quality_factor * sample_rate / cqt_frequencies(config))
    return np.maximum(lengths.astype(int), 1)


@lru_cache(maxsize=8)
def cqt_kernels(sample_rate: int, config: CqtConfig) -> Tuple[np.ndarray, ...]:
    """Per-bin complex kernels normalised by the window's coherent gain"""
    kernels = []
    for frequency, length in zip(cqt_frequencies(config), window_lengths(sample_rate, config)):
        window = np.hanning(length)
        offsets = np.arange(length) - length // 2
        kernel = window * np.exp(-2j * np.pi * frequency * offsets / sample_rate) / window.sum()
        kernel.setflags(write=False)
        kernels.append(kernel)
    return tuple(kernels)


def compute_cqt(audio: AudioBuffer, config: Optional[CqtConfig] = None) -> CqtMatrix:
    config = config or CqtConfig.from_settings()
    sample_rate = audio.sample_rate
    config.check_nyquist(sample_rate)

    kernels = cqt_kernels(sample_rate, config)
    n_frames = frame_count(len(audio.samples), config.hop)
    pad = max(len(kernel) for kernel in kernels) // 2 + 1
    padded = np.pad(audio.samples, (pad, pad))

    magnitudes = np.empty((n_frames, config.n_bins))
    for k, kernel in enumerate(kernels):
        length = len(kernel)
        first = pad - length // 2
        # frame n's segment starts at first + n * hop; a strided view avoids copying
        segments = sliding_window_view(padded, length)[first::config.hop][:n_frames]
        magnitudes[:, k] = np.abs(segments @ kernel)

    return CqtMatrix(
        frames=magnitudes,
        frame_times=frame_times(n_frames, config.hop, sample_rate),
        sample_rate=sample_rate,
        config=config,
    )


def context_windows(frames: np.ndarray, indices, radius: Optional[int] = None) -> np.ndarray:
    """Flattened (2 * radius + 1)-frame windows around each index, zero-padded"""
    radius = settings.context_radius if radius is None else radius
    frames = np.asarray(frames, dtype=np.float64)
    indices = np.asarray(indices, dtype=int)
    n_frames, n_bins = frames.shape
    if indices.size and (indices.min() < 0 or indices.max() >= n_frames):
        raise IndexError(f"frame index out of range [0, {n_frames})")
    padded = np.pad(frames, ((radius, radius), (0, 0)))
    windows = sliding_window_view(padded, (2 * radius + 1, n_bins))[:, 0]
    return windows[indices].reshape(len(indices), -1)


def context_window(matrix: CqtMatrix, frame: int, radius: Optional[int] = None) -> np.ndarray:
    if not 0 <= frame < matrix.n_frames:
        raise IndexError(f"frame {frame} out of range [0, {matrix.n_frames})")
    return context_windows(matrix.frames, [frame], radius)[0]


def fit_standardizer(features) -> StandardizerStats:
    array = np.asarray(features, dtype=np.float64)
    if array.size == 0:
        raise StandardizerError("cannot fit a standardizer on an empty feature set")
    if array.ndim == 1:
        array = array[np.newaxis, :]
    return fit_standardizer_chunks(lambda: [array])


def fit_standardizer_chunks(make_chunks: Callable[[], Iterable[np.ndarray]]) -> StandardizerStats:
    """Two-pass fit over feature chunks; ``make_chunks`` is called once per pass"""
    count = 0
    total = None
    for chunk in make_chunks():
        logs = np.log1p(chunk)
        total = logs.sum(axis=0) if total is None else total + logs.sum(axis=0)
        count += logs.shape[0]
    if count == 0:
        raise StandardizerError("cannot fit a standardizer on an empty feature set")
    mean = total / count

    squares = np.zeros_like(mean)
    for chunk in make_chunks():
        squares += ((np.log1p(chunk) - mean) ** 2).sum(axis=0)
    std = np.sqrt(squares / count)
    scale = np.where(std < SCALE_FLOOR, 1.0, std)
    return StandardizerStats(mean=mean, scale=scale)


def apply_standardizer(stats: StandardizerStats, features) -> np.ndarray:
    array = np.asarray(features, dtype=np.float64)
    if array.shape[-1] != stats.dimension:
        raise StandardizerError(
            f"feature dimension {array.shape[-1]} does not match standardizer {stats.dimension}"
        )
    return (np.log1p(array) - stats.mean) / stats.scale

import numpy as np


def frame_count(n_samples: int, hop: int) -> int:
    """Number of hop-spaced frames covering a signal, edges included"""
    return n_samples // hop + 1


def frame_times(n_frames: int, hop: int, sample_rate: int) -> np.ndarray:
    """Centre time in seconds of each frame"""
    return np.arange(n_frames) * hop / sample_rate


def frame_duration(hop: int, sample_rate: int) -> float:
    return hop / sample_rate


def format_seconds(seconds: float) -> str:
    """Format a time for LAB output"""
    return f"{seconds:.6f}"

"""Vocabulary-restricted chord decoding from predicted SHIPs."""
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.config import settings
from app.exceptions import DecodeError
from app.models.annotations import Segment, Vocabulary
from app.models.chords import ChordLabel
from app.models.decoding import DecodeResult, PersonalizedSequence, ScoredLabel
from app.models.profiles import HIP_SIZE, Ship
from app.utils.hip_encoding import hip_indices
from app.utils.time_utils import frame_duration as hop_duration

logger = logging.getLogger(__name__)

GAP_FACTOR = 1.5


def combined_probability(label: ChordLabel, ship: Ship) -> float:
    """Product of the SHIP entries where the label's HIP has ones"""
    root, third, seventh = hip_indices(label)
    values = ship.values
    return float(values[root] * values[third] * values[seventh])


def _index_matrix(vocabulary: Vocabulary) -> np.ndarray:
    return np.array([hip_indices(label) for label in vocabulary], dtype=int)


def _check_vocabulary(vocabulary: Optional[Vocabulary]) -> None:
    if vocabulary is None or len(vocabulary) == 0:
        raise DecodeError("cannot decode with an empty vocabulary")


def _normalize(cp: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Row-wise CP normalization; rows summing to zero become uniform"""
    totals = cp.sum(axis=1, keepdims=True)
    fallback = totals[:, 0] <= 0.0
    safe = np.where(totals > 0.0, totals, 1.0)
    probabilities = cp / safe
    probabilities[fallback] = 1.0 / cp.shape[1]
    return probabilities, fallback


def decode(ship: Ship, vocabulary: Vocabulary) -> DecodeResult:
    _check_vocabulary(vocabulary)
    indices = _index_matrix(vocabulary)
    cp = np.prod(ship.values[indices], axis=1)
    probabilities, fallback = _normalize(cp[np.newaxis, :])
    if fallback[0]:
        logger.warning("Every vocabulary label has zero combined probability, using a uniform distribution")

    # vocabulary order is lexicographic, so a stable sort keeps the tie-break
    order = np.argsort(-probabilities[0], kind="stable")
    ranking = [
        ScoredLabel(
            label=vocabulary.labels[i],
            combined_probability=float(cp[i]),
            probability=float(probabilities[0, i]),
        )
        for i in order
    ]
    return DecodeResult(ranking=ranking, uniform_fallback=bool(fallback[0]))


def decode_frames(ships: np.ndarray, vocabulary: Vocabulary) -> Tuple[List[ChordLabel], np.ndarray]:
    """Chosen label per row of a frames x 19 SHIP matrix, plus the fallback mask"""
    _check_vocabulary(vocabulary)
    ships = np.asarray(ships, dtype=np.float64)
    if ships.ndim != 2 or ships.shape[1] != HIP_SIZE:
        raise DecodeError(f"expected a frames x {HIP_SIZE} matrix, got shape {ships.shape}")
    indices = _index_matrix(vocabulary)
    cp = np.prod(ships[:, indices], axis=2)
    probabilities, fallback = _normalize(cp)
    # argmax returns the first maximum, which is the lexicographically first label
    chosen = np.argmax(probabilities, axis=1)
    labels = [vocabulary.labels[i] for i in chosen]
    return labels, fallback


def _as_ship_matrix(ships) -> np.ndarray:
    if isinstance(ships, np.ndarray):
        return ships
    rows = [ship.values if isinstance(ship, Ship) else ship for ship in ships]
    return np.array(rows, dtype=np.float64).reshape(-1, HIP_SIZE)


def personalize_sequence(
    ships,
    vocabulary: Vocabulary,
    frame_times: Sequence[float],
    frame_duration: Optional[float] = None,
) -> PersonalizedSequence:
    """Decode every frame and merge runs of equal labels into timed segments

    The first segment starts at 0 and boundaries between consecutive frames
    fall on their midpoints. Frames further apart than 1.5 frame durations
    start a new segment. Without an explicit duration the smallest frame step
    is used, or the configured hop for a single frame.
    """
    matrix = _as_ship_matrix(ships)
    times = np.asarray(frame_times, dtype=np.float64)
    if len(matrix) != len(times):
        raise DecodeError(f"{len(matrix)} SHIPs but {len(times)} frame times")
    if len(times) == 0:
        return PersonalizedSequence(segments=())
    if np.any(np.diff(times) <= 0):
        raise DecodeError("frame times must be strictly increasing")
    if frame_duration is None:
        if len(times) > 1:
            frame_duration = float(np.min(np.diff(times)))
        else:
            frame_duration = hop_duration(settings.hop_length, settings.synth_sample_rate)

    labels, fallback = decode_frames(matrix, vocabulary)
    half = frame_duration / 2.0
    segments = []
    start = 0.0
    current = labels[0]
    for i in range(1, len(times)):
        gap = times[i] - times[i - 1]
        if gap > GAP_FACTOR * frame_duration:
            segments.append(Segment(start=start, end=times[i - 1] + half, label=current))
            start, current = times[i] - half, labels[i]
        elif labels[i] != current:
            boundary = (times[i - 1] + times[i]) / 2.0
            segments.append(Segment(start=start, end=boundary, label=current))
            start, current = boundary, labels[i]
    segments.append(Segment(start=start, end=times[-1] + half, label=current))

    flagged = int(np.count_nonzero(fallback))
    if flagged:
        logger.warning(f"{flagged} frames fell back to a uniform distribution")
    return PersonalizedSequence(segments=tuple(segments), flagged_frames=flagged)

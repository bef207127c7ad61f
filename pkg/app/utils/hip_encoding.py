"""Harmonic interval profiles (HIP) and their per-frame averages (SHIP)."""
from functools import lru_cache
from typing import Sequence, Tuple

import numpy as np

from app.exceptions import ShipError
from app.models.chords import ChordLabel, SeventhClass, ThirdClass
from app.models.profiles import HIP_SIZE, NO_CHORD_INDEX, Hip, Ship
from app.utils.chord_syntax import seventh_class, third_class

_THIRD_OFFSET = {ThirdClass.SHARP3: 13, ThirdClass.FLAT3: 14, ThirdClass.STAR3: 15}
_SEVENTH_OFFSET = {SeventhClass.SHARP7: 16, SeventhClass.FLAT7: 17, SeventhClass.STAR7: 18}


@lru_cache(maxsize=4096)
def hip_indices(label: ChordLabel) -> Tuple[int, int, int]:
    """Positions of the three ones in the label's HIP"""
    root_index = NO_CHORD_INDEX if label.is_no_chord else label.root
    return root_index, _THIRD_OFFSET[third_class(label)], _SEVENTH_OFFSET[seventh_class(label)]


def hip_vector(label: ChordLabel) -> np.ndarray:
    vector = np.zeros(HIP_SIZE)
    vector[list(hip_indices(label))] = 1.0
    return vector


def encode_hip(label: ChordLabel) -> Hip:
    return Hip(values=hip_vector(label))


def encode_ship(labels: Sequence[ChordLabel]) -> Ship:
    """Equal-weight mean of the HIPs, one entry per label occurrence"""
    if not labels:
        raise ShipError("cannot build a SHIP from an empty label list")
    return Ship(values=ship_matrix([list(labels)])[0])


def ship_matrix(label_rows: Sequence[Sequence[ChordLabel]]) -> np.ndarray:
    """SHIP targets for many frames at once; each row holds one frame's labels"""
    targets = np.zeros((len(label_rows), HIP_SIZE))
    for row_index, labels in enumerate(label_rows):
        if not labels:
            raise ShipError(f"frame {row_index} has no labels")
        for label in labels:
            targets[row_index, list(hip_indices(label))] += 1.0
        targets[row_index] /= len(labels)
    return targets


def hip_matrix(labels: Sequence[ChordLabel]) -> np.ndarray:
    """One HIP row per label"""
    matrix = np.zeros((len(labels), HIP_SIZE))
    if labels:
        indices = np.array([hip_indices(label) for label in labels])
        matrix[np.arange(len(labels))[:, None], indices] = 1.0
    return matrix

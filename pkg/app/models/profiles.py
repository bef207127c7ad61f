from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

HIP_SIZE = 19
ROOT_SLICE = slice(0, 13)
THIRD_SLICE = slice(13, 16)
SEVENTH_SLICE = slice(16, 19)
SEGMENTS = (ROOT_SLICE, THIRD_SLICE, SEVENTH_SLICE)
NO_CHORD_INDEX = 12

COLUMN_NAMES = (
    "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B", "N",
    "sharp3", "flat3", "star3", "sharp7", "flat7", "star7",
)

SEGMENT_TOLERANCE = 1e-9


def _as_profile_vector(value) -> np.ndarray:
    array = np.array(value, dtype=np.float64)
    if array.shape != (HIP_SIZE,):
        raise ValueError(f"profile must have {HIP_SIZE} entries, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ValueError("profile entries must be finite")
    array.setflags(write=False)
    return array


def segment_sums(values: np.ndarray) -> List[float]:
    return [float(values[segment].sum()) for segment in SEGMENTS]


class Hip(BaseModel):
    """Harmonic interval profile: one-hot root, third and seventh segments"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def check_one_hot(cls, value) -> np.ndarray:
        array = _as_profile_vector(value)
        for segment in SEGMENTS:
            part = array[segment]
            if np.count_nonzero(part == 1.0) != 1 or np.count_nonzero(part) != 1:
                raise ValueError("each HIP segment must contain exactly one 1")
        return array

    def __eq__(self, other) -> bool:
        if not isinstance(other, (Hip, Ship)):
            return NotImplemented
        return bool(np.array_equal(self.values, other.values))

    __hash__ = None


class Ship(BaseModel):
    """Shared harmonic interval profile: a distribution per segment"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def check_distribution(cls, value) -> np.ndarray:
        array = _as_profile_vector(value)
        if np.any(array < 0.0) or np.any(array > 1.0):
            raise ValueError("SHIP entries must lie in [0, 1]")
        for total in segment_sums(array):
            if abs(total - 1.0) > SEGMENT_TOLERANCE:
                raise ValueError(f"SHIP segment sums to {total}, expected 1")
        return array

    def to_text(self) -> str:
        """Canonical serialization: 19 decimals in column order"""
        return " ".join(repr(float(v)) for v in self.values)

    @classmethod
    def from_text(cls, text: str) -> "Ship":
        return cls(values=[float(token) for token in text.split()])

    def __eq__(self, other) -> bool:
        if not isinstance(other, (Hip, Ship)):
            return NotImplemented
        return bool(np.array_equal(self.values, other.values))

    __hash__ = None

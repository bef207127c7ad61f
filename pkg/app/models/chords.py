from enum import Enum
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

NOTE_NAMES = ("C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B")
NO_CHORD_TEXT = "N"


class Quality(str, Enum):
    MAJ = "maj"
    MIN = "min"
    MAJ7 = "maj7"
    MIN7 = "min7"
    DOM7 = "7"
    MINMAJ7 = "minmaj7"
    DIM = "dim"
    AUG = "aug"
    SUS2 = "sus2"
    SUS4 = "sus4"
    DIM7 = "dim7"
    HDIM7 = "hdim7"
    MAJ6 = "maj6"
    MIN6 = "min6"


class ThirdClass(str, Enum):
    SHARP3 = "sharp3"  # major third
    FLAT3 = "flat3"    # minor third
    STAR3 = "star3"    # no third


class SeventhClass(str, Enum):
    SHARP7 = "sharp7"
    FLAT7 = "flat7"
    STAR7 = "star7"


class ChordLabel(BaseModel):
    """Parsed chord symbol. ``root is None`` is the no-chord label."""

    model_config = ConfigDict(frozen=True)

    root: Optional[int] = None
    quality: Optional[Quality] = None
    extensions: Tuple[str, ...] = ()

    @field_validator("extensions", mode="after")
    @classmethod
    def canonical_extensions(cls, value: Tuple[str, ...]) -> Tuple[str, ...]:
        return tuple(sorted(set(value)))

    @model_validator(mode="after")
    def check_consistency(self) -> "ChordLabel":
        if self.root is None:
            if self.quality is not None or self.extensions:
                raise ValueError("the no-chord label carries no quality or extensions")
        else:
            if not 0 <= self.root <= 11:
                raise ValueError(f"root pitch class out of range: {self.root}")
            if self.quality is None:
                raise ValueError("a chord with a root needs a quality")
        return self

    @property
    def is_no_chord(self) -> bool:
        return self.root is None

    @property
    def text(self) -> str:
        """Canonical text, e.g. ``G:maj7`` or ``C:maj(9,b13)``"""
        if self.root is None:
            return NO_CHORD_TEXT
        text = f"{NOTE_NAMES[self.root]}:{self.quality.value}"
        if self.extensions:
            text += "(" + ",".join(self.extensions) + ")"
        return text

    def __str__(self) -> str:
        return self.text


NO_CHORD = ChordLabel()

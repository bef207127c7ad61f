from enum import Enum
from typing import List

from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator

from app.config import settings
from app.models.annotations import Vocabulary
from app.models.chords import NO_CHORD, ChordLabel, Quality
from app.utils.chord_syntax import parse_label

REFERENCE_ANNOTATOR = "reference"


class RelabelRule(str, Enum):
    IDENTITY = "identity"
    TRIAD_REDUCER = "triad_reducer"            # sevenths and sixths collapse to triads, sus to maj
    SEVENTH_ENTHUSIAST = "seventh_enthusiast"  # maj/min become maj7/min7 on a seeded set of roots
    ROOT_BIASED = "root_biased"                # minor thirds are heard as major
    MAJMIN_ONLY = "majmin_only"                # only maj and min, chosen by the third


class AnnotatorProfile(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: str = Field(min_length=1, pattern=r"^[A-Za-z0-9_.-]+$")
    rule: RelabelRule = RelabelRule.IDENTITY
    seed: int = 0


def _label(root: int, quality: Quality) -> ChordLabel:
    return ChordLabel(root=root, quality=quality)


def default_pool() -> Vocabulary:
    """Triads on every root, a few sus4 and seventh chords, and no-chord

    The triad on B is diminished rather than minor.
    """
    labels = [NO_CHORD]
    for root in range(12):
        labels += [_label(root, Quality.MAJ), _label(root, Quality.DIM if root == 11 else Quality.MIN)]
    labels += [_label(root, Quality.SUS4) for root in (0, 2, 7, 9)]
    labels += [
        _label(0, Quality.MAJ7),
        _label(5, Quality.MAJ7),
        _label(7, Quality.DOM7),
        _label(9, Quality.MIN7),
    ]
    return Vocabulary(labels=tuple(labels))


def default_profiles() -> List[AnnotatorProfile]:
    return [
        AnnotatorProfile(id=REFERENCE_ANNOTATOR, rule=RelabelRule.IDENTITY),
        AnnotatorProfile(id="triads", rule=RelabelRule.TRIAD_REDUCER),
        AnnotatorProfile(id="sevenths", rule=RelabelRule.SEVENTH_ENTHUSIAST),
        AnnotatorProfile(id="roots", rule=RelabelRule.ROOT_BIASED),
        AnnotatorProfile(id="majmin", rule=RelabelRule.MAJMIN_ONLY),
    ]


class SynthSpec(BaseModel):
    """Everything that determines a synthetic corpus"""

    seed: int = Field(default_factory=lambda: settings.seed)
    n_songs: int = Field(default=20, ge=1)
    song_length: float = Field(default=60.0, gt=0)
    chord_pool: Vocabulary = Field(default_factory=default_pool)
    min_segment: float = Field(default=2.0, gt=0)
    max_segment: float = Field(default=4.0, gt=0)
    sample_rate: int = Field(default_factory=lambda: settings.synth_sample_rate, ge=8000)
    crossfade: float = Field(default=0.005, ge=0)
    annotator_profiles: List[AnnotatorProfile] = Field(default_factory=default_profiles)
    reference_annotator: str = REFERENCE_ANNOTATOR

    @field_validator("chord_pool", mode="before")
    @classmethod
    def parse_pool(cls, value):
        # JSON spec files list the pool as label text
        if isinstance(value, (list, tuple)) and all(isinstance(item, str) for item in value):
            return Vocabulary(labels=tuple(parse_label(item) for item in value))
        return value

    @field_serializer("chord_pool")
    def render_pool(self, pool: Vocabulary) -> List[str]:
        return pool.texts

    @model_validator(mode="after")
    def check_spec(self) -> "SynthSpec":
        if self.min_segment > self.max_segment:
            raise ValueError("min_segment must not exceed max_segment")
        if self.crossfade >= self.min_segment:
            raise ValueError("crossfade must be shorter than the shortest segment")
        if not self.annotator_profiles:
            raise ValueError("at least one annotator profile is required")
        ids = [profile.id for profile in self.annotator_profiles]
        if len(set(ids)) != len(ids):
            raise ValueError("annotator ids must be unique")
        if self.reference_annotator not in ids:
            raise ValueError(f"reference annotator {self.reference_annotator!r} has no profile")
        return self

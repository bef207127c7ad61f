from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.config import settings
from app.models.audio import CqtMatrix
from app.models.chords import ChordLabel


class Segment(BaseModel):
    model_config = ConfigDict(frozen=True)

    start: float
    end: float
    label: ChordLabel


class AnnotationTrack(BaseModel):
    """One annotator's timed labels for one song"""

    model_config = ConfigDict(frozen=True)

    annotator_id: str
    song_id: str
    segments: Tuple[Segment, ...] = ()

    @model_validator(mode="after")
    def check_segments(self) -> "AnnotationTrack":
        previous_end = None
        for index, segment in enumerate(self.segments):
            if not segment.start < segment.end:
                raise ValueError(f"segment {index} ends before it starts")
            if previous_end is not None and segment.start < previous_end:
                raise ValueError(f"segment {index} overlaps the previous one")
            previous_end = segment.end
        return self

    @property
    def labels(self) -> List[ChordLabel]:
        return [segment.label for segment in self.segments]


class Vocabulary(BaseModel):
    """Deduplicated chord labels in lexicographic order of their text"""

    model_config = ConfigDict(frozen=True)

    labels: Tuple[ChordLabel, ...]

    @field_validator("labels", mode="after")
    @classmethod
    def canonical_order(cls, value: Tuple[ChordLabel, ...]) -> Tuple[ChordLabel, ...]:
        unique = {label.text: label for label in value}
        if not unique:
            raise ValueError("a vocabulary needs at least one label")
        return tuple(unique[text] for text in sorted(unique))

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __contains__(self, label: ChordLabel) -> bool:
        return label in self.labels

    @property
    def texts(self) -> List[str]:
        return [label.text for label in self.labels]


class Split(int, Enum):
    TRAIN = 0
    VAL = 1
    TEST = 2


class SongFrames(BaseModel):
    """Frame-aligned labels and SHIP targets for one song"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    song_id: str
    cqt: CqtMatrix
    labels: Dict[str, Tuple[ChordLabel, ...]]  # annotator -> one label per frame
    targets: np.ndarray  # frames x 19

    @property
    def n_frames(self) -> int:
        return self.cqt.n_frames


class Corpus(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    annotators: Tuple[str, ...]
    songs: Tuple[SongFrames, ...]
    split: Optional[np.ndarray] = None  # Split value per frame, songs concatenated in order

    @property
    def n_frames(self) -> int:
        return sum(song.n_frames for song in self.songs)

    @property
    def available_annotators(self) -> Tuple[str, ...]:
        """Annotators with labels for every song, in first-song order"""
        if not self.songs:
            return ()
        return tuple(
            annotator for annotator in self.songs[0].labels
            if all(annotator in song.labels for song in self.songs)
        )

    def song_offsets(self) -> np.ndarray:
        """Global index of each song's first frame"""
        counts = [song.n_frames for song in self.songs]
        return np.concatenate([[0], np.cumsum(counts)[:-1]]).astype(int)

    def frame_indices(self, split: Split) -> np.ndarray:
        if self.split is None:
            raise ValueError("corpus has not been split")
        return np.flatnonzero(self.split == split.value)

    def annotator_labels(self, annotator: str) -> List[ChordLabel]:
        """One annotator's labels for every frame, songs concatenated"""
        labels = []
        for song in self.songs:
            labels.extend(song.labels[annotator])
        return labels

    def all_targets(self) -> np.ndarray:
        return np.concatenate([song.targets for song in self.songs])


class SplitSettings(BaseModel):
    seed: int = Field(default_factory=lambda: settings.seed)
    ratios: Tuple[float, float, float] = Field(default_factory=lambda: tuple(settings.split_ratios))
    song_wise: bool = False


class SongEntry(BaseModel):
    song_id: str
    audio: Path
    annotations: Dict[str, Path]  # annotator -> LAB path


class CorpusManifest(BaseModel):
    """On-disk description of a corpus; relative paths resolve against ``root``"""

    songs: List[SongEntry]
    split: SplitSettings = SplitSettings()
    reference_annotator: Optional[str] = None
    root: Optional[Path] = Field(default=None, exclude=True)

    @property
    def annotators(self) -> List[str]:
        names = []
        for song in self.songs:
            for annotator in song.annotations:
                if annotator not in names:
                    names.append(annotator)
        return names

    def resolve(self, path: Path) -> Path:
        if path.is_absolute() or self.root is None:
            return path
        return self.root / path

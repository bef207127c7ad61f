from typing import List, Tuple

from pydantic import BaseModel

from app.models.annotations import Segment
from app.models.chords import ChordLabel


class ScoredLabel(BaseModel):
    label: ChordLabel
    combined_probability: float
    probability: float


class DecodeResult(BaseModel):
    """Vocabulary labels ranked by normalized probability"""

    ranking: List[ScoredLabel]
    uniform_fallback: bool = False  # every combined probability was zero

    @property
    def chosen(self) -> ChordLabel:
        return self.ranking[0].label


class PersonalizedSequence(BaseModel):
    segments: Tuple[Segment, ...]
    flagged_frames: int = 0

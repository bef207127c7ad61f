from enum import Enum
from pathlib import Path
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

from app.models.evaluation import METRIC_ORDER, Metric


class Command(str, Enum):
    SYNTH = "synth"
    TRAIN = "train"
    PERSONALIZE = "personalize"
    EVALUATE = "evaluate"
    EXPERIMENT = "experiment"


class RunConfig(BaseModel):
    """Validated command-line invocation"""

    command: Command
    manifest: Optional[Path] = None
    model: Optional[Path] = None
    out: Optional[Path] = None
    spec: Optional[Path] = None
    estimates: Optional[Path] = None
    seed: Optional[int] = None
    ratios: Optional[Tuple[float, float, float]] = None
    annotators: Optional[List[str]] = None
    reference_annotator: Optional[str] = None
    metrics: List[Metric] = Field(default_factory=lambda: list(METRIC_ORDER))
    max_epochs: Optional[int] = Field(default=None, ge=1)
    hidden_sizes: Optional[List[int]] = None
    song_wise: bool = False
    agreement: bool = False

    @field_validator("hidden_sizes")
    @classmethod
    def check_hidden(cls, value: Optional[List[int]]) -> Optional[List[int]]:
        if value is not None and any(size < 1 for size in value):
            raise ValueError("hidden layer sizes must be positive")
        return value

    @model_validator(mode="after")
    def check_paths(self) -> "RunConfig":
        required = {
            Command.SYNTH: ("out",),
            Command.TRAIN: ("manifest", "model"),
            Command.PERSONALIZE: ("manifest", "model", "out"),
            Command.EVALUATE: ("manifest", "estimates"),
            Command.EXPERIMENT: ("out",),
        }[self.command]
        missing = [f"--{name}" for name in required if getattr(self, name) is None]
        if missing:
            raise ValueError(f"{self.command.value} requires {', '.join(missing)}")
        if self.command is Command.EXPERIMENT and self.manifest and self.spec:
            raise ValueError("experiment takes either --manifest or --spec, not both")
        return self

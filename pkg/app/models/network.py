from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.config import settings
from app.models.audio import StandardizerStats
from app.models.profiles import HIP_SIZE

DEFAULT_LAYER_SIZES = [2880, 1024, 512, 256, HIP_SIZE]


class AdamConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    learning_rate: float = Field(default=0.001, gt=0)
    beta1: float = Field(default=0.9, ge=0, lt=1)
    beta2: float = Field(default=0.999, ge=0, lt=1)
    epsilon: float = Field(default=1e-8, gt=0)


class MlpConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    layer_sizes: List[int] = Field(default_factory=lambda: list(DEFAULT_LAYER_SIZES))
    batch_size: int = Field(default=512, ge=1)
    patience_epochs: int = Field(default=20, ge=1)
    max_epochs: int = Field(default=100, ge=1)
    improvement_tolerance: float = Field(default=1e-6, ge=0)
    adam: AdamConfig = AdamConfig()
    seed: int = 0

    @field_validator("layer_sizes")
    @classmethod
    def check_layers(cls, value: List[int]) -> List[int]:
        if len(value) < 2:
            raise ValueError("a network needs at least an input and an output layer")
        if any(size < 1 for size in value):
            raise ValueError("layer sizes must be positive")
        if value[-1] != HIP_SIZE:
            raise ValueError(f"the output layer must have {HIP_SIZE} units")
        return value

    @classmethod
    def from_settings(cls, **overrides) -> "MlpConfig":
        values = dict(
            layer_sizes=[settings.context_frames * settings.n_bins, 1024, 512, 256, HIP_SIZE],
            batch_size=settings.batch_size,
            patience_epochs=settings.patience_epochs,
            max_epochs=settings.max_epochs,
            adam=AdamConfig(learning_rate=settings.learning_rate),
            seed=settings.seed,
        )
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)


class TrainingHistory(BaseModel):
    train_loss: List[float] = []
    val_accuracy: List[float] = []
    best_epoch: Optional[int] = None  # 1-based
    stopped_early: bool = False

    @property
    def epochs(self) -> int:
        return len(self.train_loss)


class MlpModel(BaseModel):
    """Weights are stored output x input, as ``layer_sizes`` chains"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    config: MlpConfig
    weights: List[np.ndarray]
    biases: List[np.ndarray]
    stats: Optional[StandardizerStats] = None
    history: TrainingHistory = TrainingHistory()

    @property
    def layer_sizes(self) -> List[int]:
        return list(self.config.layer_sizes)

    def check_shapes(self) -> None:
        sizes = self.layer_sizes
        if len(self.weights) != len(sizes) - 1 or len(self.biases) != len(sizes) - 1:
            raise ValueError("parameter count does not match the layer sizes")
        for layer, (n_in, n_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            if self.weights[layer].shape != (n_out, n_in):
                raise ValueError(
                    f"layer {layer} weights have shape {self.weights[layer].shape}, "
                    f"expected {(n_out, n_in)}"
                )
            if self.biases[layer].shape != (n_out,):
                raise ValueError(f"layer {layer} bias has shape {self.biases[layer].shape}")
        if self.stats is not None and self.stats.dimension != sizes[0]:
            raise ValueError("standardizer dimension does not match the input layer")


class Gradients(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    weights: List[np.ndarray]
    biases: List[np.ndarray]
    loss: float

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.config import settings
from app.exceptions import CqtConfigError


def _frozen_array(value, ndim: int) -> np.ndarray:
    array = np.array(value, dtype=np.float64)
    if array.ndim != ndim:
        raise ValueError(f"expected a {ndim}-D array, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ValueError("array contains NaN or infinite values")
    array.setflags(write=False)
    return array


class AudioBuffer(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    samples: np.ndarray
    sample_rate: int = Field(gt=0)

    @field_validator("samples", mode="before")
    @classmethod
    def check_samples(cls, value) -> np.ndarray:
        return _frozen_array(value, 1)


class CqtConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    hop: int = Field(default=4096, gt=0)
    f_min: float = Field(default=32.7032, gt=0)
    n_bins: int = Field(default=192, gt=0)
    bins_per_octave: int = Field(default=24, gt=0)

    @classmethod
    def from_settings(cls) -> "CqtConfig":
        return cls(
            hop=settings.hop_length,
            f_min=settings.f_min,
            n_bins=settings.n_bins,
            bins_per_octave=settings.bins_per_octave,
        )

    @property
    def f_max(self) -> float:
        return self.f_min * 2.0 ** (self.n_bins / self.bins_per_octave)

    @property
    def quality_factor(self) -> float:
        return 1.0 / (2.0 ** (1.0 / self.bins_per_octave) - 1.0)

    def check_nyquist(self, sample_rate: int) -> None:
        if not self.f_max < sample_rate / 2:
            raise CqtConfigError(
                f"highest CQT bin edge {self.f_max:.1f} Hz is not below the "
                f"Nyquist frequency {sample_rate / 2:.1f} Hz"
            )


class CqtMatrix(BaseModel):
    """Frames x bins constant-Q magnitudes for one audio file"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    frames: np.ndarray
    frame_times: np.ndarray
    sample_rate: int = Field(gt=0)
    config: CqtConfig = CqtConfig()

    @field_validator("frames", mode="before")
    @classmethod
    def check_frames(cls, value) -> np.ndarray:
        array = _frozen_array(value, 2)
        if np.any(array < 0):
            raise ValueError("CQT magnitudes must be non-negative")
        return array

    @field_validator("frame_times", mode="before")
    @classmethod
    def check_times(cls, value) -> np.ndarray:
        return _frozen_array(value, 1)

    @model_validator(mode="after")
    def check_shape(self) -> "CqtMatrix":
        if self.frames.shape[1] != self.config.n_bins:
            raise ValueError(
                f"CQT has {self.frames.shape[1]} bins, config expects {self.config.n_bins}"
            )
        if len(self.frame_times) != self.frames.shape[0]:
            raise ValueError("frame_times length does not match the frame count")
        return self

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]


class StandardizerStats(BaseModel):
    """Per-dimension mean and scale of log(1 + x) features"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    mean: np.ndarray
    scale: np.ndarray

    @field_validator("mean", "scale", mode="before")
    @classmethod
    def check_vector(cls, value) -> np.ndarray:
        return _frozen_array(value, 1)

    @model_validator(mode="after")
    def check_shape(self) -> "StandardizerStats":
        if self.mean.shape != self.scale.shape:
            raise ValueError("mean and scale must have the same length")
        if np.any(self.scale <= 0):
            raise ValueError("scale entries must be positive")
        return self

    @property
    def dimension(self) -> int:
        return self.mean.shape[0]

from pathlib import Path
from typing import Tuple

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    app_name: str = "Chord Personalization API"
    debug: bool = False
    log_level: str = "INFO"

    cache_dir: Path = Path(".cqt_cache")

    seed: int = 0

    # Constant-Q analysis
    hop_length: int = 4096
    f_min: float = 32.7032
    n_bins: int = 192
    bins_per_octave: int = 24
    context_radius: int = 7  # frames left and right of the centre frame

    # Network training
    batch_size: int = 512
    patience_epochs: int = 20
    max_epochs: int = 100
    learning_rate: float = 0.001

    # Corpus
    split_ratios: Tuple[float, float, float] = (0.65, 0.10, 0.25)
    synth_sample_rate: int = 22050

    progress: bool = True

    @property
    def context_frames(self) -> int:
        return 2 * self.context_radius + 1

    model_config = SettingsConfigDict(
        env_prefix="SHIP_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


settings = Settings()

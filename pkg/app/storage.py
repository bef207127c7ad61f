"""File persistence: audio, LAB tracks, manifests, models and the CQT cache."""
import hashlib
import json
import logging
import struct
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from app.exceptions import (
    AnnotationError, AudioFormatError, AudioIOError, CorpusError, ModelFormatError,
)
from app.models.annotations import AnnotationTrack, CorpusManifest, Segment
from app.models.audio import AudioBuffer, CqtConfig, CqtMatrix
from app.models.network import MlpModel
from app.utils.annotation_store import parse_lab, render_lab
from app.utils.audio_cqt import compute_cqt, load_wav, write_wav
from app.utils.mlp_core import deserialize_model, history_log, serialize_model
from app.utils.time_utils import frame_times

logger = logging.getLogger(__name__)

CQT_MAGIC = b"CQTF"
CQT_VERSION = 1
_CQT_HEADER = struct.Struct("<4sIIIdIII")  # magic, version, sr, hop, f_min, n_bins, bpo, frames


def _write_bytes(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def cqt_cache_key(audio: AudioBuffer, config: CqtConfig) -> str:
    digest = hashlib.sha256()
    digest.update(np.ascontiguousarray(audio.samples, dtype="<f8").tobytes())
    digest.update(struct.pack("<I", audio.sample_rate))
    digest.update(config.model_dump_json().encode())
    return digest.hexdigest()


def encode_cqt(cqt: CqtMatrix) -> bytes:
    config = cqt.config
    header = _CQT_HEADER.pack(
        CQT_MAGIC, CQT_VERSION, cqt.sample_rate, config.hop, config.f_min,
        config.n_bins, config.bins_per_octave, cqt.n_frames,
    )
    return header + np.ascontiguousarray(cqt.frames, dtype="<f8").tobytes()


def decode_cqt(data: bytes) -> CqtMatrix:
    if len(data) < _CQT_HEADER.size:
        raise AudioFormatError("CQT cache file is truncated")
    magic, version, sr, hop, f_min, n_bins, bpo, n_frames = _CQT_HEADER.unpack_from(data)
    if magic != CQT_MAGIC:
        raise AudioFormatError("not a CQT cache file")
    if version != CQT_VERSION:
        raise AudioFormatError(f"unsupported CQT cache version {version}")
    body = data[_CQT_HEADER.size:]
    if len(body) != n_frames * n_bins * 8:
        raise AudioFormatError("CQT cache body does not match its header")
    config = CqtConfig(hop=hop, f_min=f_min, n_bins=n_bins, bins_per_octave=bpo)
    frames = np.frombuffer(body, dtype="<f8").reshape(n_frames, n_bins)
    return CqtMatrix(
        frames=frames, frame_times=frame_times(n_frames, hop, sr), sample_rate=sr, config=config,
    )


class Storage:
    """Reads and writes every artifact of the pipeline"""

    @staticmethod
    def read_audio(path: Path) -> AudioBuffer:
        return load_wav(path)

    @staticmethod
    def write_audio(path: Path, audio: AudioBuffer) -> None:
        try:
            write_wav(path, audio)
        except (OSError, RuntimeError) as e:
            logging.error(f"Audio write error for {path}: {e}")
            raise AudioIOError(f"cannot write {path}: {e}") from e

    @staticmethod
    def read_lab(path: Path, annotator_id: str, song_id: str) -> AnnotationTrack:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            logging.error(f"LAB read error for {path}: {e}")
            raise
        try:
            return parse_lab(text, annotator_id, song_id)
        except AnnotationError as e:
            raise AnnotationError(e.detail, line=e.line, path=path) from e

    @staticmethod
    def write_lab(path: Path, segments: Iterable[Segment]) -> None:
        try:
            _write_text(Path(path), render_lab(segments))
        except OSError as e:
            logging.error(f"LAB write error for {path}: {e}")
            raise

    @staticmethod
    def read_manifest(path: Path) -> CorpusManifest:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            logging.error(f"Manifest read error for {path}: {e}")
            raise
        try:
            manifest = CorpusManifest.model_validate_json(text)
        except ValueError as e:
            raise CorpusError(f"{path}: invalid manifest: {e}") from e
        return manifest.model_copy(update={"root": path.parent})

    @staticmethod
    def write_manifest(path: Path, manifest: CorpusManifest) -> None:
        document = manifest.model_dump(mode="json")
        try:
            _write_text(Path(path), json.dumps(document, indent=2, sort_keys=True) + "\n")
        except OSError as e:
            logging.error(f"Manifest write error for {path}: {e}")
            raise

    @staticmethod
    def save_model(path: Path, model: MlpModel, with_history: bool = True) -> None:
        """Write the model file and, next to it, the per-epoch history log"""
        path = Path(path)
        try:
            _write_bytes(path, serialize_model(model))
            if with_history:
                _write_text(path.with_suffix(".history.tsv"), history_log(model.history))
        except OSError as e:
            logging.error(f"Model write error for {path}: {e}")
            raise
        logger.info(f"Saved model to {path}")

    @staticmethod
    def load_model(path: Path, expected_layer_sizes: Optional[Sequence[int]] = None) -> MlpModel:
        path = Path(path)
        try:
            data = path.read_bytes()
        except OSError as e:
            logging.error(f"Model read error for {path}: {e}")
            raise
        try:
            return deserialize_model(data, expected_layer_sizes)
        except ModelFormatError as e:
            logging.error(f"Model decode error for {path}: {e}")
            raise

    @staticmethod
    def song_cqt(
        audio_path: Path,
        config: Optional[CqtConfig] = None,
        cache_dir: Optional[Path] = None,
    ) -> CqtMatrix:
        """CQT of an audio file, reused from ``cache_dir`` when present there"""
        config = config or CqtConfig.from_settings()
        audio = Storage.read_audio(audio_path)
        if cache_dir is None:
            return compute_cqt(audio, config)

        cache_path = Path(cache_dir) / f"{cqt_cache_key(audio, config)}.cqt"
        if cache_path.is_file():
            try:
                cqt = decode_cqt(cache_path.read_bytes())
                if cqt.config == config and cqt.sample_rate == audio.sample_rate:
                    logger.debug(f"CQT cache hit for {audio_path}")
                    return cqt
            except (OSError, ValueError) as e:
                logger.warning(f"Ignoring unreadable CQT cache {cache_path}: {e}")

        cqt = compute_cqt(audio, config)
        try:
            _write_bytes(cache_path, encode_cqt(cqt))
        except OSError as e:
            logger.warning(f"Cannot write CQT cache {cache_path}: {e}")
        return cqt

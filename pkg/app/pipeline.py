"""Corpus loading, training, personalization and the reference comparison experiment."""
import logging
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np
from tqdm import tqdm

from app.config import settings
from app.exceptions import ConfigurationError, CorpusError
from app.models.annotations import Corpus, CorpusManifest, Split, SplitSettings
from app.models.audio import CqtConfig
from app.models.chords import ChordLabel
from app.models.decoding import PersonalizedSequence
from app.models.evaluation import EvalReport, ExperimentReport, Metric
from app.models.network import MlpConfig, MlpModel
from app.models.profiles import HIP_SIZE
from app.storage import Storage
from app.utils.annotation_store import (
    CorpusFrameSet, build_corpus, frame_vocabulary, labels_at, retarget, split_corpus,
)
from app.utils.audio_cqt import fit_standardizer_chunks
from app.utils.decoder import decode_frames, personalize_sequence
from app.utils.evaluation import build_report
from app.utils.mlp_core import predict_ships, train
from app.utils.run_monitor import RunMonitor, run_monitor
from app.utils.time_utils import frame_duration

logger = logging.getLogger(__name__)


class SongEstimate(NamedTuple):
    song_id: str
    frames: np.ndarray         # global indices of the decoded frames
    labels: List[ChordLabel]   # one per decoded frame
    sequence: PersonalizedSequence


class ExperimentResult(NamedTuple):
    report: ExperimentReport
    ship_model: MlpModel
    iso_model: MlpModel


def load_corpus(
    manifest: CorpusManifest,
    annotators: Optional[Sequence[str]] = None,
    split: Optional[SplitSettings] = None,
    cqt_config: Optional[CqtConfig] = None,
    cache_dir: Optional[Path] = None,
    monitor: Optional[RunMonitor] = None,
    progress: Optional[bool] = None,
) -> Corpus:
    """CQTs and aligned labels for every manifest song, split into train/val/test"""
    if not manifest.songs:
        raise CorpusError("manifest lists no songs")
    cqt_config = cqt_config or CqtConfig.from_settings()
    cache_dir = settings.cache_dir if cache_dir is None else cache_dir
    progress = settings.progress if progress is None else progress
    monitor = monitor or run_monitor
    split = split or manifest.split

    tracks, cqts = {}, {}
    for song in tqdm(manifest.songs, desc="cqt", unit="song", disable=not progress):
        cqt = Storage.song_cqt(manifest.resolve(song.audio), cqt_config, cache_dir)
        cqts[song.song_id] = cqt
        tracks[song.song_id] = {
            annotator: Storage.read_lab(manifest.resolve(path), annotator, song.song_id)
            for annotator, path in song.annotations.items()
        }
        monitor.record_song(cqt.n_frames)

    corpus = build_corpus(tracks, cqts, annotators or manifest.annotators)
    monitor.log_metrics()
    return split_corpus(corpus, split.ratios, split.seed, split.song_wise)


def model_radius(model: MlpModel, n_bins: int) -> int:
    context = model.layer_sizes[0] // n_bins
    if context * n_bins != model.layer_sizes[0] or context % 2 == 0:
        raise ConfigurationError(
            f"model input of {model.layer_sizes[0]} does not match {n_bins}-bin context windows"
        )
    return (context - 1) // 2


def layer_sizes(input_size: int, hidden_sizes: Optional[Sequence[int]]) -> Optional[List[int]]:
    if hidden_sizes is None:
        return None
    return [input_size] + list(hidden_sizes) + [HIP_SIZE]


def train_model(
    corpus: Corpus,
    annotators: Optional[Sequence[str]] = None,
    config: Optional[MlpConfig] = None,
    radius: Optional[int] = None,
    monitor: Optional[RunMonitor] = None,
) -> MlpModel:
    """Fit the standardizer on training frames and train on the targets of ``annotators``"""
    if annotators is not None:
        corpus = retarget(corpus, annotators)
    radius = settings.context_radius if radius is None else radius
    n_bins = corpus.songs[0].cqt.config.n_bins
    input_size = (2 * radius + 1) * n_bins
    config = config or MlpConfig.from_settings()
    if config.layer_sizes[0] != input_size:
        raise ConfigurationError(
            f"network input is {config.layer_sizes[0]}, context windows have {input_size} values"
        )

    train_set = CorpusFrameSet(corpus, corpus.frame_indices(Split.TRAIN), radius=radius)
    val_set = CorpusFrameSet(corpus, corpus.frame_indices(Split.VAL), radius=radius)
    stats = fit_standardizer_chunks(train_set.raw_chunks)
    train_set.stats = stats
    val_set.stats = stats

    logger.info(f"Training on {len(train_set)} frames, validating on {len(val_set)}, "
                f"targets from {', '.join(corpus.annotators)}")
    model = train(train_set, val_set, config, stats, monitor or run_monitor)
    (monitor or run_monitor).log_metrics()
    return model


def personalize(
    model: MlpModel,
    corpus: Corpus,
    annotator: str,
    split: Split = Split.TEST,
) -> List[SongEstimate]:
    """Decode the frames of one split with the annotator's training vocabulary"""
    vocabulary = frame_vocabulary(corpus, annotator, Split.TRAIN)
    n_bins = corpus.songs[0].cqt.config.n_bins
    radius = model_radius(model, n_bins)
    indices = corpus.frame_indices(split)
    frame_set = CorpusFrameSet(corpus, indices, radius=radius)
    ships = predict_ships(model, frame_set.raw_features(np.arange(len(indices))))

    offsets = corpus.song_offsets()
    estimates = []
    for song_index, song in enumerate(corpus.songs):
        lo, hi = offsets[song_index], offsets[song_index] + song.n_frames
        mask = (indices >= lo) & (indices < hi)
        if not np.any(mask):
            continue
        song_frames = indices[mask]
        song_ships = ships[mask]
        labels, _ = decode_frames(song_ships, vocabulary)
        sequence = personalize_sequence(
            song_ships,
            vocabulary,
            song.cqt.frame_times[song_frames - lo],
            frame_duration(song.cqt.config.hop, song.cqt.sample_rate),
        )
        estimates.append(SongEstimate(song.song_id, song_frames, labels, sequence))
    logger.info(f"Personalized {len(estimates)} songs for {annotator} "
                f"with a {len(vocabulary)}-label vocabulary")
    return estimates


def estimate_labels(estimates: Sequence[SongEstimate]) -> List[ChordLabel]:
    return [label for estimate in estimates for label in estimate.labels]


def reference_labels(corpus: Corpus, annotator: str, split: Split = Split.TEST) -> List[ChordLabel]:
    labels = corpus.annotator_labels(annotator)
    return [labels[i] for i in corpus.frame_indices(split)]


def estimated_from_tracks(corpus: Corpus, tracks, split: Split = Split.TEST) -> List[ChordLabel]:
    """Per-frame labels of estimated LAB tracks on a split; gaps inside a track are no-chord"""
    indices = corpus.frame_indices(split)
    offsets = corpus.song_offsets()
    labels = []
    for song_index, song in enumerate(corpus.songs):
        lo = offsets[song_index]
        song_frames = indices[(indices >= lo) & (indices < lo + song.n_frames)]
        if len(song_frames) == 0:
            continue
        times = song.cqt.frame_times[song_frames - lo]
        track = tracks.get(song.song_id)
        if track is None:
            raise CorpusError(f"no estimate for song {song.song_id!r}")
        labels.extend(labels_at(track, times))
    return labels


def run_experiment(
    corpus: Corpus,
    reference_annotator: str,
    config: Optional[MlpConfig] = None,
    metrics: Optional[Sequence[Metric]] = None,
    radius: Optional[int] = None,
    monitor: Optional[RunMonitor] = None,
) -> ExperimentResult:
    """Train the multi-reference and single-reference models and score all three arms"""
    annotators = list(corpus.available_annotators)
    if reference_annotator not in annotators:
        raise CorpusError(f"reference annotator {reference_annotator!r} is not in the corpus")

    ship_model = train_model(corpus, annotators, config, radius, monitor)
    iso_model = train_model(corpus, [reference_annotator], config, radius, monitor)

    references = {a: reference_labels(corpus, a) for a in annotators}
    ship_estimates = {a: estimate_labels(personalize(ship_model, corpus, a)) for a in annotators}
    iso_estimates = {a: estimate_labels(personalize(iso_model, corpus, a)) for a in annotators}

    ship = build_report(ship_estimates, references, metrics)
    iso = build_report(iso_estimates, references, metrics)
    # each annotator's own labels scored against the single reference
    direct = build_report(
        references, {a: references[reference_annotator] for a in annotators}, metrics
    )
    baseline = build_report(
        {reference_annotator: iso_estimates[reference_annotator]},
        {reference_annotator: references[reference_annotator]},
        metrics,
    )
    report = ExperimentReport(
        reference_annotator=reference_annotator,
        ship=ship,
        annotator_vs_reference=direct,
        iso=iso,
        baseline={m: baseline.accuracy(reference_annotator, m) for m in baseline.metrics},
    )
    return ExperimentResult(report, ship_model, iso_model)


def evaluate_estimates(
    corpus: Corpus,
    estimates: Dict[str, List[ChordLabel]],
    reference_annotator: Optional[str] = None,
    metrics: Optional[Sequence[Metric]] = None,
    agreement: bool = False,
) -> EvalReport:
    """Score per-annotator test-frame estimates against their own or one shared reference"""
    references = {
        annotator: reference_labels(corpus, reference_annotator or annotator)
        for annotator in estimates
    }
    if agreement:
        for annotator in corpus.available_annotators:
            references.setdefault(annotator, reference_labels(corpus, annotator))
    return build_report(estimates, references, metrics, agreement)

"""LAB ingestion, frame alignment, SHIP targets, vocabularies and splits."""
import bisect
import logging
import math
from typing import Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from app.config import settings
from app.exceptions import AnnotationError, ChordParseError, CorpusError, SplitError
from app.models.annotations import (
    AnnotationTrack, Corpus, Segment, Split, SongFrames, Vocabulary,
)
from app.models.audio import CqtMatrix, StandardizerStats
from app.models.chords import NO_CHORD, ChordLabel
from app.utils.audio_cqt import apply_standardizer
from app.utils.chord_syntax import parse_label
from app.utils.hip_encoding import ship_matrix
from app.utils.time_utils import format_seconds

logger = logging.getLogger(__name__)

RATIO_TOLERANCE = 1e-9


def parse_lab(text: str, annotator_id: str, song_id: str) -> AnnotationTrack:
    """Parse ``start end label`` lines into a validated track"""
    segments = []
    previous_end = None
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        parts = stripped.split()
        if len(parts) != 3:
            raise AnnotationError(f"expected 'start end label', got {stripped!r}", line=number)
        try:
            start, end = float(parts[0]), float(parts[1])
        except ValueError:
            raise AnnotationError(f"malformed time in {stripped!r}", line=number) from None
        if not (math.isfinite(start) and math.isfinite(end)) or start < 0:
            raise AnnotationError(f"invalid time in {stripped!r}", line=number)
        if not start < end:
            raise AnnotationError(f"segment ends at {end} before it starts at {start}", line=number)
        if previous_end is not None and start < previous_end:
            raise AnnotationError(
                f"segment starts at {start} before the previous one ends at {previous_end}",
                line=number,
            )
        try:
            label = parse_label(parts[2])
        except ChordParseError as e:
            raise AnnotationError(str(e), line=number) from e
        segments.append(Segment(start=start, end=end, label=label))
        previous_end = end
    return AnnotationTrack(annotator_id=annotator_id, song_id=song_id, segments=tuple(segments))


def render_lab(segments: Iterable[Segment]) -> str:
    return "".join(
        f"{format_seconds(segment.start)} {format_seconds(segment.end)} {segment.label.text}\n"
        for segment in segments
    )


def label_at(track: AnnotationTrack, time: float) -> ChordLabel:
    """Label of the half-open segment containing ``time``; gaps are no-chord"""
    starts = [segment.start for segment in track.segments]
    index = bisect.bisect_right(starts, time) - 1
    if index >= 0 and time < track.segments[index].end:
        return track.segments[index].label
    return NO_CHORD


def labels_at(track: AnnotationTrack, times: Sequence[float]) -> List[ChordLabel]:
    if not track.segments:
        return [NO_CHORD] * len(times)
    starts = np.array([segment.start for segment in track.segments])
    ends = np.array([segment.end for segment in track.segments])
    times = np.asarray(times, dtype=np.float64)
    indices = np.searchsorted(starts, times, side="right") - 1
    labels = []
    for time, index in zip(times, indices):
        if index >= 0 and time < ends[index]:
            labels.append(track.segments[index].label)
        else:
            labels.append(NO_CHORD)
    return labels


def build_corpus(
    tracks: Mapping[str, Mapping[str, AnnotationTrack]],
    cqts: Mapping[str, CqtMatrix],
    annotators: Optional[Sequence[str]] = None,
) -> Corpus:
    """Align every annotator's labels to the CQT frames of each song

    ``tracks`` maps song id -> annotator id -> track. Labels are kept for every
    annotator; with ``annotators`` the targets use only those, and a single
    annotator yields plain HIP targets.
    """
    if not tracks:
        raise CorpusError("no songs to build a corpus from")
    if annotators is None:
        annotators = list(next(iter(tracks.values())).keys())
    annotators = tuple(annotators)
    if not annotators:
        raise CorpusError("at least one annotator is required")

    songs = []
    for song_id, song_tracks in tracks.items():
        missing = [annotator for annotator in annotators if annotator not in song_tracks]
        if missing:
            raise CorpusError(f"song {song_id!r} has no annotation from {', '.join(missing)}")
        if song_id not in cqts:
            raise CorpusError(f"song {song_id!r} has no CQT")
        cqt = cqts[song_id]
        labels = {
            annotator: tuple(labels_at(song_tracks[annotator], cqt.frame_times))
            for annotator in song_tracks
        }
        targets = _targets(labels, annotators)
        songs.append(SongFrames(song_id=song_id, cqt=cqt, labels=labels, targets=targets))

    corpus = Corpus(annotators=annotators, songs=tuple(songs))
    logger.info(f"Built corpus: {len(songs)} songs, {corpus.n_frames} frames, "
                f"{len(annotators)} annotators")
    return corpus


def _targets(labels, annotators: Sequence[str]) -> np.ndarray:
    rows = list(zip(*(labels[annotator] for annotator in annotators)))
    targets = ship_matrix(rows)
    targets.setflags(write=False)
    return targets


def retarget(corpus: Corpus, annotators: Sequence[str]) -> Corpus:
    """Same frames and split with targets from another set of annotators"""
    annotators = tuple(annotators)
    if not annotators:
        raise CorpusError("at least one annotator is required")
    missing = [a for a in annotators if a not in corpus.available_annotators]
    if missing:
        raise CorpusError(f"unknown annotator {', '.join(missing)}")
    songs = tuple(
        song.model_copy(update={"targets": _targets(song.labels, annotators)})
        for song in corpus.songs
    )
    return corpus.model_copy(update={"annotators": annotators, "songs": songs})


def split_counts(n_frames: int, ratios: Sequence[float]) -> Tuple[int, int, int]:
    check_ratios(ratios)
    n_train = int(round(ratios[0] * n_frames))
    n_val = min(int(round(ratios[1] * n_frames)), n_frames - n_train)
    return n_train, n_val, n_frames - n_train - n_val


def check_ratios(ratios: Sequence[float]) -> None:
    if len(ratios) != 3:
        raise SplitError(f"expected three split ratios, got {len(ratios)}")
    if any(not ratio > 0 for ratio in ratios):
        raise SplitError(f"split ratios must be positive: {tuple(ratios)}")
    if abs(sum(ratios) - 1.0) > RATIO_TOLERANCE:
        raise SplitError(f"split ratios must sum to 1, got {sum(ratios)}")


def split_assignment(
    frame_counts: Sequence[int],
    ratios: Optional[Sequence[float]] = None,
    seed: Optional[int] = None,
    song_wise: bool = False,
) -> np.ndarray:
    """Split value per frame; a pure function of the inputs"""
    ratios = tuple(settings.split_ratios) if ratios is None else tuple(ratios)
    seed = settings.seed if seed is None else seed
    n_frames = int(sum(frame_counts))
    n_train, n_val, _ = split_counts(n_frames, ratios)
    rng = np.random.default_rng(seed)
    assignment = np.full(n_frames, Split.TEST.value, dtype=np.int8)

    if not song_wise:
        order = rng.permutation(n_frames)
        assignment[order[:n_train]] = Split.TRAIN.value
        assignment[order[n_train:n_train + n_val]] = Split.VAL.value
        return assignment

    # whole songs go to the first split whose quota is still open
    offsets = np.concatenate([[0], np.cumsum(frame_counts)]).astype(int)
    filled = {Split.TRAIN: 0, Split.VAL: 0}
    quota = {Split.TRAIN: n_train, Split.VAL: n_val}
    for song_index in rng.permutation(len(frame_counts)):
        count = frame_counts[song_index]
        target = Split.TEST
        for split in (Split.TRAIN, Split.VAL):
            if filled[split] < quota[split]:
                target = split
                break
        if target is not Split.TEST:
            filled[target] += count
        assignment[offsets[song_index]:offsets[song_index + 1]] = target.value
    return assignment


def split_corpus(
    corpus: Corpus,
    ratios: Optional[Sequence[float]] = None,
    seed: Optional[int] = None,
    song_wise: bool = False,
) -> Corpus:
    counts = [song.n_frames for song in corpus.songs]
    assignment = split_assignment(counts, ratios, seed, song_wise)
    assignment.setflags(write=False)
    logger.info(
        f"Split {len(assignment)} frames: "
        f"train={int(np.sum(assignment == Split.TRAIN.value))}, "
        f"val={int(np.sum(assignment == Split.VAL.value))}, "
        f"test={int(np.sum(assignment == Split.TEST.value))}"
    )
    return corpus.model_copy(update={"split": assignment})


def build_vocabulary(tracks: Iterable[AnnotationTrack]) -> Vocabulary:
    labels = [label for track in tracks for label in track.labels]
    if not labels:
        raise CorpusError("no labels to build a vocabulary from")
    return Vocabulary(labels=tuple(labels))


def frame_vocabulary(corpus: Corpus, annotator: str, split: Split = Split.TRAIN) -> Vocabulary:
    """Vocabulary of the labels an annotator gave to frames of one split"""
    if annotator not in corpus.available_annotators:
        raise CorpusError(f"unknown annotator {annotator!r}")
    labels = corpus.annotator_labels(annotator)
    indices = corpus.frame_indices(split)
    if len(indices) == 0:
        raise CorpusError(f"the {split.name.lower()} split is empty")
    return Vocabulary(labels=tuple(labels[i] for i in indices))


class CorpusFrameSet:
    """Context-window features and SHIP targets for a subset of corpus frames"""

    def __init__(
        self,
        corpus: Corpus,
        indices: Sequence[int],
        stats: Optional[StandardizerStats] = None,
        radius: Optional[int] = None,
    ):
        self.radius = settings.context_radius if radius is None else radius
        self.indices = np.asarray(indices, dtype=int)
        self.stats = stats

        blocks = []
        block_offsets = []
        cursor = 0
        for song in corpus.songs:
            block = np.pad(song.cqt.frames, ((self.radius, self.radius), (0, 0)))
            blocks.append(block)
            block_offsets.append(cursor)
            cursor += block.shape[0]
        self._stacked = np.concatenate(blocks)
        n_bins = self._stacked.shape[1]
        self._windows = np.lib.stride_tricks.sliding_window_view(
            self._stacked, (2 * self.radius + 1, n_bins)
        )[:, 0]

        counts = [song.n_frames for song in corpus.songs]
        song_of_frame = np.repeat(np.arange(len(counts)), counts)
        local = np.arange(corpus.n_frames) - corpus.song_offsets()[song_of_frame]
        self._window_start = np.asarray(block_offsets)[song_of_frame] + local
        self._targets = corpus.all_targets()

    def __len__(self) -> int:
        return len(self.indices)

    @property
    def targets(self) -> np.ndarray:
        return self._targets[self.indices]

    def raw_features(self, positions) -> np.ndarray:
        frames = self.indices[np.asarray(positions, dtype=int)]
        windows = self._windows[self._window_start[frames]]
        return windows.reshape(len(frames), -1)

    def raw_chunks(self, chunk_size: int = 2048):
        for start in range(0, len(self), chunk_size):
            yield self.raw_features(np.arange(start, min(start + chunk_size, len(self))))

    def batch(self, positions) -> Tuple[np.ndarray, np.ndarray]:
        features = self.raw_features(positions)
        if self.stats is not None:
            features = apply_standardizer(self.stats, features)
        return features, self._targets[self.indices[np.asarray(positions, dtype=int)]]

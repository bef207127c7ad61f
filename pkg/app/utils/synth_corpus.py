"""Deterministic synthetic songs and simulated annotators."""
import logging
import zlib
from functools import lru_cache
from pathlib import Path
from typing import FrozenSet, List, Tuple

import numpy as np
from tqdm import tqdm

from app.config import settings
from app.exceptions import SynthError
from app.models.annotations import (
    AnnotationTrack, CorpusManifest, Segment, SongEntry, SplitSettings, Vocabulary,
)
from app.models.audio import AudioBuffer
from app.models.chords import ChordLabel, Quality, ThirdClass
from app.models.synth import AnnotatorProfile, RelabelRule, SynthSpec
from app.storage import Storage
from app.utils.chord_syntax import pitch_classes, third_class

logger = logging.getLogger(__name__)

TRUTH_ANNOTATOR = "truth"
OCTAVES = (3, 4, 5)
HARMONIC_GAIN = 10 ** (-6 / 20)  # -6 dB
PEAK = 0.5

_TRIAD_OF = {
    Quality.MAJ7: Quality.MAJ,
    Quality.DOM7: Quality.MAJ,
    Quality.MAJ6: Quality.MAJ,
    Quality.MIN7: Quality.MIN,
    Quality.MINMAJ7: Quality.MIN,
    Quality.MIN6: Quality.MIN,
    Quality.HDIM7: Quality.DIM,
    Quality.DIM7: Quality.DIM,
    Quality.SUS2: Quality.MAJ,
    Quality.SUS4: Quality.MAJ,
}

# minor-third qualities as a root-biased listener hears them
_MAJOR_THIRD_OF = {
    Quality.MIN: Quality.MAJ,
    Quality.MIN7: Quality.DOM7,
    Quality.MINMAJ7: Quality.MAJ7,
    Quality.MIN6: Quality.MAJ6,
    Quality.DIM: Quality.MAJ,
    Quality.DIM7: Quality.MAJ,
    Quality.HDIM7: Quality.DOM7,
}


@lru_cache(maxsize=64)
def enthusiast_roots(profile: AnnotatorProfile) -> FrozenSet[int]:
    """Roots on which a seventh enthusiast hears sevenths"""
    rng = np.random.default_rng([profile.seed, zlib.crc32(profile.id.encode())])
    return frozenset(int(root) for root in np.flatnonzero(rng.random(12) < 0.5))


def relabel(label: ChordLabel, profile: AnnotatorProfile) -> ChordLabel:
    if label.is_no_chord or profile.rule is RelabelRule.IDENTITY:
        return label

    if profile.rule is RelabelRule.TRIAD_REDUCER:
        return ChordLabel(root=label.root, quality=_TRIAD_OF.get(label.quality, label.quality))

    if profile.rule is RelabelRule.SEVENTH_ENTHUSIAST:
        if label.root in enthusiast_roots(profile) and not label.extensions:
            if label.quality is Quality.MAJ:
                return ChordLabel(root=label.root, quality=Quality.MAJ7)
            if label.quality is Quality.MIN:
                return ChordLabel(root=label.root, quality=Quality.MIN7)
        return label

    if profile.rule is RelabelRule.ROOT_BIASED:
        quality = _MAJOR_THIRD_OF.get(label.quality)
        return label if quality is None else ChordLabel(root=label.root, quality=quality)

    quality = Quality.MIN if third_class(label) is ThirdClass.FLAT3 else Quality.MAJ
    return ChordLabel(root=label.root, quality=quality)


def annotate(track: AnnotationTrack, profile: AnnotatorProfile) -> AnnotationTrack:
    segments = tuple(
        segment.model_copy(update={"label": relabel(segment.label, profile)})
        for segment in track.segments
    )
    return AnnotationTrack(annotator_id=profile.id, song_id=track.song_id, segments=segments)


def song_id(index: int) -> str:
    return f"song{index:03d}"


def _chord_sequence(spec: SynthSpec, rng: np.random.Generator) -> List[Segment]:
    pool = spec.chord_pool.labels
    segments = []
    start = 0.0
    while start < spec.song_length:
        duration = rng.uniform(spec.min_segment, spec.max_segment)
        end = round(start + duration, 3)  # millisecond grid, exact in LAB text
        if spec.song_length - end < spec.min_segment:
            end = spec.song_length  # no tail shorter than a segment
        label = pool[int(rng.integers(len(pool)))]
        segments.append(Segment(start=start, end=end, label=label))
        start = end
    return segments


def _midi_frequency(note: int) -> float:
    return 440.0 * 2.0 ** ((note - 69) / 12.0)


def _chord_tone(
    label: ChordLabel, n_samples: int, sample_rate: int, rng: np.random.Generator
) -> np.ndarray:
    """Sinusoids on the chord's pitch classes, peak-normalized"""
    signal = np.zeros(n_samples)
    if label.is_no_chord:
        return signal
    t = np.arange(n_samples) / sample_rate
    for pitch_class in sorted(pitch_classes(label)):
        for octave in OCTAVES:
            frequency = _midi_frequency(12 * (octave + 1) + pitch_class)
            phase, harmonic_phase = rng.uniform(0.0, 2.0 * np.pi, size=2)
            signal += np.sin(2.0 * np.pi * frequency * t + phase)
            signal += HARMONIC_GAIN * np.sin(4.0 * np.pi * frequency * t + harmonic_phase)
    peak = np.max(np.abs(signal))
    if peak > 0.0:
        signal *= PEAK / peak
    return signal


def render_song(spec: SynthSpec, song_index: int) -> Tuple[AudioBuffer, AnnotationTrack]:
    """Audio and ground-truth labels; a pure function of (seed, song_index)"""
    if not 0 <= song_index < spec.n_songs:
        raise SynthError(f"song index {song_index} outside 0..{spec.n_songs - 1}")
    rng = np.random.default_rng([spec.seed, song_index])
    segments = _chord_sequence(spec, rng)

    sr = spec.sample_rate
    total = int(round(spec.song_length * sr))
    fade = int(round(spec.crossfade * sr))
    lead = fade // 2
    ramp = (np.arange(fade) + 0.5) / fade if fade else np.zeros(0)
    audio = np.zeros(total)

    for index, segment in enumerate(segments):
        first = int(round(segment.start * sr))
        last = int(round(segment.end * sr))
        # neighbouring segments overlap by ``fade`` samples centred on their boundary
        lo = first - lead if index > 0 else first
        hi = last + fade - lead if index < len(segments) - 1 else last
        lo, hi = max(lo, 0), min(hi, total)
        tone = _chord_tone(segment.label, hi - lo, sr, rng)
        if index > 0 and fade:
            tone[:fade] *= ramp
        if index < len(segments) - 1 and fade:
            tone[-fade:] *= 1.0 - ramp
        audio[lo:hi] += tone

    track = AnnotationTrack(
        annotator_id=TRUTH_ANNOTATOR, song_id=song_id(song_index), segments=tuple(segments)
    )
    return AudioBuffer(samples=audio, sample_rate=sr), track


def profile_vocabulary(pool: Vocabulary, profile: AnnotatorProfile) -> Vocabulary:
    """Image of a chord pool under an annotator's relabeling"""
    return Vocabulary(labels=tuple(relabel(label, profile) for label in pool))


def write_corpus(spec: SynthSpec, out_dir: Path, progress: bool = None) -> CorpusManifest:
    """Render every song and write WAVs, LABs and manifest.json under ``out_dir``"""
    progress = settings.progress if progress is None else progress
    out_dir = Path(out_dir)
    songs = []
    for index in tqdm(range(spec.n_songs), desc="synth", unit="song", disable=not progress):
        audio, truth = render_song(spec, index)
        audio_path = Path("audio") / f"{truth.song_id}.wav"
        Storage.write_audio(out_dir / audio_path, audio)
        annotations = {}
        for profile in spec.annotator_profiles:
            lab_path = Path("labels") / profile.id / f"{truth.song_id}.lab"
            Storage.write_lab(out_dir / lab_path, annotate(truth, profile).segments)
            annotations[profile.id] = lab_path
        songs.append(SongEntry(song_id=truth.song_id, audio=audio_path, annotations=annotations))

    manifest = CorpusManifest(
        songs=songs,
        split=SplitSettings(seed=spec.seed),
        reference_annotator=spec.reference_annotator,
        root=out_dir,
    )
    Storage.write_manifest(out_dir / "manifest.json", manifest)
    logger.info(f"Wrote {spec.n_songs} songs and {len(spec.annotator_profiles)} annotators to {out_dir}")
    return manifest

import numpy as np
import pytest
from pydantic import ValidationError

from app.exceptions import SynthError
from app.models.audio import CqtConfig
from app.models.chords import NO_CHORD, Quality, SeventhClass
from app.models.synth import AnnotatorProfile, RelabelRule, SynthSpec, default_pool, default_profiles
from app.storage import Storage
from app.utils.audio_cqt import compute_cqt
from app.utils.chord_syntax import parse_label, seventh_class
from app.utils.hip_encoding import hip_indices
from app.utils.synth_corpus import (
    PEAK, annotate, enthusiast_roots, profile_vocabulary, relabel, render_song, write_corpus,
)


def small_spec(**overrides):
    values = dict(seed=3, n_songs=2, song_length=9.0, sample_rate=22050)
    values.update(overrides)
    return SynthSpec(**values)


def profile(rule, name="p"):
    return AnnotatorProfile(id=name, rule=RelabelRule(rule))


def test_render_is_deterministic():
    spec = small_spec()
    audio, track = render_song(spec, 1)
    again, same_track = render_song(spec, 1)
    assert np.array_equal(audio.samples, again.samples)
    assert track == same_track
    other, _ = render_song(spec, 0)
    assert not np.array_equal(audio.samples, other.samples)


def test_segments_tile_the_song():
    spec = small_spec(n_songs=5)
    for index in range(spec.n_songs):
        audio, track = render_song(spec, index)
        assert len(audio.samples) == int(round(spec.song_length * spec.sample_rate))
        assert track.segments[0].start == 0.0
        assert track.segments[-1].end == spec.song_length
        for previous, segment in zip(track.segments, track.segments[1:]):
            assert previous.end == segment.start
        for segment in track.segments[:-1]:
            assert spec.min_segment - 1e-3 <= segment.end - segment.start <= spec.max_segment + 1e-3
        assert all(label in spec.chord_pool for label in track.labels)


def test_amplitude_is_bounded():
    audio, _ = render_song(small_spec(), 0)
    assert np.max(np.abs(audio.samples)) <= PEAK + 1e-9


def test_no_chord_is_silent():
    spec = small_spec(chord_pool=["N"])
    audio, track = render_song(spec, 0)
    assert set(label.text for label in track.labels) == {"N"}
    assert not audio.samples.any()


def test_no_chord_segments_are_silent_inside():
    spec = small_spec(chord_pool=["N", "C:maj"], n_songs=4)
    fade = spec.crossfade
    for index in range(spec.n_songs):
        audio, track = render_song(spec, index)
        for segment in track.segments:
            if segment.label == NO_CHORD:
                lo = int((segment.start + fade) * spec.sample_rate) + 1
                hi = int((segment.end - fade) * spec.sample_rate) - 1
                assert not audio.samples[lo:hi].any()


def test_c_major_energy_sits_on_its_pitch_classes():
    spec = small_spec(chord_pool=["C:maj"], n_songs=1)
    audio, _ = render_song(spec, 0)
    spectrum = compute_cqt(audio, CqtConfig()).frames.mean(axis=0)
    # two bins per semitone starting at C1
    chord_bins = {2 * (12 * octave + pc) for octave in range(2, 6) for pc in (0, 4, 7)}
    other_bins = [2 * (12 * octave + pc) for octave in range(2, 5) for pc in (1, 3, 6, 10)]
    assert int(np.argmax(spectrum)) in chord_bins
    assert min(spectrum[b] for b in chord_bins if b < 120) > 3 * max(spectrum[b] for b in other_bins)


def test_out_of_range_song():
    with pytest.raises(SynthError):
        render_song(small_spec(), 2)


@pytest.mark.parametrize("rule,text,expected", [
    ("identity", "G:7", "G:7"),
    ("triad_reducer", "G:7", "G:maj"),
    ("triad_reducer", "A:min7", "A:min"),
    ("triad_reducer", "C:sus4", "C:maj"),
    ("triad_reducer", "B:dim", "B:dim"),
    ("root_biased", "A:min", "A:maj"),
    ("root_biased", "A:min7", "A:7"),
    ("root_biased", "B:dim", "B:maj"),
    ("root_biased", "G:7", "G:7"),
    ("root_biased", "C:sus4", "C:sus4"),
    ("majmin_only", "C:sus4", "C:maj"),
    ("majmin_only", "A:min7", "A:min"),
    ("majmin_only", "B:hdim7", "B:min"),
    ("majmin_only", "B:dim", "B:min"),
    ("triad_reducer", "N", "N"),
    ("root_biased", "N", "N"),
])
def test_relabel_rules(rule, text, expected):
    assert relabel(parse_label(text), profile(rule)).text == expected


def test_seventh_enthusiast():
    enthusiast = profile("seventh_enthusiast", name="sevenths")
    roots = enthusiast_roots(enthusiast)
    assert roots == enthusiast_roots(AnnotatorProfile(id="sevenths", rule=RelabelRule.SEVENTH_ENTHUSIAST))
    for root in range(12):
        major = relabel(parse_label("C:maj").model_copy(update={"root": root}), enthusiast)
        expected = SeventhClass.SHARP7 if root in roots else SeventhClass.STAR7
        assert seventh_class(major) is expected
    assert relabel(parse_label("D:sus4"), enthusiast).text == "D:sus4"


def test_profile_vocabularies():
    pool = default_pool()
    triads = profile_vocabulary(pool, profile("triad_reducer"))
    assert all(seventh_class(label) is SeventhClass.STAR7 for label in triads)
    majmin = profile_vocabulary(pool, profile("majmin_only"))
    assert set(label.quality.value for label in majmin if label != NO_CHORD) <= {"maj", "min"}
    assert len(profile_vocabulary(pool, profile("identity"))) == len(pool)
    assert triads != majmin


def test_every_annotator_relabels_some_chord_out_of_its_vocabulary():
    pool = default_pool()
    for annotator_profile in default_profiles():
        if annotator_profile.rule is RelabelRule.IDENTITY:
            continue
        reachable = {hip_indices(label) for label in profile_vocabulary(pool, annotator_profile)}
        moved = [
            label for label in pool
            if hip_indices(label) not in reachable
            and hip_indices(relabel(label, annotator_profile)) != hip_indices(label)
        ]
        assert moved, annotator_profile.id


def test_most_default_profiles_keep_sevenths_and_sus_thirds():
    profiles = default_profiles()
    for label in default_pool():
        if label.quality is Quality.SUS4:
            slot = 1
        elif seventh_class(label) is not SeventhClass.STAR7:
            slot = 2
        else:
            continue
        kept = sum(hip_indices(relabel(label, p))[slot] == hip_indices(label)[slot] for p in profiles)
        assert kept > len(profiles) / 2, label.text


def test_annotate_keeps_timing():
    _, truth = render_song(small_spec(), 0)
    relabeled = annotate(truth, profile("root_biased", name="roots"))
    assert relabeled.annotator_id == "roots"
    assert [(s.start, s.end) for s in relabeled.segments] == [(s.start, s.end) for s in truth.segments]


@pytest.mark.parametrize("overrides", [
    dict(min_segment=5.0, max_segment=4.0),
    dict(reference_annotator="nobody"),
    dict(annotator_profiles=[]),
    dict(sample_rate=4000),
    dict(chord_pool=["C:maj", "H:min"]),
])
def test_invalid_specs(overrides):
    with pytest.raises((ValidationError, ValueError)):
        small_spec(**overrides)


def test_spec_json_round_trip():
    spec = small_spec(chord_pool=["C:maj", "A:min", "N"])
    restored = SynthSpec.model_validate_json(spec.model_dump_json())
    assert restored == spec
    assert spec.model_dump(mode="json")["chord_pool"] == ["A:min", "C:maj", "N"]


def test_write_corpus(tmp_path):
    spec = small_spec(n_songs=2, song_length=5.0)
    manifest = write_corpus(spec, tmp_path, progress=False)
    assert [song.song_id for song in manifest.songs] == ["song000", "song001"]
    assert manifest.reference_annotator == "reference"

    loaded = Storage.read_manifest(tmp_path / "manifest.json")
    assert set(loaded.annotators) == {"reference", "triads", "sevenths", "roots", "majmin"}
    assert loaded.split.seed == spec.seed
    entry = loaded.songs[1]
    audio = Storage.read_audio(loaded.resolve(entry.audio))
    assert len(audio.samples) == 5 * spec.sample_rate

    _, truth = render_song(spec, 1)
    for annotator_profile in spec.annotator_profiles:
        path = loaded.resolve(entry.annotations[annotator_profile.id])
        track = Storage.read_lab(path, annotator_profile.id, "song001")
        assert track.labels == annotate(truth, annotator_profile).labels

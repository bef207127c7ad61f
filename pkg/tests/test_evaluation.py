import json

import pytest
from hypothesis import given, settings, strategies as st

from app.exceptions import UndefinedScoreError
from app.models.chords import NO_CHORD
from app.models.evaluation import METRIC_ORDER, ExperimentReport, Metric, MetricScore, Outcome
from app.utils.chord_syntax import parse_label, pitch_classes, transpose
from app.utils.evaluation import build_report, compare, score_counts, score_sequence
from tests.conftest import chord_labels


# metric properties are checked on ten thousand label pairs
many_pairs = settings(max_examples=10_000, deadline=None)


def labels(*texts):
    return [parse_label(text) for text in texts]


@pytest.mark.parametrize("metric,estimated,reference,outcome", [
    (Metric.MIREX, "C:maj", "C:maj7", Outcome.CORRECT),
    (Metric.MIREX, "C:maj", "A:min", Outcome.INCORRECT),
    (Metric.MIREX, "N", "N", Outcome.CORRECT),
    (Metric.MIREX, "N", "C:maj", Outcome.INCORRECT),
    (Metric.THIRDS, "G:maj7", "G:maj", Outcome.CORRECT),
    (Metric.SEVENTHS, "G:maj7", "G:maj", Outcome.INCORRECT),
    (Metric.SEVENTHS, "G:maj7", "G:maj7(9)", Outcome.CORRECT),
    (Metric.ROOT, "N", "N", Outcome.CORRECT),
    (Metric.ROOT, "N", "C:maj", Outcome.INCORRECT),
    (Metric.ROOT, "C:min", "C:maj7", Outcome.CORRECT),
    (Metric.MAJMIN, "C:maj7", "C:maj", Outcome.CORRECT),
    (Metric.MAJMIN, "C:maj", "C:sus4", Outcome.EXCLUDED),
    (Metric.MAJMIN, "C:sus4", "C:maj", Outcome.INCORRECT),
    (Metric.MAJMIN, "N", "N", Outcome.CORRECT),
])
def test_compare(metric, estimated, reference, outcome):
    assert compare(metric, parse_label(estimated), parse_label(reference)) is outcome


def test_identical_sequences_score_one():
    sequence = labels("C:maj", "A:min", "N", "G:7")
    for metric in METRIC_ORDER:
        assert score_sequence(metric, sequence, sequence) == 1.0


def test_half_right():
    assert score_sequence(Metric.ROOT, labels("C:maj", "D:maj"), labels("C:min", "E:maj")) == 0.5


def test_excluded_frames_leave_the_denominator():
    score = score_counts(Metric.MAJMIN, labels("C:maj", "C:maj", "D:min"), labels("C:maj", "C:sus4", "D:maj"))
    assert score == MetricScore(correct=1, incorrect=1, excluded=1)
    assert score.total == 3
    assert score.accuracy == 0.5


def test_all_excluded_is_undefined():
    with pytest.raises(UndefinedScoreError):
        score_sequence(Metric.MAJMIN, labels("C:maj", "D:maj"), labels("C:sus4", "D:sus4"))


def test_length_mismatch():
    with pytest.raises(ValueError):
        score_sequence(Metric.ROOT, labels("C:maj"), labels("C:maj", "D:maj"))


@many_pairs
@given(chord_labels())
def test_reflexive(label):
    for metric in METRIC_ORDER:
        assert compare(metric, label, label) is not Outcome.INCORRECT


@many_pairs
@given(chord_labels(), chord_labels())
def test_granularity_is_monotone(estimated, reference):
    if compare(Metric.SEVENTHS, estimated, reference) is Outcome.CORRECT:
        assert compare(Metric.THIRDS, estimated, reference) is Outcome.CORRECT
    if compare(Metric.THIRDS, estimated, reference) is Outcome.CORRECT:
        assert compare(Metric.ROOT, estimated, reference) is Outcome.CORRECT


@many_pairs
@given(chord_labels(), chord_labels())
def test_mirex_is_symmetric(a, b):
    assert compare(Metric.MIREX, a, b) is compare(Metric.MIREX, b, a)


@many_pairs
@given(chord_labels(), chord_labels(), st.integers(-11, 11))
def test_transposition_invariance(estimated, reference, k):
    for metric in METRIC_ORDER:
        assert compare(metric, transpose(estimated, k), transpose(reference, k)) is compare(
            metric, estimated, reference
        )


def test_mirex_needs_three_shared_pitches():
    c_maj, e_min = parse_label("C:maj"), parse_label("E:min")
    assert len(pitch_classes(c_maj) & pitch_classes(e_min)) == 2
    assert compare(Metric.MIREX, c_maj, e_min) is Outcome.INCORRECT
    assert compare(Metric.MIREX, NO_CHORD, NO_CHORD) is Outcome.CORRECT


def test_report_shape_and_perfect_scores():
    references = {
        "a1": labels("C:maj", "A:min", "N"),
        "a2": labels("C:maj7", "A:min7", "N"),
    }
    report = build_report(references, references, agreement=True)
    assert report.annotators == ["a1", "a2"]
    assert all(report.accuracy(a, m) == 1.0 for a in report.annotators for m in METRIC_ORDER)
    assert report.agreement["a1"]["a1"] == {metric: 1.0 for metric in METRIC_ORDER}
    assert report.agreement["a1"]["a2"][Metric.SEVENTHS] == pytest.approx(1 / 3)

    rows = report.to_table().splitlines()
    assert rows[0] == "annotator\troot\tmajmin\tmirex\tthirds\t7ths"
    assert rows[1] == "a1\t" + "\t".join(["1.0000"] * 5)
    document = json.loads(report.to_json())
    assert document["annotators"]["a2"]["majmin"]["evaluated"] == 3
    assert document["agreement"]["a2"]["a1"]["root"] == 1.0


def test_report_metric_subset():
    references = {"a1": labels("C:maj", "C:sus4")}
    estimated = {"a1": labels("C:maj", "C:maj")}
    report = build_report(estimated, references, metrics=["root", "majmin"])
    assert report.metrics == [Metric.ROOT, Metric.MAJMIN]
    assert report.scores["a1"][Metric.MAJMIN].excluded == 1
    assert report.to_table().splitlines()[0] == "annotator\troot\tmajmin"


def test_report_errors():
    with pytest.raises(ValueError):
        build_report({"a1": labels("C:maj")}, {"a2": labels("C:maj")})
    with pytest.raises(UndefinedScoreError):
        build_report({"a1": labels("C:maj")}, {"a1": labels("C:sus4")})


def test_experiment_report():
    reference = labels("C:maj", "A:min", "G:maj", "F:maj")
    truth = {
        "ref": reference,
        "sevenths": labels("C:maj7", "A:min7", "G:7", "F:maj7"),
    }
    ship = build_report(truth, truth)
    iso = build_report({"ref": reference, "sevenths": reference}, truth)
    report = ExperimentReport(
        reference_annotator="ref",
        ship=ship,
        annotator_vs_reference=build_report(truth, {name: reference for name in truth}),
        iso=iso,
        baseline={metric: 1.0 for metric in METRIC_ORDER},
    )
    assert report.ship_beats_iso() == {"ref": False, "sevenths": True}
    summary = report.summary()
    assert summary["ship"].mean[Metric.SEVENTHS] == 1.0
    assert summary["iso"].mean[Metric.SEVENTHS] == 0.5
    assert summary["iso"].std[Metric.SEVENTHS] == 0.5

    lines = report.to_table().splitlines()
    assert lines[0].split("\t")[1:3] == ["ship:root", "ship:majmin"]
    assert len(lines[0].split("\t")) == 1 + 3 * 5
    assert lines[-1].startswith("# ref model vs ref")
    document = json.loads(report.to_json())
    assert document["ship_beats_iso_7ths"]["sevenths"] is True
    assert set(document["arms"]) == {"ship", "ann|iso", "iso"}

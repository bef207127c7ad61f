"""Chord comparison metrics and frame-weighted accuracy reports."""
import logging
from typing import Dict, Iterable, Mapping, Optional, Sequence

from app.exceptions import UndefinedScoreError
from app.models.chords import ChordLabel, ThirdClass
from app.models.evaluation import METRIC_ORDER, EvalReport, Metric, MetricScore, Outcome
from app.utils.chord_syntax import pitch_classes, seventh_class, third_class

logger = logging.getLogger(__name__)

MIREX_SHARED_PITCHES = 3


def _outcome(correct: bool) -> Outcome:
    return Outcome.CORRECT if correct else Outcome.INCORRECT


def compare(metric: Metric, estimated: ChordLabel, reference: ChordLabel) -> Outcome:
    metric = Metric(metric)
    if metric is Metric.ROOT:
        return _outcome(estimated.root == reference.root)

    if metric is Metric.MAJMIN:
        if not reference.is_no_chord and third_class(reference) is ThirdClass.STAR3:
            return Outcome.EXCLUDED
        return _outcome(
            (estimated.root, third_class(estimated)) == (reference.root, third_class(reference))
        )

    if metric is Metric.MIREX:
        if estimated.is_no_chord or reference.is_no_chord:
            return _outcome(estimated.is_no_chord and reference.is_no_chord)
        shared = pitch_classes(estimated) & pitch_classes(reference)
        return _outcome(len(shared) >= MIREX_SHARED_PITCHES)

    if metric is Metric.THIRDS:
        return _outcome(
            estimated.root == reference.root and third_class(estimated) is third_class(reference)
        )

    return _outcome(
        estimated.root == reference.root
        and third_class(estimated) is third_class(reference)
        and seventh_class(estimated) is seventh_class(reference)
    )


def score_counts(
    metric: Metric,
    estimated: Sequence[ChordLabel],
    reference: Sequence[ChordLabel],
) -> MetricScore:
    if len(estimated) != len(reference):
        raise ValueError(f"{len(estimated)} estimated labels but {len(reference)} reference labels")
    counts = {outcome: 0 for outcome in Outcome}
    # labels repeat across frames, so compare each distinct pair once
    pairs: Dict[tuple, int] = {}
    for pair in zip(estimated, reference):
        pairs[pair] = pairs.get(pair, 0) + 1
    for (est, ref), count in pairs.items():
        counts[compare(metric, est, ref)] += count
    return MetricScore(
        correct=counts[Outcome.CORRECT],
        incorrect=counts[Outcome.INCORRECT],
        excluded=counts[Outcome.EXCLUDED],
    )


def score_sequence(
    metric: Metric,
    estimated: Sequence[ChordLabel],
    reference: Sequence[ChordLabel],
) -> float:
    score = score_counts(metric, estimated, reference)
    if score.evaluated == 0:
        raise UndefinedScoreError(f"every frame is excluded under the {Metric(metric).value} metric")
    return score.accuracy


def _checked_scores(
    metrics: Sequence[Metric],
    estimated: Sequence[ChordLabel],
    reference: Sequence[ChordLabel],
    name: str,
) -> Dict[Metric, MetricScore]:
    row = {}
    for metric in metrics:
        score = score_counts(metric, estimated, reference)
        if score.evaluated == 0:
            raise UndefinedScoreError(f"{name}: every frame is excluded under the {metric.value} metric")
        row[metric] = score
    return row


def build_report(
    estimated: Mapping[str, Sequence[ChordLabel]],
    references: Mapping[str, Sequence[ChordLabel]],
    metrics: Optional[Iterable[Metric]] = None,
    agreement: bool = False,
) -> EvalReport:
    """Score each annotator's estimate against that annotator's reference

    With ``agreement`` the references are also scored pairwise, row
    annotator as estimate and column annotator as reference.
    """
    metrics = list(METRIC_ORDER) if metrics is None else [Metric(metric) for metric in metrics]
    missing = [annotator for annotator in estimated if annotator not in references]
    if missing:
        raise ValueError(f"no reference labels for {', '.join(missing)}")

    scores = {
        annotator: _checked_scores(metrics, labels, references[annotator], annotator)
        for annotator, labels in estimated.items()
    }
    matrix = None
    if agreement:
        matrix = {
            row: {
                column: {
                    metric: score.accuracy
                    for metric, score in _checked_scores(
                        metrics, references[row], references[column], f"{row}|{column}"
                    ).items()
                }
                for column in references
            }
            for row in references
        }
    logger.info(f"Scored {len(scores)} annotators on {', '.join(m.value for m in metrics)}")
    return EvalReport(metrics=metrics, scores=scores, agreement=matrix)

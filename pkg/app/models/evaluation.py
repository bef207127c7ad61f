import json
from enum import Enum
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator


class Metric(str, Enum):
    ROOT = "root"
    MAJMIN = "majmin"
    MIREX = "mirex"
    THIRDS = "thirds"
    SEVENTHS = "7ths"


METRIC_ORDER = (Metric.ROOT, Metric.MAJMIN, Metric.MIREX, Metric.THIRDS, Metric.SEVENTHS)


class Outcome(str, Enum):
    CORRECT = "correct"
    INCORRECT = "incorrect"
    EXCLUDED = "excluded"


class MetricScore(BaseModel):
    correct: int = Field(ge=0)
    incorrect: int = Field(ge=0)
    excluded: int = Field(ge=0)

    @property
    def evaluated(self) -> int:
        return self.correct + self.incorrect

    @property
    def total(self) -> int:
        return self.evaluated + self.excluded

    @property
    def accuracy(self) -> float:
        return self.correct / self.evaluated


def _format(value: float) -> str:
    return f"{value:.4f}"


class EvalReport(BaseModel):
    """Accuracy per annotator and metric, with the frame counts behind each"""

    metrics: List[Metric] = Field(default_factory=lambda: list(METRIC_ORDER))
    scores: Dict[str, Dict[Metric, MetricScore]]
    # annotator -> annotator -> metric -> accuracy
    agreement: Optional[Dict[str, Dict[str, Dict[Metric, float]]]] = None

    @model_validator(mode="after")
    def check_metrics(self) -> "EvalReport":
        for annotator, row in self.scores.items():
            missing = [metric.value for metric in self.metrics if metric not in row]
            if missing:
                raise ValueError(f"annotator {annotator!r} has no score for {', '.join(missing)}")
        return self

    @property
    def annotators(self) -> List[str]:
        return list(self.scores)

    def accuracy(self, annotator: str, metric: Metric) -> float:
        return self.scores[annotator][metric].accuracy

    def to_table(self) -> str:
        lines = ["\t".join(["annotator"] + [metric.value for metric in self.metrics])]
        for annotator in self.annotators:
            cells = [_format(self.accuracy(annotator, metric)) for metric in self.metrics]
            lines.append("\t".join([annotator] + cells))
        return "\n".join(lines) + "\n"

    def to_document(self) -> dict:
        document = {
            "metrics": [metric.value for metric in self.metrics],
            "annotators": {
                annotator: {
                    metric.value: {
                        "accuracy": self.accuracy(annotator, metric),
                        "correct": score.correct,
                        "incorrect": score.incorrect,
                        "evaluated": score.evaluated,
                        "excluded": score.excluded,
                    }
                    for metric, score in ((m, self.scores[annotator][m]) for m in self.metrics)
                }
                for annotator in self.annotators
            },
        }
        if self.agreement is not None:
            document["agreement"] = {
                a: {b: {metric.value: value for metric, value in row.items()} for b, row in cols.items()}
                for a, cols in self.agreement.items()
            }
        return document

    def to_json(self) -> str:
        return json.dumps(self.to_document(), indent=2, sort_keys=True) + "\n"


class ArmSummary(BaseModel):
    mean: Dict[Metric, float]
    std: Dict[Metric, float]


class ExperimentReport(BaseModel):
    """Per-annotator comparison of the multi-reference and single-reference arms"""

    reference_annotator: str
    ship: EvalReport          # multi-reference model vs each annotator
    annotator_vs_reference: EvalReport  # annotator labels vs the reference labels
    iso: EvalReport           # single-reference model vs each annotator
    baseline: Dict[Metric, float]  # single-reference model vs the reference

    @property
    def arms(self) -> Dict[str, EvalReport]:
        return {"ship": self.ship, "ann|iso": self.annotator_vs_reference, "iso": self.iso}

    def summary(self) -> Dict[str, ArmSummary]:
        result = {}
        for name, report in self.arms.items():
            mean, std = {}, {}
            for metric in report.metrics:
                values = np.array([report.accuracy(a, metric) for a in report.annotators])
                mean[metric] = float(values.mean())
                std[metric] = float(values.std())
            result[name] = ArmSummary(mean=mean, std=std)
        return result

    def ship_beats_iso(self) -> Dict[str, bool]:
        """Whether the multi-reference arm is strictly better on 7ths"""
        return {
            annotator: self.ship.accuracy(annotator, Metric.SEVENTHS)
            > self.iso.accuracy(annotator, Metric.SEVENTHS)
            for annotator in self.ship.annotators
        }

    def to_table(self) -> str:
        metrics = self.ship.metrics
        header = ["annotator"] + [f"{arm}:{metric.value}" for arm in self.arms for metric in metrics]
        lines = ["\t".join(header)]
        for annotator in self.ship.annotators:
            cells = [
                _format(report.accuracy(annotator, metric))
                for report in self.arms.values()
                for metric in metrics
            ]
            lines.append("\t".join([annotator] + cells))
        for statistic in ("mean", "std"):
            cells = [
                _format(getattr(summary, statistic)[metric])
                for summary in self.summary().values()
                for metric in metrics
            ]
            lines.append("\t".join([statistic] + cells))
        baseline = "\t".join(_format(self.baseline[metric]) for metric in metrics)
        lines.append(f"# {self.reference_annotator} model vs {self.reference_annotator}: {baseline}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        document = {
            "reference_annotator": self.reference_annotator,
            "arms": {name: report.to_document() for name, report in self.arms.items()},
            "baseline": {metric.value: value for metric, value in self.baseline.items()},
            "summary": {
                name: {
                    "mean": {m.value: v for m, v in summary.mean.items()},
                    "std": {m.value: v for m, v in summary.std.items()},
                }
                for name, summary in self.summary().items()
            },
            "ship_beats_iso_7ths": self.ship_beats_iso(),
        }
        return json.dumps(document, indent=2, sort_keys=True) + "\n"

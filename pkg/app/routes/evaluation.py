from fastapi import APIRouter, HTTPException
from pydantic import BaseModel
from typing import List

from app.exceptions import ShipError
from app.models.evaluation import Metric
from app.utils.chord_syntax import parse_label
from app.utils.evaluation import compare, score_counts

router = APIRouter()


class CompareRequest(BaseModel):
    metric: Metric
    estimated: str
    reference: str


class ScoreRequest(BaseModel):
    metric: Metric
    estimated: List[str]
    reference: List[str]


@router.post("/compare")
async def compare_labels(request: CompareRequest):
    try:
        outcome = compare(
            request.metric, parse_label(request.estimated.strip()), parse_label(request.reference.strip())
        )
        return {"metric": request.metric.value, "outcome": outcome.value}
    except ShipError as e:
        raise HTTPException(status_code=400, detail=f"Failed to compare labels: {str(e)}")


@router.post("/score")
async def score_labels(request: ScoreRequest):
    """Frame accuracy of an estimated label sequence"""
    if len(request.estimated) != len(request.reference):
        raise HTTPException(status_code=400, detail="Estimated and reference sequences differ in length")
    try:
        score = score_counts(
            request.metric,
            [parse_label(text.strip()) for text in request.estimated],
            [parse_label(text.strip()) for text in request.reference],
        )
        if score.evaluated == 0:
            raise HTTPException(status_code=400, detail="Every frame is excluded under this metric")
        return {
            "metric": request.metric.value,
            "accuracy": score.accuracy,
            "correct": score.correct,
            "incorrect": score.incorrect,
            "excluded": score.excluded,
        }
    except HTTPException:
        raise
    except ShipError as e:
        raise HTTPException(status_code=400, detail=f"Failed to score labels: {str(e)}")

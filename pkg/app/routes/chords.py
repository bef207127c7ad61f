from fastapi import APIRouter, HTTPException
from pydantic import BaseModel
from typing import List

from app.exceptions import ShipError
from app.models.profiles import COLUMN_NAMES
from app.utils.chord_syntax import parse_label, pitch_classes, seventh_class, third_class
from app.utils.hip_encoding import encode_ship

router = APIRouter()


class LabelRequest(BaseModel):
    label: str


class LabelsRequest(BaseModel):
    labels: List[str]


@router.post("/parse")
async def parse_chord(request: LabelRequest):
    """Parse a chord label and classify its intervals"""
    try:
        label = parse_label(request.label.strip())
        return {
            "text": label.text,
            "root": label.root,
            "quality": label.quality.value if label.quality else None,
            "extensions": list(label.extensions),
            "third": third_class(label).value,
            "seventh": seventh_class(label).value,
            "pitch_classes": sorted(pitch_classes(label)),
        }
    except ShipError as e:
        raise HTTPException(status_code=400, detail=f"Failed to parse label: {str(e)}")


@router.post("/ship")
async def chord_ship(request: LabelsRequest):
    """SHIP of several annotators' labels for one frame"""
    try:
        ship = encode_ship([parse_label(text.strip()) for text in request.labels])
        return {
            "columns": list(COLUMN_NAMES),
            "values": ship.values.tolist(),
            "text": ship.to_text(),
        }
    except ShipError as e:
        raise HTTPException(status_code=400, detail=f"Failed to encode labels: {str(e)}")

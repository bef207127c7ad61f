from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, ValidationError
from typing import List

from app.exceptions import ShipError
from app.models.annotations import Vocabulary
from app.models.profiles import Ship
from app.utils.chord_syntax import parse_label
from app.utils.decoder import decode

router = APIRouter()


class DecodeRequest(BaseModel):
    ship: List[float]
    vocabulary: List[str]


@router.post("/decode")
async def decode_ship(request: DecodeRequest):
    """Rank an annotator's vocabulary against a predicted SHIP"""
    if not request.vocabulary:
        raise HTTPException(status_code=400, detail="Vocabulary cannot be empty")
    try:
        ship = Ship(values=request.ship)
        vocabulary = Vocabulary(labels=tuple(parse_label(text.strip()) for text in request.vocabulary))
        result = decode(ship, vocabulary)
        return {
            "chosen": result.chosen.text,
            "uniform_fallback": result.uniform_fallback,
            "ranking": [
                {
                    "label": entry.label.text,
                    "combined_probability": entry.combined_probability,
                    "probability": entry.probability,
                }
                for entry in result.ranking
            ],
        }
    except (ShipError, ValidationError) as e:
        raise HTTPException(status_code=400, detail=f"Failed to decode: {str(e)}")

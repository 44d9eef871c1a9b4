from fastapi import APIRouter, HTTPException
from pydantic import BaseModel
from typing import Optional
from app.core.config import settings
from app.models.code import Word
from app.services import covercode

router = APIRouter()

class CodeResponse(BaseModel):
    length: int
    order: int
    hamming_len: int
    density: float
    codeword_count: int
    covering: Optional[bool] = None  # only computed for short codes

class FlipRequest(BaseModel):
    word: str

class FlipResponse(BaseModel):
    length: int
    flip: Optional[int] = None
    codeword: str


@router.get("/codes/{length}", response_model=CodeResponse)
def describe_code(length: int):
    if length < 0:
        raise HTTPException(status_code=422, detail="Code length must be non-negative")
    code = covercode.build_code(length)
    covering = covercode.verify_covering(code) if length <= min(settings.COVER_VERIFY_MAX_LEN, 16) else None
    return CodeResponse(
        **code.model_dump(),
        density=covercode.density(code),
        codeword_count=covercode.codeword_count(code),
        covering=covering,
    )


@router.post("/codes/flip", response_model=FlipResponse)
def flip_to_code(request: FlipRequest):
    """Index whose flip moves the word into the code of its own length (null if already a codeword)."""
    w = Word.from_string(request.word)
    t = covercode.flip_to_code(covercode.build_code(w.length), w)
    return FlipResponse(length=w.length, flip=t, codeword=str(w if t is None else w.flipped(t)))

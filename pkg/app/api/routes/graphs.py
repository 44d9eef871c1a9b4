from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field
from typing import Any, Dict, Optional
from app.core.exceptions import FormatError
from app.models.graph import Graph
from app.models.properties import AttackOutcome
from app.services import canon_prop, degseq_prop, graphcore
import logging

router = APIRouter()
logger = logging.getLogger(__name__)

# Request/Response Models
class GraphRequest(BaseModel):
    graph: str = Field(..., description="ASGRAPH v1 document: 'n=<n>' line, then the lowercase hex payload")

class QkRequest(GraphRequest):
    k: Optional[int] = Field(None, description="Fixed k; the default schedule picks one when absent")
    exhaustive: bool = False

class DegRequest(GraphRequest):
    down_len: Optional[int] = None
    up_len: Optional[int] = None
    strict: bool = False

class QkDecisionResponse(BaseModel):
    n: int
    k: int
    decision: Dict[str, Any]

class AttackResponse(BaseModel):
    n: int
    k: Optional[int] = None
    outcome: AttackOutcome
    graph: str = Field(..., description="The output graph in ASGRAPH v1")

class DegDecisionResponse(BaseModel):
    n: int
    in_a: bool
    ydown: str
    yup: str
    z: int


def _parse(text: str) -> Graph:
    try:
        return graphcore.parse(text.encode("ascii"))
    except UnicodeEncodeError as e:
        raise HTTPException(status_code=400, detail=f"Graph text is not ASCII: {e}")
    except FormatError as e:
        logger.warning(f"Rejected graph document: {e}")
        raise HTTPException(status_code=400, detail=str(e))


def _k(request: QkRequest, n: int) -> int:
    return request.k if request.k is not None else canon_prop.choose_k(n, canon_prop.default_schedule())


@router.post("/graphs/decide-qk", response_model=QkDecisionResponse)
def decide_qk(request: QkRequest):
    g = _parse(request.graph)
    k = _k(request, g.n)
    return QkDecisionResponse(n=g.n, k=k, decision=canon_prop.decide_qk(g, k).model_dump(mode="json"))


@router.post("/graphs/attack-qk", response_model=AttackResponse)
def attack_qk(request: QkRequest):
    g = _parse(request.graph)
    k = _k(request, g.n)
    out, outcome = canon_prop.adversary_qk(g, k, exhaustive=request.exhaustive)
    logger.info(f"attack-qk n={g.n} k={k}: {outcome.reason.value}")
    return AttackResponse(n=g.n, k=k, outcome=outcome, graph=graphcore.serialize(out).decode("ascii"))


@router.post("/graphs/decide-deg", response_model=DegDecisionResponse)
def decide_deg(request: DegRequest):
    g = _parse(request.graph)
    win = degseq_prop.window(g.n)
    codes = degseq_prop.default_codes(win, request.down_len, request.up_len)
    p = degseq_prop.profile(g, win)
    return DegDecisionResponse(n=g.n, in_a=degseq_prop.decide_a(p, codes), ydown=str(p.ydown), yup=str(p.yup), z=p.z)


@router.post("/graphs/attack-deg", response_model=AttackResponse)
def attack_deg(request: DegRequest):
    g = _parse(request.graph)
    codes = degseq_prop.default_codes(degseq_prop.window(g.n), request.down_len, request.up_len)
    out, outcome = degseq_prop.adversary_a(g, codes, strict=request.strict)
    logger.info(f"attack-deg n={g.n}: {outcome.reason.value}")
    return AttackResponse(n=g.n, outcome=outcome, graph=graphcore.serialize(out).decode("ascii"))

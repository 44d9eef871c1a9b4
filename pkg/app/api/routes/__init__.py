from fastapi import APIRouter
from app.api.routes import graphs, codes, experiments

router = APIRouter()

router.include_router(graphs.router, tags=["Graphs"])
router.include_router(codes.router, tags=["Codes"])
router.include_router(experiments.router, tags=["Experiments"])

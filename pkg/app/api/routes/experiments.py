from fastapi import APIRouter
from app.core.config import settings
from app.models.experiment import EstimateResult, ExperimentConfig, ParityReport, UniformityReport
from app.services import mc_harness
from typing import Union
import logging

router = APIRouter()
logger = logging.getLogger(__name__)


@router.post("/experiments", response_model=Union[EstimateResult, UniformityReport, ParityReport])
def run_experiment(config: ExperimentConfig):
    """Runs synchronously in the worker thread; trials fan out to settings.JOBS processes."""
    logger.info(f"Experiment request: {config.experiment.value} n={config.n} trials={config.trials}")
    return mc_harness.run_experiment(config, jobs=settings.JOBS)

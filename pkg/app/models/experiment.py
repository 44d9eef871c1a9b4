from enum import Enum
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.config import settings
from app.models.graph import UINT64_MAX

DEGREE_RANGE_PARTS = ("1", "2", "3", "4", "5", "P1", "P2", "P3", "P4")


class ExperimentId(str, Enum):
    prob_qk = "prob_qk"
    prob_a = "prob_a"
    attack_qk = "attack_qk"
    attack_a = "attack_a"
    mod_uniformity = "mod_uniformity"
    parity_uniformity = "parity_uniformity"
    degree_range = "degree_range"
    resolution_rate = "resolution_rate"


class ExperimentConfig(BaseModel):
    """
    One Monte Carlo run. Trial i draws G(n, 1/2) from the stream (seed, i),
    so the result depends on nothing but these fields.
    """
    model_config = ConfigDict(frozen=True)

    experiment: ExperimentId
    n: int = Field(..., ge=1)
    trials: int = Field(..., ge=1)
    seed: int = Field(0, ge=0, le=UINT64_MAX)
    k: Optional[int] = Field(None, description="Fixed k for Q_k; otherwise chosen from the schedule")
    m: Optional[int] = Field(None, description="Modulus for mod_uniformity")
    schedule: Optional[str] = Field(None, description="k-schedule file; default schedule when absent")
    down_len: Optional[int] = Field(None, ge=0)
    up_len: Optional[int] = Field(None, ge=0)
    strict_attack: bool = False
    exhaustive: bool = False
    part: Optional[str] = Field(None, description="degree_range statement: 1..5 or P1..P4")
    z: float = Field(default_factory=lambda: settings.WILSON_Z, gt=0)

    @model_validator(mode="after")
    def check_parameters(self):
        if self.experiment == ExperimentId.mod_uniformity and self.m is None:
            raise ValueError("mod_uniformity needs the modulus m")
        if self.experiment == ExperimentId.degree_range and self.part not in DEGREE_RANGE_PARTS:
            raise ValueError(f"degree_range needs part in {', '.join(DEGREE_RANGE_PARTS)}, got {self.part!r}")
        if self.k is not None and self.schedule is not None:
            raise ValueError("Give either k or a schedule, not both")
        return self


class EstimateResult(BaseModel):
    experiment: ExperimentId
    n: int
    k: Optional[int] = None
    m: Optional[int] = None
    trials: int
    seed: int
    successes: int
    frequency: float
    ci_low: float
    ci_high: float
    elapsed_s: float
    notes: Dict[str, Any] = Field(default_factory=dict)
    z: float
    config: Dict[str, Any] = Field(..., description="Echo of the run, with derived k and code lengths filled in")


class UniformityReport(BaseModel):
    """Degree residues mod m: vertex 1 alone and the pair (vertex 1, vertex 2)."""
    experiment: ExperimentId = ExperimentId.mod_uniformity
    n: int
    m: int
    trials: int
    seed: int
    marginal_counts: List[int]
    marginal_tv: float
    marginal_chi2: float
    marginal_pvalue: float
    pair_tv: float
    pair_chi2: float
    pair_pvalue: float
    elapsed_s: float
    config: Dict[str, Any]


class ParityReport(BaseModel):
    experiment: ExperimentId = ExperimentId.parity_uniformity
    n: int
    trials: int
    seed: int
    ydown_means: List[float]
    yup_means: List[float]
    max_bit_deviation: float = Field(..., description="max |mean - 1/2| over all parity bits")
    z_mod4: List[float] = Field(..., description="Frequency of Z mod 4 = 0, 1, 2, 3")
    good_z_frequency: float = Field(..., description="P[Z mod 4 in {0, 1}]")
    a_frequency: float
    elapsed_s: float
    config: Dict[str, Any]


ExperimentReport = Union[EstimateResult, UniformityReport, ParityReport]

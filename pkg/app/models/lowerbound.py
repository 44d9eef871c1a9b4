from enum import Enum
from typing import Dict, Tuple

from pydantic import BaseModel, ConfigDict, Field


class SeqStats(BaseModel):
    """Summary of a labeled degree sequence d_1..d_n."""
    model_config = ConfigDict(frozen=True)

    n: int
    degrees: Tuple[int, ...]
    mean: float = Field(..., description="d = (1/n) sum d_i")
    mu: float = Field(..., description="d / (n-1)")
    gamma: float = Field(..., description="(n-1)^-2 sum (d_i - d)^2")
    counts: Dict[int, int] = Field(..., description="n_y for every degree y present")

    def count(self, y: int) -> int:
        return self.counts.get(y, 0)


class ThresholdSet(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    zeta1: float
    zeta2: float
    a: float = Field(..., description="sqrt(n ln n / 2)")
    b: float = Field(..., description="sqrt(n ln n (1 - zeta1)) / 2")
    c: float = Field(..., description="sqrt(n ln n (1 - zeta2)) / 2")


class DegreeLabel(str, Enum):
    good = "good"
    very_good = "very_good"
    bad = "bad"


class DegreeClass(BaseModel):
    """Label of every degree 0..n-1; a very_good degree is also good."""
    model_config = ConfigDict(frozen=True)

    n: int
    labels: Dict[int, DegreeLabel]

    def is_good(self, y: int) -> bool:
        return self.labels.get(y, DegreeLabel.bad) in (DegreeLabel.good, DegreeLabel.very_good)

    def is_very_good(self, y: int) -> bool:
        return self.labels.get(y, DegreeLabel.bad) == DegreeLabel.very_good


class PConditions(BaseModel):
    model_config = ConfigDict(frozen=True)

    p1: bool
    p2: bool
    p3: bool
    p4: bool
    p3_i: bool
    p3_ii: bool

    def all(self) -> bool:
        return self.p1 and self.p2 and self.p3 and self.p4


class DegreeRangeReport(BaseModel):
    """The five degree-range statements, evaluated on one graph."""
    model_config = ConfigDict(frozen=True)

    part1: bool
    part2: bool
    part3: bool
    part4: bool
    part5: bool

    def part(self, index: int) -> bool:
        return getattr(self, f"part{index}")

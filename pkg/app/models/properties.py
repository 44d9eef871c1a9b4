from enum import Enum
from typing import Dict, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator

from app.models.code import ExtendedHammingCode, Word
from app.models.graph import EdgeSlot

RESIDUE_CLASSES = 11


def valid_k(k: int) -> bool:
    return k > RESIDUE_CLASSES and k % 2 == 1 and k % RESIDUE_CLASSES != 0


class KPartition(BaseModel):
    """
    V = W ∪ U_0 ∪ R for a fixed k. Vertex sets are sorted tuples of 1-based
    ids; dvec row i belongs to W[i] and holds its neighbour counts in U_1..U_10.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    k: int
    W: Tuple[int, ...]
    U: Tuple[Tuple[int, ...], ...] = Field(..., description="U_0..U_10")
    dvec: np.ndarray = Field(..., description="|W| x 10 neighbour counts into U_1..U_10")

    @property
    def U0(self) -> Tuple[int, ...]:
        return self.U[0]

    @property
    def R(self) -> Tuple[int, ...]:
        return tuple(sorted(v for part in self.U[1:] for v in part))

    @field_serializer("dvec")
    def _dvec_rows(self, dvec: np.ndarray):
        return dvec.tolist()


class QkDecision(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    k: int
    in_qk: bool
    resolved: bool = Field(..., description="Event B: W is resolved by R")
    w_size: int
    word: Optional[Word] = Field(None, exclude=True, description="Canonical word of G|_W")
    word_length: Optional[int] = None
    code_order: Optional[int] = None
    code_member: Optional[bool] = None
    order: Optional[Tuple[int, ...]] = Field(None, exclude=True, description="W in canonical label order")


class AttackReason(str, Enum):
    already_in_property = "already_in_property"
    unresolved_hence_in = "unresolved_hence_in"
    code_flip_applied = "code_flip_applied"
    flip_breaks_partition = "flip_breaks_partition"
    no_flip_found = "no_flip_found"


class AttackOutcome(BaseModel):
    model_config = ConfigDict(frozen=True)

    success: bool
    flipped: Optional[EdgeSlot] = None
    reason: AttackReason
    action: Optional[Literal["add", "delete"]] = None


class KSchedule(BaseModel):
    """(N_k, k) thresholds, strictly increasing in both coordinates."""
    model_config = ConfigDict(frozen=True)

    entries: Tuple[Tuple[int, int], ...]

    @field_validator("entries")
    @classmethod
    def check_entries(cls, entries):
        if not entries:
            raise ValueError("A k-schedule needs at least one (N_k, k) entry")
        for threshold, k in entries:
            if threshold < 1:
                raise ValueError(f"Threshold {threshold} must be positive")
            if not valid_k(k):
                raise ValueError(f"k={k} must be odd, > 11 and not divisible by 11")
        for (n1, k1), (n2, k2) in zip(entries, entries[1:]):
            if not (n2 > n1 and k2 > k1):
                raise ValueError("Schedule must be strictly increasing in N_k and k")
        return entries


class DegreeWindow(BaseModel):
    """
    D_n = [d_lower, d_upper], split at mid = floor(n/2) into
    D_{n,1} = [d_lower, mid-1] and D_{n,2} = [mid+1, d_upper].
    """
    model_config = ConfigDict(frozen=True)

    n: int
    bound: float = Field(..., description="B_n = sqrt(n (ln n - 2 sqrt(ln n))) / 2")
    d_lower: int
    d_upper: int
    mid: int
    delta1: int
    delta2: int

    @property
    def lower_part(self) -> Tuple[int, int]:
        return self.d_lower, self.mid - 1

    @property
    def upper_part(self) -> Tuple[int, int]:
        return self.mid + 1, self.d_upper

    @property
    def lower_shifted(self) -> Tuple[int, int]:
        return self.d_lower + 1, self.mid

    @property
    def upper_shifted(self) -> Tuple[int, int]:
        return self.mid + 2, self.d_upper + 1


class ACodes(BaseModel):
    model_config = ConfigDict(frozen=True)

    down: ExtendedHammingCode
    up: ExtendedHammingCode


class DegreeProfile(BaseModel):
    """
    Counts N_y and cumulative X_y on [d_lower-1, d_upper+2], the parity
    vectors and the checksum Z.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    window: DegreeWindow
    counts: Dict[int, int]
    cumulative: Dict[int, int]
    ydown: Word
    yup: Word
    z: int

    @field_serializer("ydown", "yup")
    def _word_text(self, w: Word) -> str:
        return str(w)


class FlipEffect(BaseModel):
    """Parity bits toggled in Ydown / Yup (1-based) and the change in Z."""
    model_config = ConfigDict(frozen=True)

    ydown_bits: Tuple[int, ...]
    yup_bits: Tuple[int, ...]
    z_delta: int

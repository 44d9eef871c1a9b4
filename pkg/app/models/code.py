from typing import Iterable, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.core.exceptions import InputError


class Word:
    """
    Immutable binary word. Public indices are 1-based; index 0 is never valid.
    Backed by a read-only numpy bool array.
    """

    __slots__ = ("_bits",)

    def __init__(self, bits: Union[Iterable[int], np.ndarray] = ()):
        arr = np.array(bits, dtype=bool).ravel()
        arr.setflags(write=False)
        self._bits = arr

    @classmethod
    def zeros(cls, length: int) -> "Word":
        return cls(np.zeros(length, dtype=bool))

    @classmethod
    def from_string(cls, text: str) -> "Word":
        """Parse '0101…'; spaces and '·' separators are ignored."""
        cleaned = text.replace(" ", "").replace("·", "")
        if any(ch not in "01" for ch in cleaned):
            raise InputError(f"Word may only contain 0 and 1, got {text!r}")
        return cls(np.frombuffer(cleaned.encode(), dtype=np.uint8) == ord("1"))

    @classmethod
    def from_int(cls, value: int, length: int) -> "Word":
        # bit 1 is the most significant of `length` bits
        return cls([(value >> (length - t)) & 1 for t in range(1, length + 1)])

    @property
    def length(self) -> int:
        return int(self._bits.size)

    @property
    def bits(self) -> np.ndarray:
        return self._bits

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, t: int) -> int:
        if not 1 <= t <= self.length:
            raise IndexError(f"bit index {t} outside 1..{self.length}")
        return int(self._bits[t - 1])

    def flipped(self, t: int) -> "Word":
        if not 1 <= t <= self.length:
            raise IndexError(f"bit index {t} outside 1..{self.length}")
        arr = self._bits.copy()
        arr[t - 1] ^= True
        return Word(arr)

    def weight(self) -> int:
        return int(np.count_nonzero(self._bits))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Word):
            return NotImplemented
        return self.length == other.length and bool(np.array_equal(self._bits, other._bits))

    def __hash__(self) -> int:
        return hash((self.length, np.packbits(self._bits).tobytes()))

    def __str__(self) -> str:
        return (self._bits.astype(np.uint8) + ord("0")).tobytes().decode()

    def __repr__(self) -> str:
        text = str(self)
        if len(text) > 64:
            text = text[:61] + "..."
        return f"Word({text!r}, length={self.length})"


class ExtendedHammingCode(BaseModel):
    """
    Radius-1 covering code of length N: words whose length-m prefix is a
    Hamming(m) codeword, m = 2^r - 1 the largest such value <= N. Suffix bits
    m+1..N are free.
    """
    model_config = ConfigDict(frozen=True)

    length: int = Field(..., ge=0, description="Code length N")
    order: int = Field(..., ge=0, description="r, the largest integer with 2^r - 1 <= N")
    hamming_len: int = Field(..., ge=0, description="m = 2^r - 1, the constrained prefix")

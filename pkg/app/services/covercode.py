"""
Binary covering codes of radius 1.

The working code is the Hamming code of the largest length m = 2^r - 1 <= N,
extended to length N by free suffix bits. Bit t of the prefix has syndrome
column binary(t), so a word's syndrome is the XOR of its set prefix positions
and a nonzero syndrome s names the single bit whose flip lands in the code.
"""
import logging
from functools import lru_cache
from typing import FrozenSet, List, Optional

import numpy as np

from app.core.config import settings
from app.core.exceptions import InputError
from app.models.code import ExtendedHammingCode, Word

logger = logging.getLogger(__name__)

# prefix positions are scanned in blocks so long words never allocate
# a full index array
_SYNDROME_BLOCK = 1 << 20


def hamming_order(length: int) -> int:
    """Largest r with 2^r - 1 <= length."""
    return (length + 1).bit_length() - 1


@lru_cache(maxsize=settings.CODE_CACHE_SIZE)
def build_code(length: int) -> ExtendedHammingCode:
    if length < 0:
        raise InputError(f"Code length must be non-negative, got {length}")
    order = hamming_order(length)
    return ExtendedHammingCode(length=length, order=order, hamming_len=(1 << order) - 1)


def _check_length(code: ExtendedHammingCode, w: Word) -> None:
    if w.length != code.length:
        raise InputError(f"Word length {w.length} does not match code length {code.length}")


def syndrome(code: ExtendedHammingCode, w: Word) -> int:
    _check_length(code, w)
    prefix = w.bits[: code.hamming_len]
    acc = 0
    for offset in range(0, prefix.size, _SYNDROME_BLOCK):
        positions = np.flatnonzero(prefix[offset: offset + _SYNDROME_BLOCK]).astype(np.int64)
        if positions.size:
            acc ^= int(np.bitwise_xor.reduce(positions + (offset + 1)))
    return acc


def contains(code: ExtendedHammingCode, w: Word) -> bool:
    return syndrome(code, w) == 0


def flip_to_code(code: ExtendedHammingCode, w: Word) -> Optional[int]:
    """1-based index whose flip moves w into the code, or None if w is a codeword."""
    s = syndrome(code, w)
    return s or None


def density(code: ExtendedHammingCode) -> float:
    return 2.0 ** -code.order


def codeword_count(code: ExtendedHammingCode) -> int:
    return 1 << (code.length - code.order)


def _membership_table(code: ExtendedHammingCode) -> np.ndarray:
    """member[x] for every word x in 0..2^N-1, bit t of x at position N-t."""
    n = code.length
    words = np.arange(1 << n, dtype=np.int64)
    syn = np.zeros(words.size, dtype=np.int64)
    for t in range(1, code.hamming_len + 1):
        syn ^= ((words >> (n - t)) & 1) * t
    return syn == 0


def verify_covering(code: ExtendedHammingCode) -> bool:
    """Exhaustive check that every word of length N lies within distance 1 of the code."""
    if code.length > settings.COVER_VERIFY_MAX_LEN:
        raise InputError(
            f"verify_covering is exhaustive over 2^N words; N={code.length} exceeds "
            f"{settings.COVER_VERIFY_MAX_LEN}"
        )
    member = _membership_table(code)
    words = np.arange(member.size, dtype=np.int64)
    covered = member.copy()
    for j in range(code.length):
        covered |= member[words ^ (1 << j)]
    ok = bool(covered.all())
    logger.debug(f"verify_covering N={code.length}: {int(member.sum())} codewords, covering={ok}")
    return ok


def count_codewords_exhaustive(code: ExtendedHammingCode) -> int:
    if code.length > settings.COVER_VERIFY_MAX_LEN:
        raise InputError(f"Exhaustive count refused for N={code.length}")
    return int(_membership_table(code).sum())


def exhaustive_min_cover(length: int) -> FrozenSet[Word]:
    """
    Minimum radius-1 covering code of the given length by exact search.

    Iterative deepening over code sizes; at each level the lowest uncovered
    word must be covered by one of its N+1 ball members, which bounds the
    branching.
    """
    if not 0 <= length <= settings.MIN_COVER_MAX_LEN:
        raise InputError(f"exhaustive_min_cover supports N in 0..{settings.MIN_COVER_MAX_LEN}, got {length}")
    size = 1 << length
    full = (1 << size) - 1
    balls = []
    for x in range(size):
        mask = 1 << x
        for j in range(length):
            mask |= 1 << (x ^ (1 << j))
        balls.append(mask)

    def search(covered: int, budget: int, chosen: List[int]) -> Optional[List[int]]:
        if covered == full:
            return chosen
        if budget == 0:
            return None
        uncovered = ~covered & full
        target = (uncovered & -uncovered).bit_length() - 1
        for centre in [target] + [target ^ (1 << j) for j in range(length)]:
            found = search(covered | balls[centre], budget - 1, chosen + [centre])
            if found is not None:
                return found
        return None

    for k in range(1, size + 1):
        found = search(0, k, [])
        if found is not None:
            logger.info(f"Minimum covering code of length {length} has {k} words")
            return frozenset(Word.from_int(x, length) for x in found)
    raise AssertionError("unreachable: the full space is always a cover")

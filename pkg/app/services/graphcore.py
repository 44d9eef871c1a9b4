"""
Graph operations on the bit-matrix representation and the ASGRAPH v1 codec.

Slots are the unordered pairs (u, v), u < v, numbered 1..n(n-1)/2 in
lexicographic order. Words, random bits and the file payload all follow
that order.
"""
import hashlib
import logging
import re
from bisect import bisect_left
from collections import Counter
from functools import lru_cache
from typing import List, Optional, Sequence

import numpy as np

from app.core.config import settings
from app.core.exceptions import FormatError, InputError
from app.models.code import Word
from app.models.graph import EdgeSlot, Graph, SeedSpec

logger = logging.getLogger(__name__)

FORMAT_NAME = "ASGRAPH v1"
_HEADER_RE = re.compile(r"^n=(0|[1-9][0-9]*)$")
_HEX_RE = re.compile(r"^[0-9a-f]*$")


def slot_count(n: int) -> int:
    return n * (n - 1) // 2


def _slots_before_row(u: int, n: int) -> int:
    # slots in rows 1..u-1
    return (u - 1) * (2 * n - u) // 2


def slot_index(u: int, v: int, n: int) -> int:
    slot = EdgeSlot.of(u, v)
    if slot.v > n:
        raise InputError(f"Vertex {slot.v} outside 1..{n}")
    return _slots_before_row(slot.u, n) + (slot.v - slot.u)


def slot_pair(index: int, n: int) -> EdgeSlot:
    if not 1 <= index <= slot_count(n):
        raise InputError(f"Slot index {index} outside 1..{slot_count(n)}")
    # first row whose cumulative slot count reaches index
    u = bisect_left(range(1, n), index, key=lambda row: _slots_before_row(row + 1, n)) + 1
    return EdgeSlot(u=u, v=u + index - _slots_before_row(u, n))


@lru_cache(maxsize=8)
def _upper_mask(n: int) -> np.ndarray:
    mask = np.triu(np.ones((n, n), dtype=bool), 1)
    mask.setflags(write=False)
    return mask


def _check_vertex(v: int, n: int) -> None:
    if not 1 <= v <= n:
        raise InputError(f"Vertex {v} outside 1..{n}")


def degrees(g: Graph) -> np.ndarray:
    return g.degrees()


def random_graph(n: int, seed: SeedSpec) -> Graph:
    """Uniform G(n, 1/2): one fair bit per slot, consumed in lexicographic slot order."""
    if n < 1:
        raise InputError(f"random_graph needs n >= 1, got {n}")
    total = slot_count(n)
    if total == 0:
        return Graph.empty(n)
    raw = seed.generator().bytes((total + 7) // 8)
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), count=total).astype(bool)
    adj = np.zeros((n, n), dtype=bool)
    # boolean-mask assignment walks the upper triangle row-major, i.e. slot order
    adj[_upper_mask(n)] = bits
    adj |= adj.T
    return Graph._wrap(adj)


def flip(g: Graph, slot: EdgeSlot) -> Graph:
    _check_vertex(slot.v, g.n)
    adj = g.adj.copy()
    a, b = slot.u - 1, slot.v - 1
    adj[a, b] = adj[b, a] = not adj[a, b]
    return Graph._wrap(adj)


def diff_slots(g: Graph, h: Graph) -> List[EdgeSlot]:
    if g.n != h.n:
        raise InputError(f"Graphs have different orders {g.n} and {h.n}")
    us, vs = np.nonzero(np.triu(g.adj ^ h.adj, 1))
    return [EdgeSlot(u=int(a) + 1, v=int(b) + 1) for a, b in zip(us, vs)]


def induced(g: Graph, vertices: Sequence[int]) -> Graph:
    """Subgraph on `vertices`, relabeled 1..|S| in increasing vertex order."""
    chosen = sorted(set(int(v) for v in vertices))
    for v in chosen:
        _check_vertex(v, g.n)
    idx = np.asarray(chosen, dtype=np.int64) - 1
    return Graph._wrap(g.adj[np.ix_(idx, idx)])


def _as_permutation(perm: Sequence[int], n: int) -> np.ndarray:
    arr = np.asarray(perm, dtype=np.int64)
    if arr.shape != (n,) or not np.array_equal(np.sort(arr), np.arange(1, n + 1)):
        raise InputError(f"Not a permutation of 1..{n}")
    return arr - 1


def permute(g: Graph, perm: Sequence[int]) -> Graph:
    """perm[i-1] = pi(i); the output has pi(u) ~ pi(v) iff u ~ v in g."""
    image = _as_permutation(perm, g.n)
    inverse = np.empty_like(image)
    inverse[image] = np.arange(g.n)
    return Graph._wrap(g.adj[np.ix_(inverse, inverse)])


def encode_word(g: Graph, order: Optional[Sequence[int]] = None) -> Word:
    """
    order[i-1] is the vertex that receives label i. The word holds the
    relabeled graph's slots in lexicographic order.
    """
    if order is None:
        return Word(g.adj[_upper_mask(g.n)])
    idx = _as_permutation(order, g.n)
    return Word(g.adj[np.ix_(idx, idx)][_upper_mask(g.n)])


def encode_sub_word(g: Graph, labeled: Sequence[int]) -> Word:
    """Word of the subgraph induced on `labeled`, vertex labeled[i-1] getting label i."""
    idx = np.asarray(labeled, dtype=np.int64) - 1
    size = idx.size
    if size < 2:
        return Word.zeros(0)
    return Word(g.adj[np.ix_(idx, idx)][_upper_mask(size)])


def decode_word(n: int, w: Word) -> Graph:
    if w.length != slot_count(n):
        raise InputError(f"Word of length {w.length} cannot encode a graph on {n} vertices")
    adj = np.zeros((n, n), dtype=bool)
    if n:
        adj[_upper_mask(n)] = w.bits
    adj |= adj.T
    return Graph._wrap(adj)


def _digest(values: np.ndarray) -> int:
    return int.from_bytes(hashlib.blake2b(values.tobytes(), digest_size=8).digest(), "little")


def iterated_degree_signature(g: Graph, s: int) -> np.ndarray:
    """
    Per-vertex s-iterated degree, d_0 = 0 and d_s(x) = multiset of d_{s-1}
    over the neighbours of x, each multiset hashed from its sorted list.
    """
    if not 0 <= s <= settings.MAX_ITERATED_DEGREE:
        raise InputError(f"s must lie in 0..{settings.MAX_ITERATED_DEGREE}, got {s}")
    sig = np.zeros(g.n, dtype=np.uint64)
    for _ in range(s):
        nxt = np.empty_like(sig)
        for i in range(g.n):
            nxt[i] = _digest(np.sort(sig[g.adj[i]]))
        sig = nxt
    return sig


def signature_multiset(g: Graph, s: int) -> Counter:
    return Counter(int(x) for x in iterated_degree_signature(g, s))


def serialize(g: Graph) -> bytes:
    payload = np.packbits(g.adj[_upper_mask(g.n)]).tobytes().hex() if g.n > 1 else ""
    return f"n={g.n}\n{payload}\n".encode("ascii")


def parse(data: bytes) -> Graph:
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError as e:
        raise FormatError(f"{FORMAT_NAME}: not ASCII ({e})") from e
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if len(lines) != 2:
        raise FormatError(f"{FORMAT_NAME}: expected 2 lines, got {len(lines)}")
    header, payload = lines[0].rstrip("\r"), lines[1].rstrip("\r")
    match = _HEADER_RE.match(header)
    if not match:
        raise FormatError(f"{FORMAT_NAME}: malformed header {header!r}")
    n = int(match.group(1))
    if not _HEX_RE.match(payload):
        raise FormatError(f"{FORMAT_NAME}: payload is not lowercase hex")
    total = slot_count(n)
    expected = (total + 7) // 8 * 2
    if len(payload) != expected:
        raise FormatError(f"{FORMAT_NAME}: payload has {len(payload)} hex digits, expected {expected}")
    packed = np.frombuffer(bytes.fromhex(payload), dtype=np.uint8)
    bits = np.unpackbits(packed).astype(bool)
    if bits[total:].any():
        raise FormatError(f"{FORMAT_NAME}: nonzero padding bits")
    return decode_word(n, Word(bits[:total]))


def read_graph(path: str) -> Graph:
    with open(path, "rb") as f:
        return parse(f.read())


def write_graph(g: Graph, path: str) -> None:
    with open(path, "wb") as f:
        f.write(serialize(g))
    logger.info(f"Wrote {FORMAT_NAME} graph n={g.n} to {path}")

from typing import Iterable, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.exceptions import InputError

UINT64_MAX = (1 << 64) - 1


class EdgeSlot(BaseModel):
    """Unordered vertex pair {u, v}, stored with 1 <= u < v."""
    model_config = ConfigDict(frozen=True)

    u: int = Field(..., ge=1)
    v: int = Field(..., ge=1)

    @model_validator(mode="after")
    def check_order(self):
        if self.u >= self.v:
            raise ValueError(f"EdgeSlot requires u < v, got ({self.u}, {self.v})")
        return self

    @classmethod
    def of(cls, a: int, b: int) -> "EdgeSlot":
        if a == b:
            raise InputError(f"A slot needs two distinct vertices, got ({a}, {b})")
        if a < 1 or b < 1:
            raise InputError(f"Vertex ids are 1-based, got ({a}, {b})")
        return cls(u=min(a, b), v=max(a, b))

    def as_tuple(self) -> Tuple[int, int]:
        return self.u, self.v


class SeedSpec(BaseModel):
    """(seed, stream) pair; the stream is usually the trial index."""
    model_config = ConfigDict(frozen=True)

    seed: int = Field(..., ge=0, le=UINT64_MAX)
    stream: int = Field(0, ge=0, le=UINT64_MAX)

    def generator(self) -> np.random.Generator:
        # SeedSequence hashes the (seed, stream) entropy pool into PCG64 state
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence([self.seed, self.stream])))


class Graph:
    """
    Simple labeled graph on vertices 1..n, stored as a symmetric, irreflexive,
    read-only numpy bool matrix (row/column i-1 is vertex i).
    """

    __slots__ = ("_adj", "_degrees")

    def __init__(self, adj: np.ndarray):
        arr = np.array(adj, dtype=bool)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InputError(f"Adjacency must be a square matrix, got shape {arr.shape}")
        if arr.diagonal().any():
            raise InputError("Adjacency matrix has a loop")
        if not np.array_equal(arr, arr.T):
            raise InputError("Adjacency matrix is not symmetric")
        self._set(arr)

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "Graph":
        # trusted path for matrices built internally (already symmetric bool)
        obj = cls.__new__(cls)
        obj._set(arr)
        return obj

    def _set(self, arr: np.ndarray) -> None:
        arr.setflags(write=False)
        self._adj = arr
        self._degrees = None

    @classmethod
    def empty(cls, n: int) -> "Graph":
        if n < 0:
            raise InputError(f"Vertex count must be non-negative, got {n}")
        return cls._wrap(np.zeros((n, n), dtype=bool))

    @classmethod
    def complete(cls, n: int) -> "Graph":
        arr = ~np.eye(n, dtype=bool)
        return cls._wrap(arr)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple[int, int]]) -> "Graph":
        arr = np.zeros((n, n), dtype=bool)
        for a, b in edges:
            slot = EdgeSlot.of(a, b)
            if slot.v > n:
                raise InputError(f"Vertex {slot.v} outside 1..{n}")
            arr[slot.u - 1, slot.v - 1] = arr[slot.v - 1, slot.u - 1] = True
        return cls._wrap(arr)

    @property
    def n(self) -> int:
        return int(self._adj.shape[0])

    @property
    def adj(self) -> np.ndarray:
        return self._adj

    def degrees(self) -> np.ndarray:
        """Degree of every vertex as int64, index i-1 for vertex i (cached)."""
        if self._degrees is None:
            deg = self._adj.sum(axis=1, dtype=np.int64)
            deg.setflags(write=False)
            self._degrees = deg
        return self._degrees

    def degree(self, v: int) -> int:
        return int(self.degrees()[v - 1])

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self._adj[u - 1, v - 1])

    def edge_count(self) -> int:
        return int(self.degrees().sum()) // 2

    def edges(self) -> list:
        us, vs = np.nonzero(np.triu(self._adj, 1))
        return [(int(a) + 1, int(b) + 1) for a, b in zip(us, vs)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self._adj, other._adj))

    def __hash__(self) -> int:
        return hash((self.n, np.packbits(self._adj).tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={self.edge_count()})"

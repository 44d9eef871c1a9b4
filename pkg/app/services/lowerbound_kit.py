"""
Computable pieces of the degree-sequence lower bound: the asymptotic count
g(d) of graphs with a given labeled degree sequence, the number p(d) of its
rearrangements, the good / very good degree classification and the
conditions a typical random graph satisfies.

All factorials are evaluated in log space through scipy's gammaln.
"""
import logging
import math
from collections import Counter
from typing import Sequence

import numpy as np
from scipy.special import gammaln, xlogy

from app.core.config import settings
from app.core.exceptions import DomainError
from app.models.graph import EdgeSlot, Graph
from app.models.lowerbound import (
    DegreeClass,
    DegreeLabel,
    DegreeRangeReport,
    PConditions,
    SeqStats,
    ThresholdSet,
)

logger = logging.getLogger(__name__)


def seq_stats(degrees: Sequence[int]) -> SeqStats:
    deg = np.asarray(degrees, dtype=np.int64)
    n = int(deg.size)
    mean = float(deg.mean()) if n else 0.0
    mu = mean / (n - 1) if n > 1 else 0.0
    gamma = float(((deg - mean) ** 2).sum()) / (n - 1) ** 2 if n > 1 else 0.0
    counts = Counter(int(d) for d in deg)
    return SeqStats(
        n=n, degrees=tuple(int(d) for d in deg), mean=mean, mu=mu, gamma=gamma, counts=dict(counts)
    )


def thresholds(n: int) -> ThresholdSet:
    if n < settings.MIN_WINDOW_N:
        raise DomainError(f"Threshold set needs n >= {settings.MIN_WINDOW_N}, got {n}")
    log_n = math.log(n)
    loglog = math.log(log_n)
    zeta1 = (math.log(2 * math.pi) + 1.5 * loglog) / log_n
    zeta2 = (math.log(2 * math.pi) + 2.5 * loglog) / log_n
    a = math.sqrt(n * log_n / 2)
    b = 0.5 * math.sqrt(n * log_n * (1 - zeta1))
    c = 0.5 * math.sqrt(n * log_n * (1 - zeta2))
    if not a > b > c:
        raise DomainError(f"Thresholds for n={n} violate a > b > c ({a:.3f}, {b:.3f}, {c:.3f})")
    return ThresholdSet(n=n, zeta1=zeta1, zeta2=zeta2, a=a, b=b, c=c)


def _log_binomial(n: int, k: np.ndarray) -> np.ndarray:
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def log_g_estimate(s: SeqStats) -> float:
    """ln g(d) from the asymptotic formula for graphs with degree sequence d."""
    if not 0 < s.mu < 1:
        raise DomainError(f"log_g_estimate needs 0 < mu < 1, got mu={s.mu}")
    if sum(s.degrees) % 2:
        raise DomainError("Degree sum is odd; no graph has this sequence")
    n, mu = s.n, s.mu
    entropy = xlogy(mu, mu) + xlogy(1 - mu, 1 - mu)
    correction = 0.25 - s.gamma ** 2 / (4 * mu ** 2 * (1 - mu) ** 2)
    binomials = float(_log_binomial(n - 1, np.asarray(s.degrees, dtype=np.float64)).sum())
    return 0.5 * math.log(2) + correction + n * (n - 1) / 2 * entropy + binomials


def log_p(s: SeqStats) -> float:
    """ln(n! / prod_y n_y!)."""
    counts = np.fromiter(s.counts.values(), dtype=np.float64, count=len(s.counts))
    return float(gammaln(s.n + 1) - gammaln(counts + 1).sum())


class _Bounds:
    """The count thresholds shared by the classification and the P conditions."""

    def __init__(self, n: int):
        log_n = math.log(n)
        self.loglog = math.log(log_n)
        self.min_count = log_n ** 0.75 - 2
        self.central_count = log_n ** 1.25 - 2
        self.boundary_cap = log_n ** 2 + 2

    def jump_ok(self, base: int, other: int) -> bool:
        return abs(base - other) <= base / self.loglog + 5


def _conditions_hold(s: SeqStats, bounds: _Bounds, y: int) -> bool:
    # conditions (1)-(3) of a good degree, evaluated at y
    n_y, n_up, n_down = s.count(y), s.count(y + 1), s.count(y - 1)
    if n_y < bounds.min_count or not bounds.jump_ok(n_y, n_up):
        return False
    return bounds.jump_ok(n_y, n_down) or (bounds.jump_ok(n_down, n_y) and n_down >= bounds.min_count)


def classify_degrees(s: SeqStats, t: ThresholdSet) -> DegreeClass:
    bounds = _Bounds(s.n)
    half = s.n / 2
    holds = {y: _conditions_hold(s, bounds, y) for y in range(-1, s.n + 1)}
    labels = {}
    for y in range(s.n):
        if abs(y - half) <= t.b - 1 and holds[y - 1] and holds[y] and holds[y + 1]:
            labels[y] = DegreeLabel.very_good
        elif abs(y - half) <= t.b and holds[y]:
            labels[y] = DegreeLabel.good
        else:
            labels[y] = DegreeLabel.bad
    return DegreeClass(n=s.n, labels=labels)


def vertex_classes(s: SeqStats, t: ThresholdSet) -> Counter:
    """How many vertices carry each label."""
    classes = classify_degrees(s, t)
    return Counter(classes.labels[d].value for d in s.degrees)


def check_P_conditions(s: SeqStats, t: ThresholdSet) -> PConditions:
    n = s.n
    half = n / 2
    log_n = math.log(n)
    bounds = _Bounds(n)
    deviation = np.abs(np.asarray(s.degrees, dtype=np.float64) - half)

    p1 = bool((deviation < t.a + 1).all())
    p2 = int((deviation > t.b).sum()) <= 4 * math.sqrt(n) * log_n ** 0.25 + 2

    p3_i = all(
        s.count(y) >= bounds.central_count and bounds.jump_ok(s.count(y), s.count(y + 1))
        for y in range(math.floor(half - t.c - 1), math.ceil(half + t.c + 1) + 1)
        if abs(y - half) < t.c + 1
    )
    p3_ii = all(
        s.count(y) <= bounds.boundary_cap
        for y in range(math.floor(half - t.b), math.ceil(half + t.b) + 1)
        if t.c <= abs(y - half) <= t.b
    )

    def tight(y: int) -> bool:
        n_y = s.count(y)
        return (
            n_y >= bounds.min_count
            and bounds.jump_ok(n_y, s.count(y + 1))
            and bounds.jump_ok(n_y, s.count(y - 1))
        )

    exceptions = sum(
        1
        for d in s.degrees
        if t.c <= abs(d - half) <= t.b and not all(tight(y) for y in (d - 1, d, d + 1))
    )
    p4 = exceptions <= math.sqrt(n) + 2
    return PConditions(p1=p1, p2=p2, p3=p3_i and p3_ii, p4=p4, p3_i=p3_i, p3_ii=p3_ii)


def _pairs_realized(g: Graph, buckets: dict, y1: int, y2: int) -> bool:
    a, b = buckets[y1], buckets[y2]
    block = g.adj[np.ix_(a, b)]
    if y1 == y2:
        distinct = np.triu(np.ones(block.shape, dtype=bool), 1)
        return bool((block & distinct).any() and (~block & distinct).any())
    return bool(block.any() and (~block).any())


def check_degree_range(g: Graph, t: ThresholdSet) -> DegreeRangeReport:
    """The five typical-degree statements for a random graph, with their exact constants."""
    n = g.n
    half = n / 2
    log_n = math.log(n)
    loglog = math.log(log_n)
    deg = g.degrees()
    deviation = np.abs(deg - half)
    hist = np.bincount(deg, minlength=n + 2)

    def count(y: int) -> int:
        return int(hist[y]) if 0 <= y < hist.size else 0

    part1 = bool((deviation < t.a).all())
    part2 = int((deviation > t.b).sum()) <= 4 * math.sqrt(n) * log_n ** 0.25

    central = [y for y in range(math.floor(half - t.c - 1), math.ceil(half + t.c + 1) + 1) if abs(y - half) < t.c + 1]
    part3a = all(count(y) >= log_n ** 1.25 and abs(count(y) - count(y + 1)) <= count(y) / loglog for y in central)
    outer = [
        y
        for y in range(math.floor(half - t.b - 2), math.ceil(half + t.b + 2) + 1)
        if t.c - 2 <= abs(y - half) <= t.b + 2
    ]
    part3b = all(count(y) <= log_n ** 2 for y in outer)

    def tight(y: int) -> bool:
        n_y = count(y)
        return n_y >= log_n ** 0.75 and abs(n_y - count(y + 1)) <= n_y / loglog and abs(n_y - count(y - 1)) <= n_y / loglog

    exceptions = sum(
        1 for d in deg if t.c <= abs(d - half) <= t.b and not all(tight(y) for y in (d - 1, d, d + 1))
    )
    part4 = exceptions <= math.sqrt(n)

    reach = 0.5 * math.sqrt(n * (log_n - 2 * math.sqrt(log_n))) + 1
    present = [int(y) for y in np.flatnonzero(hist) if abs(y - half) <= reach]
    buckets = {y: np.flatnonzero(deg == y) for y in present}
    part5 = all(
        _pairs_realized(g, buckets, y1, y2) for i, y1 in enumerate(present) for y2 in present[i:]
    )
    return DegreeRangeReport(part1=part1, part2=part2, part3=part3a and part3b, part4=part4, part5=part5)


def log_g_ratio(g: Graph, slot: EdgeSlot) -> float:
    """Change in ln g(d) when the slot is flipped."""
    deg = np.array(g.degrees())
    step = -1 if g.has_edge(slot.u, slot.v) else 1
    before = log_g_estimate(seq_stats(deg))
    deg[[slot.u - 1, slot.v - 1]] += step
    return log_g_estimate(seq_stats(deg)) - before

"""
Property Q_k: a graph is in Q_k when its non-divisible part W is not
resolved by R, or when the canonically relabeled G|_W encodes a codeword of
the covering code of length |W|(|W|-1)/2.
"""
import logging
from typing import Tuple

import numpy as np
from pydantic import ValidationError

from app.core.config import settings
from app.core.exceptions import DomainError, FormatError, InputError
from app.models.graph import EdgeSlot, Graph
from app.models.properties import (
    RESIDUE_CLASSES,
    AttackOutcome,
    AttackReason,
    KPartition,
    KSchedule,
    QkDecision,
    valid_k,
)
from app.services import covercode, graphcore

logger = logging.getLogger(__name__)


def _check_k(k: int) -> None:
    if not valid_k(k):
        raise DomainError(f"k={k} is not valid: need k odd, k > 11 and k not divisible by 11")


def partition(g: Graph, k: int) -> KPartition:
    _check_k(k)
    deg = g.degrees()
    u_idx = np.flatnonzero(deg % k == 0)
    w_idx = np.flatnonzero(deg % k != 0)
    in_u_degree = g.adj[np.ix_(u_idx, u_idx)].sum(axis=1, dtype=np.int64)
    residue = in_u_degree % RESIDUE_CLASSES

    parts = []
    dvec = np.zeros((w_idx.size, RESIDUE_CLASSES - 1), dtype=np.int64)
    for r in range(RESIDUE_CLASSES):
        members = u_idx[residue == r]
        parts.append(tuple(int(v) + 1 for v in members))
        if r and members.size and w_idx.size:
            dvec[:, r - 1] = g.adj[np.ix_(w_idx, members)].sum(axis=1, dtype=np.int64)
    dvec.setflags(write=False)
    return KPartition(k=k, W=tuple(int(v) + 1 for v in w_idx), U=tuple(parts), dvec=dvec)


def resolves(p: KPartition) -> bool:
    if len(p.W) <= 1:
        return True
    return np.unique(p.dvec, axis=0).shape[0] == len(p.W)


def canonical_order(p: KPartition) -> Tuple[int, ...]:
    """W sorted by dvec ascending lexicographically; entry i-1 receives label i."""
    if not resolves(p):
        raise InputError("canonical_order needs a resolved partition")
    if len(p.W) <= 1:
        return p.W
    # lexsort treats its last key as primary
    perm = np.lexsort(p.dvec.T[::-1])
    return tuple(p.W[i] for i in perm)


def decide_qk(g: Graph, k: int) -> QkDecision:
    p = partition(g, k)
    if not resolves(p):
        return QkDecision(k=k, in_qk=True, resolved=False, w_size=len(p.W))
    order = canonical_order(p)
    word = graphcore.encode_sub_word(g, order)
    code = covercode.build_code(word.length)
    member = covercode.contains(code, word)
    return QkDecision(
        k=k,
        in_qk=member,
        resolved=True,
        w_size=len(order),
        word=word,
        word_length=word.length,
        code_order=code.order,
        code_member=member,
        order=order,
    )


def _exhaustive_flip(g: Graph, k: int) -> Tuple[Graph, AttackOutcome]:
    for index in range(1, graphcore.slot_count(g.n) + 1):
        slot = graphcore.slot_pair(index, g.n)
        candidate = graphcore.flip(g, slot)
        if decide_qk(candidate, k).in_qk:
            logger.debug(f"Exhaustive search reached Q_{k} via slot {slot.as_tuple()}")
            return candidate, AttackOutcome(success=True, flipped=slot, reason=AttackReason.code_flip_applied)
    return g, AttackOutcome(success=False, reason=AttackReason.no_flip_found)


def adversary_qk(g: Graph, k: int, exhaustive: bool = False) -> Tuple[Graph, AttackOutcome]:
    """
    Single-flip attack. The flip named by the code is mapped back through the
    canonical order and re-decided in full, since it moves two degrees and can
    eject u or v from W. With `exhaustive`, a failed code flip falls back to
    trying every slot (small n only).
    """
    if exhaustive and g.n > settings.EXHAUSTIVE_ATTACK_MAX_N:
        raise InputError(
            f"Exhaustive attack tries all n(n-1)/2 flips; n={g.n} exceeds {settings.EXHAUSTIVE_ATTACK_MAX_N}"
        )
    decision = decide_qk(g, k)
    if decision.in_qk:
        reason = AttackReason.already_in_property if decision.resolved else AttackReason.unresolved_hence_in
        return g, AttackOutcome(success=True, reason=reason)

    code = covercode.build_code(decision.word_length)
    t = covercode.flip_to_code(code, decision.word)
    labels = graphcore.slot_pair(t, decision.w_size)
    slot = EdgeSlot.of(decision.order[labels.u - 1], decision.order[labels.v - 1])
    candidate = graphcore.flip(g, slot)
    if decide_qk(candidate, k).in_qk:
        return candidate, AttackOutcome(success=True, flipped=slot, reason=AttackReason.code_flip_applied)

    if exhaustive:
        return _exhaustive_flip(g, k)
    return candidate, AttackOutcome(success=False, flipped=slot, reason=AttackReason.flip_breaks_partition)


def default_schedule() -> KSchedule:
    return KSchedule(entries=tuple(tuple(e) for e in settings.DEFAULT_K_SCHEDULE))


def load_schedule(path: str) -> KSchedule:
    """Two integer columns `N_k k` per line; blank lines and `#` comments are skipped."""
    entries = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            if len(fields) != 2:
                raise FormatError(f"{path}:{lineno}: expected two columns 'N_k k', got {raw.strip()!r}")
            try:
                entries.append((int(fields[0]), int(fields[1])))
            except ValueError as e:
                raise FormatError(f"{path}:{lineno}: {e}") from e
    try:
        schedule = KSchedule(entries=tuple(entries))
    except ValidationError as e:
        raise FormatError(f"{path}: invalid k-schedule: {e.errors()[0]['msg']}") from e
    logger.info(f"Loaded k-schedule with {len(entries)} entries from {path}")
    return schedule


def choose_k(n: int, schedule: KSchedule) -> int:
    eligible = [k for threshold, k in schedule.entries if threshold <= n]
    if not eligible:
        raise DomainError(f"n={n} is below the smallest schedule threshold {schedule.entries[0][0]}")
    return max(eligible)


def decide_qstar(g: Graph, schedule: KSchedule) -> QkDecision:
    return decide_qk(g, choose_k(g.n, schedule))


def adversary_qstar(g: Graph, schedule: KSchedule, exhaustive: bool = False) -> Tuple[Graph, AttackOutcome]:
    return adversary_qk(g, choose_k(g.n, schedule), exhaustive=exhaustive)

"""
Property A on degree sequences.

Degrees inside the window D_n = [d_lower, d_upper] are counted cumulatively
(X_y); the parities of X on the lower and upper halves form the words Ydown and
Yup, and Z sums y * N_y over the lower half. A graph has A when both words are
codewords and Z mod 4 is 0 or 1.
"""
import logging
import math
from typing import Iterable, List, Optional, Tuple

import numpy as np

from app.core.config import settings
from app.core.exceptions import DomainError, InputError, InvariantViolation
from app.models.code import Word
from app.models.graph import EdgeSlot, Graph
from app.models.properties import (
    ACodes,
    AttackOutcome,
    AttackReason,
    DegreeProfile,
    DegreeWindow,
    FlipEffect,
)
from app.services import covercode, graphcore

logger = logging.getLogger(__name__)

GOOD_Z_RESIDUES = (0, 1)


def window(n: int) -> DegreeWindow:
    if n < settings.MIN_WINDOW_N:
        raise DomainError(f"Degree window needs n >= {settings.MIN_WINDOW_N}, got {n}")
    log_n = math.log(n)
    bound = 0.5 * math.sqrt(n * (log_n - 2.0 * math.sqrt(log_n)))
    d_lower = math.ceil(n / 2 - bound)
    d_upper = math.floor(n / 2 + bound)
    mid = n // 2
    delta1, delta2 = mid - d_lower, d_upper - mid
    if delta1 < 3 or delta2 < 3:
        raise DomainError(f"Degree window for n={n} is degenerate (delta1={delta1}, delta2={delta2})")
    return DegreeWindow(
        n=n, bound=bound, d_lower=d_lower, d_upper=d_upper, mid=mid, delta1=delta1, delta2=delta2
    )


def profile_from_degrees(deg: np.ndarray, win: DegreeWindow) -> DegreeProfile:
    deg = np.asarray(deg, dtype=np.int64)
    lo, hi = win.d_lower - 1, win.d_upper + 2
    hist = np.bincount(deg, minlength=hi + 1)
    counts = {y: int(hist[y]) for y in range(lo, hi + 1)}

    cumulative = {lo: 0}
    running = 0
    for y in range(win.d_lower, hi + 1):
        running += counts[y]
        cumulative[y] = running

    ydown = Word([cumulative[win.d_lower + i - 1] & 1 for i in range(1, win.delta1 + 1)])
    yup = Word([cumulative[win.mid + j] & 1 for j in range(1, win.delta2 + 1)])
    z = sum(y * counts[y] for y in range(win.d_lower, win.mid + 1))
    return DegreeProfile(window=win, counts=counts, cumulative=cumulative, ydown=ydown, yup=yup, z=z)


def profile(g: Graph, win: Optional[DegreeWindow] = None) -> DegreeProfile:
    return profile_from_degrees(g.degrees(), win or window(g.n))


def default_codes(
    win: DegreeWindow, down_len: Optional[int] = None, up_len: Optional[int] = None
) -> ACodes:
    """Codes of lengths delta1 / delta2. An explicit length must restate the window width."""
    for name, given, width in (("Ydown", down_len, win.delta1), ("Yup", up_len, win.delta2)):
        if given is not None and given != width:
            raise InputError(
                f"{name} code length {given} does not match the degree window for n={win.n} "
                f"(expected {width})"
            )
    return ACodes(down=covercode.build_code(win.delta1), up=covercode.build_code(win.delta2))


def _check_codes(p: DegreeProfile, codes: ACodes) -> None:
    if codes.down.length != p.window.delta1 or codes.up.length != p.window.delta2:
        raise InputError(
            f"Code lengths ({codes.down.length}, {codes.up.length}) do not match the window "
            f"({p.window.delta1}, {p.window.delta2})"
        )


def decide_a(p: DegreeProfile, codes: ACodes) -> bool:
    _check_codes(p, codes)
    return (
        covercode.contains(codes.down, p.ydown)
        and covercode.contains(codes.up, p.yup)
        and p.z % 4 in GOOD_Z_RESIDUES
    )


def find_pair(g: Graph, x: int, y: int, want_adjacent: bool) -> Optional[EdgeSlot]:
    """Lexicographically smallest {u, v}, u != v, with degrees x and y and the requested adjacency."""
    deg = g.degrees()
    xs = np.flatnonzero(deg == x)
    ys = np.flatnonzero(deg == y)
    if xs.size == 0 or ys.size == 0:
        return None
    a, b = xs[:, None], ys[None, :]
    valid = (g.adj[np.ix_(xs, ys)] == want_adjacent) & (a != b)
    if not valid.any():
        return None
    key = np.where(valid, np.minimum(a, b) * g.n + np.maximum(a, b), np.iinfo(np.int64).max)
    i, j = np.unravel_index(np.argmin(key), key.shape)
    return EdgeSlot.of(int(xs[i]) + 1, int(ys[j]) + 1)


def _x_change(win: DegreeWindow, ys: np.ndarray, before: int, after: int) -> np.ndarray:
    # X_y counts vertices with d_lower <= degree <= y
    old = (win.d_lower <= before) & (before <= ys)
    new = (win.d_lower <= after) & (after <= ys)
    return new.astype(np.int64) - old.astype(np.int64)


def _z_weight(win: DegreeWindow, degree: int) -> int:
    return degree if win.d_lower <= degree <= win.mid else 0


def predict_flip_effect(p: DegreeProfile, x: int, y: int, action: str) -> FlipEffect:
    """
    Parity bits and Z change caused by adding (or deleting) an edge between
    vertices of current degrees x and y, computed from degrees alone.
    """
    if action not in ("add", "delete"):
        raise InputError(f"action must be 'add' or 'delete', got {action!r}")
    win = p.window
    step = 1 if action == "add" else -1
    ys = np.arange(win.d_lower, win.d_upper + 1)
    change = _x_change(win, ys, x, x + step) + _x_change(win, ys, y, y + step)
    toggled = ys[change % 2 != 0]
    down_bits = tuple(int(t) - win.d_lower + 1 for t in toggled if t < win.mid)
    up_bits = tuple(int(t) - win.mid for t in toggled if t > win.mid)
    z_delta = (
        _z_weight(win, x + step) - _z_weight(win, x) + _z_weight(win, y + step) - _z_weight(win, y)
    )
    return FlipEffect(ydown_bits=down_bits, yup_bits=up_bits, z_delta=z_delta)


def _verified(g: Graph, slot: EdgeSlot, codes: ACodes, win: DegreeWindow) -> Optional[Graph]:
    candidate = graphcore.flip(g, slot)
    return candidate if decide_a(profile(candidate, win), codes) else None


def _needed(code, w: Word) -> Tuple[int, ...]:
    t = covercode.flip_to_code(code, w)
    return () if t is None else (t,)


def _repair_candidates(p: DegreeProfile, degrees_present: Iterable[int]) -> List[Tuple[str, int, int]]:
    present = sorted(set(int(d) for d in degrees_present))
    return [
        (action, x, y)
        for action in ("add", "delete")
        for i, x in enumerate(present)
        for y in present[i:]
    ]


def adversary_a(g: Graph, codes: ACodes, strict: bool = False) -> Tuple[Graph, AttackOutcome]:
    """
    Add or delete one edge so that the graph lands in A.

    The main move follows the Z residue: add when Z mod 4 is 0 or 3, delete
    when it is 1 or 2, between the degrees named by the two code flips. When
    a word is already a codeword the strict attack gives up; otherwise degree
    pairs are searched by predicted effect and each hit is re-decided.
    """
    win = window(g.n)
    p = profile(g, win)
    if decide_a(p, codes):
        return g, AttackOutcome(success=True, reason=AttackReason.already_in_property)

    need_down = _needed(codes.down, p.ydown)
    need_up = _needed(codes.up, p.yup)
    action = "add" if p.z % 4 in (0, 3) else "delete"

    if need_down and need_up:
        x = win.d_lower + need_down[0] - 1
        y = win.mid + need_up[0]
        if action == "delete":
            x, y = x + 1, y + 1
        slot = find_pair(g, x, y, want_adjacent=(action == "delete"))
        if slot is not None:
            candidate = _verified(g, slot, codes, win)
            if candidate is None:
                logger.error(f"Main {action} move on degrees ({x}, {y}) did not reach A")
                raise InvariantViolation(f"{action} flip {slot.as_tuple()} left the graph outside A")
            return candidate, AttackOutcome(
                success=True, flipped=slot, reason=AttackReason.code_flip_applied, action=action
            )

    if strict:
        return g, AttackOutcome(success=False, reason=AttackReason.no_flip_found)

    for act, x, y in _repair_candidates(p, g.degrees()):
        effect = predict_flip_effect(p, x, y, act)
        if effect.ydown_bits != need_down or effect.yup_bits != need_up:
            continue
        if (p.z + effect.z_delta) % 4 not in GOOD_Z_RESIDUES:
            continue
        slot = find_pair(g, x, y, want_adjacent=(act == "delete"))
        if slot is None:
            continue
        candidate = _verified(g, slot, codes, win)
        if candidate is not None:
            logger.debug(f"Repair {act} on degrees ({x}, {y}) reached A")
            return candidate, AttackOutcome(
                success=True, flipped=slot, reason=AttackReason.code_flip_applied, action=act
            )
    return g, AttackOutcome(success=False, reason=AttackReason.no_flip_found)

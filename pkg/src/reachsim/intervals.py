"""Integer interval regions: the infinite-state instance of the set algebra.

An ``IntervalRegion`` is a finite union of disjoint, non-adjacent, sorted
closed integer intervals, where an endpoint of ``None`` stands for -inf (as a
lower bound) or +inf (as an upper bound).  Values are canonical on
construction and immutable, so equality and hashing are structural.

``SymbolicSystem`` packages a transition system over such regions: a label
table, a carrier region, an initial region, per-label symbolic predecessor
functions, and a per-state successor-witness function.  Together these
satisfy the four region-algebra requirements the symbolic engine needs:
witness extraction, exact pre-image, boolean operations, and decidable
emptiness.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

Bound = Optional[int]
_NEG = float("-inf")
_POS = float("inf")


def _lo(b: Bound) -> float | int:
    return _NEG if b is None else b


def _hi(b: Bound) -> float | int:
    return _POS if b is None else b


class IntervalRegion:
    """Canonical finite union of closed integer intervals over Z."""

    __slots__ = ("intervals",)

    def __init__(self, intervals: Sequence[tuple[Bound, Bound]] = ()):
        self.intervals = _canonicalize(intervals)

    @classmethod
    def empty(cls) -> "IntervalRegion":
        return cls(())

    @classmethod
    def all_integers(cls) -> "IntervalRegion":
        return cls(((None, None),))

    @classmethod
    def span(cls, lo: Bound, hi: Bound) -> "IntervalRegion":
        return cls(((lo, hi),))

    @classmethod
    def of(cls, *points: int) -> "IntervalRegion":
        return cls(tuple((p, p) for p in points))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, IntervalRegion) and self.intervals == other.intervals

    def __hash__(self) -> int:
        return hash(self.intervals)

    def __repr__(self) -> str:
        if not self.intervals:
            return "IntervalRegion(empty)"
        def fmt(iv: tuple[Bound, Bound]) -> str:
            lo = "-inf" if iv[0] is None else str(iv[0])
            hi = "+inf" if iv[1] is None else str(iv[1])
            return f"[{lo},{hi}]"
        return "IntervalRegion(%s)" % " u ".join(map(fmt, self.intervals))

    def __bool__(self) -> bool:
        return bool(self.intervals)

    def is_empty(self) -> bool:
        return not self.intervals

    def __contains__(self, x: int) -> bool:
        for lo, hi in self.intervals:
            if _lo(lo) <= x <= _hi(hi):
                return True
        return False

    def __and__(self, other: "IntervalRegion") -> "IntervalRegion":
        out = []
        for alo, ahi in self.intervals:
            for blo, bhi in other.intervals:
                lo = alo if _lo(alo) >= _lo(blo) else blo
                hi = ahi if _hi(ahi) <= _hi(bhi) else bhi
                if _lo(lo) <= _hi(hi):
                    out.append((lo, hi))
        return IntervalRegion(out)

    def __or__(self, other: "IntervalRegion") -> "IntervalRegion":
        return IntervalRegion(self.intervals + other.intervals)

    def __sub__(self, other: "IntervalRegion") -> "IntervalRegion":
        return self & other.complement()

    def complement(self) -> "IntervalRegion":
        """Complement relative to the whole of Z."""
        out: list[tuple[Bound, Bound]] = []
        cursor: Bound = None  # next uncovered point's lower bound; None = -inf
        started = False
        for lo, hi in self.intervals:
            if lo is None:
                pass  # nothing uncovered to the left
            elif not started:
                out.append((None, lo - 1))
            elif cursor is not None and cursor <= lo - 1:
                out.append((cursor, lo - 1))
            started = True
            cursor = None if hi is None else hi + 1
        if not started:
            return IntervalRegion.all_integers()
        if cursor is not None:
            out.append((cursor, None))
        return IntervalRegion(out)

    def issubset(self, other: "IntervalRegion") -> bool:
        return (self - other).is_empty()

    def isdisjoint(self, other: "IntervalRegion") -> bool:
        return (self & other).is_empty()

    def shift(self, delta: int) -> "IntervalRegion":
        return IntervalRegion(
            tuple(
                (None if lo is None else lo + delta, None if hi is None else hi + delta)
                for lo, hi in self.intervals
            )
        )

    def pick(self) -> int:
        """Some concrete member: the smallest finite endpoint available."""
        if not self.intervals:
            raise ValueError("pick from empty region")
        lo, hi = self.intervals[0]
        if lo is not None:
            return lo
        if hi is not None:
            return hi
        return 0

    def enumerate(self, window_lo: int, window_hi: int) -> set[int]:
        """Members inside the closed window, for enumeration oracles."""
        out: set[int] = set()
        for lo, hi in self.intervals:
            a = max(window_lo, _lo(lo))
            b = min(window_hi, _hi(hi))
            if a <= b:
                out.update(range(int(a), int(b) + 1))
        return out

    def to_json(self) -> list[list[Bound]]:
        return [[lo, hi] for lo, hi in self.intervals]

    @classmethod
    def from_json(cls, data: Sequence[Sequence[Bound]]) -> "IntervalRegion":
        return cls(tuple((lo, hi) for lo, hi in data))


def _canonicalize(intervals: Sequence[tuple[Bound, Bound]]) -> tuple[tuple[Bound, Bound], ...]:
    items = [(lo, hi) for lo, hi in intervals if _lo(lo) <= _hi(hi)]
    items.sort(key=lambda iv: (_lo(iv[0]), _hi(iv[1])))
    merged: list[tuple[Bound, Bound]] = []
    for lo, hi in items:
        if merged:
            plo, phi = merged[-1]
            # adjacent or overlapping closed integer intervals merge
            if phi is None or _lo(lo) <= phi + 1:
                if phi is not None and _hi(hi) > phi:
                    merged[-1] = (plo, hi)
                continue
        merged.append((lo, hi))
    return tuple(merged)


@dataclass(frozen=True)
class SymbolicSystem:
    """A (possibly infinite) transition system exposed through the region algebra."""

    name: str
    labels: tuple[str, ...]
    carrier: IntervalRegion
    initial: IntervalRegion
    pre_fns: tuple[Callable[[IntervalRegion], IntervalRegion], ...]
    succ_witness: Callable[[int, IntervalRegion], Optional[int]] = field(repr=False)

    def pre(self, a: int, region: IntervalRegion) -> IntervalRegion:
        return self.pre_fns[a](region)


def region_pre(sys: SymbolicSystem, a: int, region: IntervalRegion) -> IntervalRegion:
    """Symbolic predecessor: a region whose extension is pre_a of the input's."""
    return sys.pre(a, region)


def witness_successor(sys: SymbolicSystem, s: int, region: IntervalRegion) -> Optional[int]:
    """Some successor of ``s`` inside the region, or None when there is none."""
    return sys.succ_witness(s, region)

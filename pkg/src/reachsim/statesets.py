"""Dense finite state sets backed by Python integer bitmasks.

A ``StateSet`` is an immutable set of state indices drawn from a fixed
universe ``[0, n)``.  All boolean operations are exact and run at C speed on
the underlying arbitrary-precision integer.  The raw-mask helpers at the
bottom are used by the engines, which keep bare ints in their hot loops and
wrap them into ``StateSet`` values only at the API boundary.
"""

from __future__ import annotations

from typing import Iterable, Iterator

# byte value -> tuple of set bit offsets, for fast mask iteration
_BYTE_BITS = tuple(
    tuple(i for i in range(8) if b >> i & 1) for b in range(256)
)


def mask_from_ids(ids: Iterable[int]) -> int:
    """Build a bitmask from an iterable of state indices."""
    top = -1
    buf = bytearray()
    for i in ids:
        byte = i >> 3
        if byte > top:
            buf.extend(b"\x00" * (byte - top))
            top = byte
        buf[byte] |= 1 << (i & 7)
    return int.from_bytes(buf, "little")


def ids_from_mask(mask: int) -> list[int]:
    """List the set bit positions of ``mask`` in ascending order."""
    out: list[int] = []
    base = 0
    for byte in mask.to_bytes((mask.bit_length() + 7) // 8, "little"):
        if byte:
            out.extend(base + o for o in _BYTE_BITS[byte])
        base += 8
    return out


def iter_mask(mask: int) -> Iterator[int]:
    base = 0
    for byte in mask.to_bytes((mask.bit_length() + 7) // 8, "little"):
        if byte:
            for o in _BYTE_BITS[byte]:
                yield base + o
        base += 8


def lowest_bit(mask: int) -> int:
    """Index of the lowest set bit; ``mask`` must be non-zero."""
    return (mask & -mask).bit_length() - 1


class StateSet:
    """Immutable subset of a dense state universe ``[0, n)``."""

    __slots__ = ("n", "mask")

    def __init__(self, n: int, mask: int = 0):
        if mask < 0 or mask >> n:
            raise ValueError("mask has bits outside the universe [0, %d)" % n)
        self.n = n
        self.mask = mask

    @classmethod
    def empty(cls, n: int) -> "StateSet":
        return cls(n, 0)

    @classmethod
    def full(cls, n: int) -> "StateSet":
        return cls(n, (1 << n) - 1)

    @classmethod
    def of(cls, n: int, ids: Iterable[int]) -> "StateSet":
        m = mask_from_ids(ids)
        return cls(n, m)

    def _check(self, other: "StateSet") -> None:
        if self.n != other.n:
            raise ValueError("state sets over different universes")

    def __and__(self, other: "StateSet") -> "StateSet":
        self._check(other)
        return StateSet(self.n, self.mask & other.mask)

    def __or__(self, other: "StateSet") -> "StateSet":
        self._check(other)
        return StateSet(self.n, self.mask | other.mask)

    def __sub__(self, other: "StateSet") -> "StateSet":
        self._check(other)
        return StateSet(self.n, self.mask & ~other.mask)

    def __contains__(self, i: int) -> bool:
        return 0 <= i < self.n and self.mask >> i & 1 == 1

    def __iter__(self) -> Iterator[int]:
        return iter_mask(self.mask)

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __bool__(self) -> bool:
        return self.mask != 0

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, StateSet)
            and self.n == other.n
            and self.mask == other.mask
        )

    def __hash__(self) -> int:
        return hash((self.n, self.mask))

    def __repr__(self) -> str:
        return f"StateSet({self.n}, {{{', '.join(map(str, self))}}})"

    def is_empty(self) -> bool:
        return self.mask == 0

    def issubset(self, other: "StateSet") -> bool:
        self._check(other)
        return self.mask | other.mask == other.mask

    def isdisjoint(self, other: "StateSet") -> bool:
        self._check(other)
        return self.mask & other.mask == 0

    def pick(self) -> int:
        """Smallest member.  The deterministic pick-first of the contract."""
        if not self.mask:
            raise ValueError("pick from empty set")
        return lowest_bit(self.mask)

    def complement(self) -> "StateSet":
        return StateSet(self.n, ~self.mask & ((1 << self.n) - 1))

    def to_ids(self) -> list[int]:
        return ids_from_mask(self.mask)

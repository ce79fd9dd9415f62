"""The two instances of the region-algebra contract the symbolic engine uses.

A region system exposes exactly what the 2PR engine needs:

1. a successor witness — some element of post(s) inside a region (and hence
   the decision whether that intersection is empty);
2. an exact symbolic pre-image per label;
3. boolean operations and subset tests, carried by the region values
   themselves (``&``, ``-``, ``|``, ``issubset``);
4. decidable emptiness (``is_empty``).

On top of those the adapters track sigma, the finite set of concrete states
the engine has certified reachable, so U-membership tests and Search witness
extraction are one call.
"""

from __future__ import annotations

from typing import Optional

from .intervals import IntervalRegion, SymbolicSystem
from .lts import Lts
from .statesets import StateSet, ids_from_mask, lowest_bit

__all__ = ["FiniteRegionSystem", "IntervalRegionSystem"]


class FiniteRegionSystem:
    """Finite instance: regions are dense bit-set state sets over an Lts."""

    finite = True

    def __init__(self, lts: Lts):
        self.lts = lts
        self.n = lts.n_states
        self.n_labels = len(lts.labels)
        self.initial = lts.initial
        self.sigma: list[int] = []
        self._sigma_mask = 0
        self._post_sigma = 0

    def full_region(self) -> StateSet:
        return StateSet.full(self.n)

    def pre(self, a: int, region: StateSet) -> StateSet:
        return StateSet(self.n, self.lts.pre_mask(a, region.mask))

    def sigma_add(self, s: int) -> None:
        self.sigma.append(s)
        self._sigma_mask |= 1 << s
        self._post_sigma |= self.lts.post_all_mask(s)

    def sigma_intersects(self, region: StateSet) -> bool:
        return bool(region.mask & self._sigma_mask)

    def has_search_witness(self, region: StateSet) -> bool:
        return bool(region.mask & (self.initial.mask | self._post_sigma))

    def search_witnesses(self, region: StateSet) -> list[int]:
        return ids_from_mask(region.mask & (self.initial.mask | self._post_sigma))


class IntervalRegionSystem:
    """Interval instance: regions are integer-interval unions over a
    code-defined symbolic system, possibly with infinitely many states."""

    finite = False

    def __init__(self, system: SymbolicSystem):
        self.system = system
        self.n_labels = len(system.labels)
        self.initial = system.initial
        self.carrier = system.carrier
        self.sigma: list[int] = []

    def full_region(self) -> IntervalRegion:
        return self.carrier

    def pre(self, a: int, region: IntervalRegion) -> IntervalRegion:
        return self.system.pre(a, region)

    def sigma_add(self, s: int) -> None:
        self.sigma.append(s)

    def sigma_intersects(self, region: IntervalRegion) -> bool:
        return any(s in region for s in self.sigma)

    def _witness_iter(self, region: IntervalRegion):
        hit = region & self.initial
        if not hit.is_empty():
            yield hit.pick()
        for s in self.sigma:
            w = self.system.succ_witness(s, region)
            if w is not None:
                yield w

    def has_search_witness(self, region: IntervalRegion) -> bool:
        return next(self._witness_iter(region), None) is not None

    def search_witnesses(self, region: IntervalRegion) -> list[int]:
        out: list[int] = []
        for w in self._witness_iter(region):
            if w not in out:
                out.append(w)
        return out

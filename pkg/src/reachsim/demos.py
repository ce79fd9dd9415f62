"""Built-in infinite-state demo systems for the symbolic engine.

Two code-defined systems exercise the interval instance of the region
algebra:

* ``succ_to_zero`` — states are the naturals, every positive state steps to
  0, the initial state is 1.  Under the universal initial preorder the
  explicit engine must refine infinitely many principals one at a time,
  while the symbolic engine converges after a single Refine that splits
  {0} from the positives.  Its finite truncations make the divergence
  measurable: the explicit engine needs a number of refines linear in the
  truncation size.

* ``countdown_chain`` — an infinite descending chain ... -> -2 -> -1 plus an
  isolated edge 0 -> 1, with the initial state 0.  Under an initial preorder
  that is the identity on {0, 1} and universal on the negatives, two Search
  steps certify sigma = {0, 1} and the engine stops without ever refining,
  even though the simulation preorder itself has infinitely many principals.
"""

from __future__ import annotations

from typing import Optional

from .intervals import IntervalRegion, SymbolicSystem
from .lts import Lts
from .relations import Partition, TwoPr

__all__ = [
    "succ_to_zero",
    "succ_to_zero_truncation",
    "countdown_chain",
    "countdown_chain_twopr",
]


def succ_to_zero() -> SymbolicSystem:
    naturals = IntervalRegion.span(0, None)
    positives = IntervalRegion.span(1, None)

    def pre(r: IntervalRegion) -> IntervalRegion:
        return positives if 0 in r else IntervalRegion.empty()

    def succ_witness(s: int, r: IntervalRegion) -> Optional[int]:
        if s >= 1 and 0 in r:
            return 0
        return None

    return SymbolicSystem(
        name="succ-to-zero",
        labels=("a",),
        carrier=naturals,
        initial=IntervalRegion.of(1),
        pre_fns=(pre,),
        succ_witness=succ_witness,
    )


def succ_to_zero_truncation(m: int) -> Lts:
    """The first ``m`` states of succ-to-zero as a finite system."""
    if m < 2:
        raise ValueError("truncation needs at least states 0 and 1")
    return Lts(m, ["a"], [(i, 0, 0) for i in range(1, m)], [1])


def countdown_chain() -> SymbolicSystem:
    carrier = IntervalRegion.span(None, 1)
    negatives = IntervalRegion.span(None, -1)

    def pre(r: IntervalRegion) -> IntervalRegion:
        out = (r & negatives).shift(-1)
        if 1 in r:
            out = out | IntervalRegion.of(0)
        return out

    def succ_witness(s: int, r: IntervalRegion) -> Optional[int]:
        if s <= -2 and s + 1 in r:
            return s + 1
        if s == 0 and 1 in r:
            return 1
        return None

    return SymbolicSystem(
        name="countdown-chain",
        labels=("a",),
        carrier=carrier,
        initial=IntervalRegion.of(0),
        pre_fns=(pre,),
        succ_witness=succ_witness,
    )


def countdown_chain_twopr() -> TwoPr:
    """Initial preorder for the countdown demo: identity on {0, 1}, universal
    on the negatives."""
    blocks = [IntervalRegion.of(0), IntervalRegion.of(1), IntervalRegion.span(None, -1)]
    carrier = IntervalRegion.span(None, 1)
    p = Partition.from_regions(carrier, list(blocks))
    q = Partition.from_regions(carrier, list(blocks))
    ph = sorted(p.handles())
    qh = sorted(q.handles())
    return TwoPr(p, q, {ph[i]: {qh[i]} for i in range(3)})

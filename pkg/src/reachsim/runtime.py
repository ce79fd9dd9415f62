"""Shared engine plumbing: nondeterminism strategies, counters, outcomes."""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from typing import Optional

from .relations import Relation, TwoPr
from .statesets import StateSet

__all__ = ["Strategy", "Counters", "EngineOutcome", "TripleQueue", "DEFAULT_CAP"]

DEFAULT_CAP = 10_000_000

BRANCH_POLICIES = ("search-first", "refine-first", "alternating", "random")
PICK_POLICIES = ("min", "random")


@dataclass(frozen=True)
class Strategy:
    """How the nondeterministic guarded choice is resolved.

    ``branch`` picks among enabled guarded commands, ``pick`` selects within
    the chosen command's candidate set.  Fixing the seed makes a run
    reproducible bit for bit.
    """

    branch: str = "search-first"
    pick: str = "min"
    seed: int = 0

    def __post_init__(self):
        if self.branch not in BRANCH_POLICIES:
            raise ValueError(f"branch must be one of {BRANCH_POLICIES}, got {self.branch!r}")
        if self.pick not in PICK_POLICIES:
            raise ValueError(f"pick must be one of {PICK_POLICIES}, got {self.pick!r}")

    def rng(self) -> random.Random:
        return random.Random(self.seed)

    def prefers_search(self, iteration: int, rng: random.Random) -> bool:
        """Which branch to try first when both Search and Refine are enabled."""
        if self.branch == "search-first":
            return True
        if self.branch == "refine-first":
            return False
        if self.branch == "alternating":
            return iteration % 2 == 0
        return rng.random() < 0.5

    def choose(self, candidates: list, rng: random.Random):
        """Pick from a non-empty, canonically ordered candidate list."""
        if self.pick == "min":
            return candidates[0]
        return candidates[rng.randrange(len(candidates))]


@dataclass
class Counters:
    """Branch execution counts.

    ``search_steps`` counts sigma-growing Searches only; the partition
    engine's U_bad-recording Searches consume ``iterations`` (the cap
    budget) without growing sigma.
    """

    search_steps: int = 0
    refine_steps: int = 0
    expand_steps: int = 0
    q_splits: int = 0
    iterations: int = 0

    def to_json(self) -> dict:
        return {
            "search_steps": self.search_steps,
            "refine_steps": self.refine_steps,
            "expand_steps": self.expand_steps,
            "q_splits": self.q_splits,
            "iterations": self.iterations,
        }


class TripleQueue:
    """Pending work triples with policy-driven pops.

    Min policy pops the lexicographic minimum (label first, then the two
    endpoints), which is the canonical tie-break; random policy pops a
    seeded-pseudo-random member.  Membership is deduplicated.
    """

    def __init__(self, pick: str, rng: random.Random):
        self._min = pick == "min"
        self._rng = rng
        self._heap: list[tuple] = []
        self._items: list[tuple] = []
        self._members: set[tuple] = set()

    def push(self, triple: tuple) -> None:
        if triple in self._members:
            return
        self._members.add(triple)
        if self._min:
            heapq.heappush(self._heap, triple)
        else:
            self._items.append(triple)

    def pop(self) -> Optional[tuple]:
        if self._min:
            while self._heap:
                t = heapq.heappop(self._heap)
                if t in self._members:
                    self._members.discard(t)
                    return t
            return None
        while self._items:
            i = self._rng.randrange(len(self._items))
            self._items[i], self._items[-1] = self._items[-1], self._items[i]
            t = self._items.pop()
            if t in self._members:
                self._members.discard(t)
                return t
        return None

    def __bool__(self) -> bool:
        return bool(self._members)


@dataclass
class EngineOutcome:
    """What an engine run returns: the relation (or triple), sigma, counters."""

    engine: str
    relation: Optional[Relation]
    twopr: Optional[TwoPr]
    sigma: StateSet | list[int]
    counters: Counters
    elapsed: float
    final: bool
    trace: Optional[list] = None

    def sigma_ids(self) -> list[int]:
        if isinstance(self.sigma, StateSet):
            return self.sigma.to_ids()
        return sorted(self.sigma)

    def marked_principals(self) -> set[frozenset[int]]:
        """R^sigma: the principal values that intersect sigma."""
        if self.relation is None:
            raise ValueError("no materialized relation on this outcome")
        sig = set(self.sigma_ids())
        out = set()
        for ids in self.relation.to_lists():
            if sig.intersection(ids):
                out.add(frozenset(ids))
        return out

    def principals_of_sigma(self) -> set[frozenset[int]]:
        """{R(x) | x in sigma}: the definition-(2) reading."""
        if self.relation is None:
            raise ValueError("no materialized relation on this outcome")
        lists = self.relation.to_lists()
        return {frozenset(lists[s]) for s in self.sigma_ids()}

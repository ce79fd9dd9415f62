"""Brute-force ground truth for the acceptance and property tests.

Everything here is deliberately naive and shares no code with the engines:
relations are sets of pairs, reachability is a plain BFS over the adjacency
lists, and the simulation preorder is the greatest fixpoint of the
definitional pair-elimination operator.  Independence is the point — these
functions are the measuring stick the engines are held against.
"""

from __future__ import annotations

from dataclasses import dataclass

from .lts import Lts
from .relations import Partition, Relation, preorder_check
from .statesets import StateSet

__all__ = [
    "GroundTruth",
    "compute_rsim_pairwise",
    "reachable_states_bfs",
    "reachable_principals",
    "reachable_blocks",
    "partition_from_preorder",
    "ground_truth",
]


def reachable_states_bfs(lts: Lts) -> set[int]:
    """post*(I) by textbook BFS over the forward adjacency."""
    seen = set(lts.initial.to_ids())
    frontier = list(seen)
    while frontier:
        x = frontier.pop()
        for a in range(len(lts.labels)):
            for y in lts.fwd[a][x]:
                if y not in seen:
                    seen.add(y)
                    frontier.append(y)
    return seen


def compute_rsim_pairwise(lts: Lts, r_init: Relation) -> Relation:
    """Greatest simulation inside r_init, as a pair-set fixpoint.

    Iterates F(R) = {(s, t) in R | every move of s is matched by a move of t
    into R-related targets} from the initial pair set until stable.  This is
    a different formulation from the principal-based engines on purpose.
    """
    n = lts.n_states
    pairs = {(x, y) for x, y in r_init.pairs()}
    changed = True
    while changed:
        changed = False
        for s, t in sorted(pairs):
            ok = True
            for a in range(len(lts.labels)):
                for s2 in lts.fwd[a][s]:
                    if not any((s2, t2) in pairs for t2 in lts.fwd[a][t]):
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                pairs.discard((s, t))
                changed = True
    return Relation.from_pairs(n, pairs)


def partition_from_preorder(r: Relation) -> Partition:
    """Partition induced by the equivalence r intersect r^-1."""
    report = preorder_check(r)
    if not report.is_preorder:
        raise ValueError(f"not a preorder: {report.counterexample}")
    classes: dict[frozenset[int], set[int]] = {}
    principal = {x: frozenset(ids) for x, ids in enumerate(r.to_lists())}
    for x in range(r.n):
        # same block iff mutually related, which for preorders means equal principals
        classes.setdefault(principal[x], set()).add(x)
    return Partition.from_blocks(r.n, [StateSet.of(r.n, ids) for ids in classes.values()])


def reachable_principals(r: Relation, reach: set[int], mode: str) -> set[frozenset[int]]:
    """The two reachable-principal readings: 'eq1' intersects the reachable
    set, 'eq2' keeps only principals generated by reachable states."""
    principals = [frozenset(ids) for ids in r.to_lists()]
    if mode == "eq1":
        return {p for p in principals if p & reach}
    if mode == "eq2":
        return {principals[s] for s in reach}
    raise ValueError(f"mode must be 'eq1' or 'eq2', got {mode!r}")


def reachable_blocks(partition, reach: set[int]) -> set[frozenset[int]]:
    """Blocks that contain at least one reachable state."""
    out = set()
    for b in partition.blocks():
        ids = frozenset(b.to_ids())
        if ids & reach:
            out.add(ids)
    return out


@dataclass
class GroundTruth:
    """Everything the acceptance checks compare engine output against."""

    n: int
    reach: set[int]
    rsim: Relation
    psim: Partition
    principals_eq1: set[frozenset[int]]
    principals_eq2: set[frozenset[int]]
    blocks_reachable: set[frozenset[int]]

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "reach": sorted(self.reach),
            "rsim": self.rsim.to_lists(),
            "psim": self.psim.canonical_blocks(),
            "principals_eq1": sorted(sorted(p) for p in self.principals_eq1),
            "principals_eq2": sorted(sorted(p) for p in self.principals_eq2),
            "blocks_reachable": sorted(sorted(b) for b in self.blocks_reachable),
        }


def ground_truth(lts: Lts, r_init: Relation) -> GroundTruth:
    reach = reachable_states_bfs(lts)
    rsim = compute_rsim_pairwise(lts, r_init)
    psim = partition_from_preorder(rsim)
    return GroundTruth(
        n=lts.n_states,
        reach=reach,
        rsim=rsim,
        psim=psim,
        principals_eq1=reachable_principals(rsim, reach, "eq1"),
        principals_eq2=reachable_principals(rsim, reach, "eq2"),
        blocks_reachable=reachable_blocks(psim, reach),
    )

"""Relations over states, partitions with stable block handles, and 2PR triples.

A relation is stored through its principals: ``R(x)`` is the set of states
related to ``x`` (its candidate simulators).  A 2PR triple <P, tau, Q> is two
partitions plus a map from P-block handles to sets of Q-block handles; it
encodes the relation ``x -> union of tau(P(x))``.

Block handles are stable integers: a split retires the parent handle and
mints two fresh ones, so a handle can never silently change extension.
Partitions hold either finite ``StateSet`` blocks or ``IntervalRegion``
blocks; both value types share the boolean-operator surface the code needs.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from .intervals import IntervalRegion
from .statesets import StateSet, ids_from_mask, mask_from_ids

__all__ = [
    "Relation",
    "Partition",
    "TwoPr",
    "PreorderReport",
    "PreorderInputError",
    "induce_twopr",
    "twopr_to_relation",
    "induced_partition",
    "meet",
    "preorder_check",
    "reflexive_transitive_closure",
    "parse_preorder_spec",
]


class PreorderInputError(ValueError):
    """Rejected preorder input (bad file, not a preorder, out-of-range ids)."""


class Relation:
    """Relation on [0, n) stored as one principal bitmask per state."""

    __slots__ = ("n", "masks")

    def __init__(self, n: int, masks: Iterable[int]):
        self.n = n
        self.masks = list(masks)
        if len(self.masks) != n:
            raise ValueError("need one principal per state")
        full = (1 << n) - 1
        for m in self.masks:
            if m < 0 or m & ~full:
                raise ValueError("principal has members outside [0, n)")

    @classmethod
    def universal(cls, n: int) -> "Relation":
        full = (1 << n) - 1
        return cls(n, [full] * n)

    @classmethod
    def identity(cls, n: int) -> "Relation":
        return cls(n, [1 << x for x in range(n)])

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple[int, int]]) -> "Relation":
        masks = [0] * n
        for x, y in pairs:
            if not (0 <= x < n and 0 <= y < n):
                raise ValueError(f"pair ({x}, {y}) out of range")
            masks[x] |= 1 << y
        return cls(n, masks)

    @classmethod
    def from_equivalence_blocks(cls, n: int, blocks: Iterable[Iterable[int]]) -> "Relation":
        """Equivalence with the given blocks; unlisted states are singletons."""
        masks = [1 << x for x in range(n)]
        seen = 0
        for block in blocks:
            ids = list(block)
            m = mask_from_ids(ids)
            if m >> n:
                raise ValueError("block member out of range")
            if m & seen:
                raise ValueError("blocks overlap")
            seen |= m
            for x in ids:
                masks[x] = m
        return cls(n, masks)

    def principal(self, x: int) -> StateSet:
        return StateSet(self.n, self.masks[x])

    def pairs(self) -> list[tuple[int, int]]:
        return [(x, y) for x in range(self.n) for y in ids_from_mask(self.masks[x])]

    def converse(self) -> "Relation":
        inv = [0] * self.n
        for x in range(self.n):
            for y in ids_from_mask(self.masks[x]):
                inv[y] |= 1 << x
        return Relation(self.n, inv)

    def is_reflexive(self) -> bool:
        return all(m >> x & 1 for x, m in enumerate(self.masks))

    def copy(self) -> "Relation":
        return Relation(self.n, self.masks)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Relation) and self.n == other.n and self.masks == other.masks

    def __hash__(self) -> int:
        return hash((self.n, tuple(self.masks)))

    def __repr__(self) -> str:
        return f"Relation(n={self.n})"

    def issubset(self, other: "Relation") -> bool:
        return self.n == other.n and all(
            m | o == o for m, o in zip(self.masks, other.masks)
        )

    def group_by_principal(self) -> dict[int, list[int]]:
        """Map from principal value (mask) to the sorted states owning it."""
        groups: dict[int, list[int]] = {}
        for x, m in enumerate(self.masks):
            groups.setdefault(m, []).append(x)
        return groups

    def principal_partition(self) -> "Partition":
        """Theorem-1 P: states grouped by equal principals."""
        blocks = [StateSet(self.n, mask_from_ids(xs)) for xs in self.group_by_principal().values()]
        return Partition.from_blocks(self.n, blocks)

    def to_lists(self) -> list[list[int]]:
        return [ids_from_mask(m) for m in self.masks]


@dataclass
class PreorderReport:
    reflexive: bool
    transitive: bool
    symmetric: bool
    counterexample: Optional[tuple[str, tuple[int, ...]]] = None

    @property
    def is_preorder(self) -> bool:
        return self.reflexive and self.transitive

    @property
    def is_equivalence(self) -> bool:
        return self.is_preorder and self.symmetric


def preorder_check(r: Relation) -> PreorderReport:
    """Check reflexivity/transitivity/symmetry, reporting a witness on failure."""
    reflexive = True
    transitive = True
    symmetric = True
    witness: Optional[tuple[str, tuple[int, ...]]] = None

    for x, m in enumerate(r.masks):
        if not m >> x & 1:
            reflexive = False
            if witness is None:
                witness = ("reflexivity", (x,))
            break

    # distinct principal values suffice: R is transitive iff R(R(x)) <= R(x)
    for m, owners in r.group_by_principal().items():
        closure = 0
        for y in ids_from_mask(m):
            closure |= r.masks[y]
        if closure & ~m:
            transitive = False
            if witness is None:
                x = owners[0]
                for y in ids_from_mask(m):
                    extra = r.masks[y] & ~m
                    if extra:
                        z = ids_from_mask(extra)[0]
                        witness = ("transitivity", (x, y, z))
                        break
            break

    # symmetry via owner groups: every y in a principal must relate back to
    # all of that principal's owners
    for m, owners in r.group_by_principal().items():
        o_mask = mask_from_ids(owners)
        done = False
        for y in ids_from_mask(m):
            missing = o_mask & ~r.masks[y]
            if missing:
                symmetric = False
                if witness is None:
                    witness = ("symmetry", (ids_from_mask(missing)[0], y))
                done = True
                break
        if done:
            break

    return PreorderReport(reflexive, transitive, symmetric, witness)


def reflexive_transitive_closure(r: Relation) -> Relation:
    masks = [m | (1 << x) for x, m in enumerate(r.masks)]
    changed = True
    while changed:
        changed = False
        for x in range(r.n):
            m = masks[x]
            grown = m
            for y in ids_from_mask(m):
                grown |= masks[y]
            if grown != m:
                masks[x] = grown
                changed = True
    return Relation(r.n, masks)


class Partition:
    """Partition with stable integer block handles.

    ``universe`` is an int (finite, blocks are StateSets) or an
    IntervalRegion carrier (blocks are IntervalRegions).
    """

    def __init__(self, universe, blocks: dict[int, object], next_handle: int, block_of=None):
        self.universe = universe
        self._blocks = blocks
        self._next = next_handle
        self._block_of = block_of  # per-state handle array, finite instance only

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_blocks(cls, n: int, blocks: Iterable[StateSet]) -> "Partition":
        blocks = list(blocks)
        seen = 0
        count = 0
        table: dict[int, object] = {}
        block_of = [-1] * n
        for h, b in enumerate(blocks):
            if b.n != n:
                raise ValueError("block over wrong universe")
            if not b.mask:
                raise ValueError("empty block")
            if b.mask & seen:
                raise ValueError("blocks overlap")
            seen |= b.mask
            count += len(b)
            table[h] = b
            for x in b:
                block_of[x] = h
        if count != n:
            raise ValueError("blocks do not cover the universe")
        return cls(n, table, len(blocks), block_of)

    @classmethod
    def from_regions(cls, carrier: IntervalRegion, regions: Iterable[IntervalRegion]) -> "Partition":
        regions = list(regions)
        union = IntervalRegion.empty()
        for i, r in enumerate(regions):
            if r.is_empty():
                raise ValueError("empty block")
            if not (r & union).is_empty():
                raise ValueError("blocks overlap")
            union = union | r
        if union != carrier:
            raise ValueError("blocks do not cover the carrier")
        return cls(carrier, dict(enumerate(regions)), len(regions))

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls.from_blocks(n, [StateSet(n, 1 << x) for x in range(n)])

    @classmethod
    def universal(cls, n: int) -> "Partition":
        return cls.from_blocks(n, [StateSet.full(n)])

    # -- views ---------------------------------------------------------------

    @property
    def finite(self) -> bool:
        return isinstance(self.universe, int)

    def handles(self) -> list[int]:
        return list(self._blocks)

    def block(self, handle: int):
        return self._blocks[handle]

    def is_live(self, handle: int) -> bool:
        return handle in self._blocks

    def __len__(self) -> int:
        return len(self._blocks)

    def __iter__(self):
        return iter(self._blocks.items())

    def block_of(self, x: int) -> int:
        """Handle of the block containing state ``x``."""
        if self._block_of is not None:
            return self._block_of[x]
        for h, b in self._blocks.items():
            if x in b:
                return h
        raise KeyError(x)

    def blocks(self) -> list[object]:
        return list(self._blocks.values())

    def canonical_blocks(self) -> list[list[int]]:
        """Finite blocks as sorted id lists, ordered by minimum element."""
        out = [b.to_ids() for b in self._blocks.values()]
        out.sort(key=lambda ids: ids[0])
        return out

    def as_key(self) -> frozenset:
        """Handle-free content, for partition equality tests."""
        return frozenset(
            b.mask if isinstance(b, StateSet) else b.intervals for b in self._blocks.values()
        )

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Partition)
            and self.universe == other.universe
            and self.as_key() == other.as_key()
        )

    def __repr__(self) -> str:
        return f"Partition({len(self._blocks)} blocks)"

    def copy(self) -> "Partition":
        return Partition(
            self.universe,
            dict(self._blocks),
            self._next,
            None if self._block_of is None else list(self._block_of),
        )

    # -- mutation ------------------------------------------------------------

    def split(self, handle: int, part1, part2) -> tuple[int, int]:
        """Replace a block by two non-empty halves; returns the new handles.

        The parent handle is retired so stale references fail fast.
        """
        old = self._blocks.pop(handle)
        if isinstance(old, StateSet):
            ok = part1.mask and part2.mask and (part1.mask & part2.mask) == 0 \
                and (part1.mask | part2.mask) == old.mask
        else:
            ok = (not part1.is_empty()) and (not part2.is_empty()) \
                and (part1 & part2).is_empty() and (part1 | part2) == old
        if not ok:
            self._blocks[handle] = old
            raise ValueError("split halves must be non-empty, disjoint, and cover the block")
        h1, h2 = self._next, self._next + 1
        self._next += 2
        self._blocks[h1] = part1
        self._blocks[h2] = part2
        if self._block_of is not None:
            for x in part1:
                self._block_of[x] = h1
            for x in part2:
                self._block_of[x] = h2
        return h1, h2


def meet(p: Partition, q: Partition) -> Partition:
    """Coarsest partition finer than both (the lattice meet)."""
    if p.universe != q.universe:
        raise ValueError("partitions over different carriers")
    if p.finite:
        blocks = []
        for b in p.blocks():
            for c in q.blocks():
                inter = b & c
                if inter.mask:
                    blocks.append(inter)
        return Partition.from_blocks(p.universe, blocks)
    regions = []
    for b in p.blocks():
        for c in q.blocks():
            inter = b & c
            if not inter.is_empty():
                regions.append(inter)
    return Partition.from_regions(p.universe, regions)


class TwoPr:
    """2PR triple <P, tau, Q>: two partitions and a block-level relation."""

    def __init__(self, p: Partition, q: Partition, tau: dict[int, set[int]]):
        if p.universe != q.universe:
            raise ValueError("P and Q over different carriers")
        for bh in p.handles():
            if bh not in tau:
                raise ValueError(f"tau missing P-block {bh}")
        for bh, cs in tau.items():
            if not p.is_live(bh):
                raise ValueError(f"tau keyed by dead P-block {bh}")
            for ch in cs:
                if not q.is_live(ch):
                    raise ValueError(f"tau({bh}) references dead Q-block {ch}")
        self.p = p
        self.q = q
        self.tau = {h: set(cs) for h, cs in tau.items()}

    def utau(self, handle: int):
        """Union of the Q-blocks in tau(B): the principal of B's states."""
        cs = self.tau[handle]
        if self.p.finite:
            m = 0
            for ch in cs:
                m |= self.q.block(ch).mask
            return StateSet(self.p.universe, m)
        out = IntervalRegion.empty()
        for ch in cs:
            out = out | self.q.block(ch)
        return out

    def is_reflexive(self) -> bool:
        """Extensivity test: every P-block sits inside its own principal."""
        return all(b.issubset(self.utau(bh)) for bh, b in self.p)

    def copy(self) -> "TwoPr":
        return TwoPr(self.p.copy(), self.q.copy(), {h: set(cs) for h, cs in self.tau.items()})

    def __repr__(self) -> str:
        return f"TwoPr(P={len(self.p)} blocks, Q={len(self.q)} blocks)"


def induce_twopr(r: Relation) -> TwoPr:
    """The 2PR triple <P_R, tau_R, Q_R> induced by a finite relation.

    P groups states with equal principals, Q groups states with equal
    inverse principals, and tau(B) collects the Q-blocks inside R(B).
    """
    n = r.n
    groups = r.group_by_principal()
    p_blocks = [StateSet(n, mask_from_ids(xs)) for xs in groups.values()]
    p = Partition.from_blocks(n, p_blocks)

    # refine by the distinct principal values: y, z share an inverse principal
    # iff they agree on membership in every principal value
    q_masks = [(1 << n) - 1] if n else []
    for value in groups:
        nxt = []
        for g in q_masks:
            a, b = g & value, g & ~value
            if a:
                nxt.append(a)
            if b:
                nxt.append(b)
        q_masks = nxt
    q = Partition.from_blocks(n, [StateSet(n, m) for m in q_masks])

    tau: dict[int, set[int]] = {}
    for bh, b in p:
        value = r.masks[b.pick()]
        tau[bh] = {ch for ch, c in q if c.mask | value == value}
    return TwoPr(p, q, tau)


def twopr_to_relation(t: TwoPr) -> Relation:
    """Materialize R(x) = union of tau(P(x)); finite triples only."""
    if not t.p.finite:
        raise ValueError("cannot materialize an interval-carrier triple")
    n = t.p.universe
    masks = [0] * n
    for bh, b in t.p:
        m = t.utau(bh).mask
        for x in b:
            masks[x] = m
    return Relation(n, masks)


def induced_partition(t: TwoPr) -> Partition:
    """Group states by equal principal of the encoded relation.

    Always coarser than (or equal to) t.P: whole P-blocks are merged.
    """
    by_value: dict = {}
    for bh in t.p.handles():
        u = t.utau(bh)
        key = u.mask if isinstance(u, StateSet) else u.intervals
        by_value.setdefault(key, []).append(bh)
    if t.p.finite:
        blocks = []
        for hs in by_value.values():
            m = 0
            for bh in hs:
                m |= t.p.block(bh).mask
            blocks.append(StateSet(t.p.universe, m))
        return Partition.from_blocks(t.p.universe, blocks)
    regions = []
    for hs in by_value.values():
        u = IntervalRegion.empty()
        for bh in hs:
            u = u | t.p.block(bh)
        regions.append(u)
    return Partition.from_regions(t.p.universe, regions)


# -- preorder input files -----------------------------------------------------


def parse_preorder_spec(spec: str, n: int, *, close: bool = False) -> Relation:
    """Build the initial preorder from a CLI source designator.

    ``universal`` means the full relation; ``partition:FILE`` reads one
    equivalence block per line; ``pairs:FILE`` reads explicit ``x y`` lines,
    which must already form a preorder unless ``close`` is set.
    """
    if spec == "universal":
        return Relation.universal(n)
    if spec.startswith("partition:"):
        path = Path(spec[len("partition:"):])
        blocks = []
        try:
            text = path.read_text()
        except OSError as e:
            raise PreorderInputError(f"cannot read {path}: {e}") from None
        for ln, raw in enumerate(text.splitlines(), start=1):
            raw = raw.strip()
            if not raw or raw.startswith("#"):
                continue
            try:
                ids = [int(tok) for tok in raw.split()]
            except ValueError:
                raise PreorderInputError(f"{path}: line {ln}: expected state ids") from None
            if any(i < 0 or i >= n for i in ids):
                raise PreorderInputError(f"{path}: line {ln}: state id out of range [0, {n})")
            blocks.append(ids)
        try:
            return Relation.from_equivalence_blocks(n, blocks)
        except ValueError as e:
            raise PreorderInputError(f"{path}: {e}") from None
    if spec.startswith("pairs:"):
        path = Path(spec[len("pairs:"):])
        pairs = []
        try:
            text = path.read_text()
        except OSError as e:
            raise PreorderInputError(f"cannot read {path}: {e}") from None
        for ln, raw in enumerate(text.splitlines(), start=1):
            raw = raw.strip()
            if not raw or raw.startswith("#"):
                continue
            toks = raw.split()
            if len(toks) != 2 or not all(t.isdigit() for t in toks):
                raise PreorderInputError(f"{path}: line {ln}: expected 'x y'")
            x, y = int(toks[0]), int(toks[1])
            if x >= n or y >= n:
                raise PreorderInputError(f"{path}: line {ln}: state id out of range [0, {n})")
            pairs.append((x, y))
        r = Relation.from_pairs(n, pairs)
        if close:
            r = reflexive_transitive_closure(r)
        report = preorder_check(r)
        if not report.is_preorder:
            kind, states = report.counterexample
            raise PreorderInputError(
                f"{path}: relation is not a preorder ({kind} fails at {states}); "
                "use --close to take the reflexive-transitive closure"
            )
        return r
    raise PreorderInputError(
        f"unknown preorder source {spec!r}; expected 'universal', 'partition:FILE' or 'pairs:FILE'"
    )

"""The 2PR-based symbolic engine.

The relation is never materialized during the run: it is carried as a triple
<P, tau, Q> of two partitions and a block-level map, and every step works on
whole blocks through the region-algebra contract.  Search certifies one
concrete reachable witness at a time; Refine a-stabilizes a pair of P-blocks
by splitting the source on pre_a of the target block, splitting the
straddling Q-blocks on pre_a of the target's principal, and pruning the
source's tau entry — one such step can shrink the principals of every state
in the split block at once, which is exactly why this engine can terminate
on systems where the explicit one cannot.

The engine is one code path over the region contract.  On finite systems it
additionally derives its candidate block pairs from the concrete transitions
(there, B & pre_a(C) is non-empty iff some transition crosses from B to C)
and keeps them fresh through dirty events; on symbolic systems the candidate
space is the (small) P x P product, rescanned when the queue drains.  Either
way, U and V are recomputed from their definitions before the engine is
allowed to return.
"""

from __future__ import annotations

import time
from typing import Optional, Union

from .algebra import FiniteRegionSystem, IntervalRegionSystem
from .intervals import SymbolicSystem
from .lts import Lts, post_star
from .relations import Relation, TwoPr, induce_twopr, twopr_to_relation
from .runtime import DEFAULT_CAP, Counters, EngineOutcome, Strategy, TripleQueue
from .statesets import StateSet

__all__ = ["TwoPrEngine", "run_twopr", "universal_twopr", "as_region_system"]


def as_region_system(system) -> Union[FiniteRegionSystem, IntervalRegionSystem]:
    if isinstance(system, Lts):
        return FiniteRegionSystem(system)
    if isinstance(system, SymbolicSystem):
        return IntervalRegionSystem(system)
    if isinstance(system, (FiniteRegionSystem, IntervalRegionSystem)):
        return system
    raise TypeError(f"cannot interpret {type(system).__name__} as a region system")


def universal_twopr(system) -> TwoPr:
    """The triple encoding the universal initial preorder: P = Q = {carrier}."""
    from .relations import Partition

    sys = as_region_system(system)
    if sys.finite:
        p = Partition.from_blocks(sys.n, [StateSet.full(sys.n)])
        q = Partition.from_blocks(sys.n, [StateSet.full(sys.n)])
    else:
        p = Partition.from_regions(sys.carrier, [sys.carrier])
        q = Partition.from_regions(sys.carrier, [sys.carrier])
    return TwoPr(p, q, {p.handles()[0]: {q.handles()[0]}})


class TwoPrEngine:
    """Mutable engine state; ``run_twopr`` is the convenience driver."""

    def __init__(
        self,
        system,
        twopr: TwoPr,
        sigma_init=(),
        strategy: Strategy = Strategy(),
        cap: int = DEFAULT_CAP,
        *,
        trace: bool = False,
        debug: bool = False,
        validate: bool = True,
    ):
        self.sys = as_region_system(system)
        triple = twopr.copy()  # engines own a private snapshot
        self.p = triple.p
        self.q = triple.q
        self.tau = triple.tau
        self.strategy = strategy
        self.rng = strategy.rng()
        self.cap = cap
        self.debug = debug
        self.counters = Counters()
        self.fast = self.sys.finite

        if validate:
            self._validate_preorder(twopr)

        self.utau: dict[int, object] = {h: triple.utau(h) for h in self.p.handles()}
        self.tau_inv: dict[int, set[int]] = {ch: set() for ch in self.q.handles()}
        for bh, cs in self.tau.items():
            for ch in cs:
                self.tau_inv[ch].add(bh)

        self._reach_mask: Optional[int] = None
        if self.fast:
            self._reach_mask = post_star(self.sys.lts).mask
            bad = [s for s in sigma_init if not self._reach_mask >> s & 1]
            if bad:
                raise ValueError(f"sigma_init contains unreachable states: {bad}")
        else:
            bad = [s for s in sigma_init if s not in self.sys.carrier]
            if bad:
                raise ValueError(f"sigma_init outside the carrier: {bad}")
        for s in sigma_init:
            self.sys.sigma_add(s)

        self.marked: set[int] = set()
        self.unmarked: set[int] = set()
        for h in self.p.handles():
            (self.marked if self.sys.sigma_intersects(self.utau[h]) else self.unmarked).add(h)

        self.pending = TripleQueue(strategy.pick, self.rng)
        self.blocked: dict[int, set[tuple[int, int, int]]] = {}
        # block-level adjacency (finite fast path): (label, neighbor handle)
        self.bg_in: dict[int, set[tuple[int, int]]] = {}
        self.bg_out: dict[int, set[tuple[int, int]]] = {}
        self._push_initial_candidates()

        self.trace: Optional[list[list[int]]] = None
        if trace:
            if not self.fast:
                raise ValueError("trace recording requires a finite system")
            self.trace = [self._materialize_masks()]

        self.r_init_masks = self._materialize_masks() if (debug and self.fast) else None

    # -- setup helpers ---------------------------------------------------------

    def _validate_preorder(self, twopr: TwoPr) -> None:
        if twopr.p.as_key() != twopr.q.as_key():
            raise ValueError("initial triple must have P = Q (it encodes a preorder)")
        if not twopr.is_reflexive():
            raise ValueError("initial triple does not encode a reflexive relation")
        blocks = {h: twopr.p.block(h) for h in twopr.p.handles()}
        principals = {h: twopr.utau(h) for h in blocks}
        for bh, ub in principals.items():
            for ah, ab in blocks.items():
                if not (ab & ub).is_empty() and not principals[ah].issubset(ub):
                    raise ValueError("initial triple does not encode a transitive relation")

    def _push_initial_candidates(self) -> None:
        if self.fast:
            for h in self.p.handles():
                self.bg_in[h] = set()
                self.bg_out[h] = set()
            lts = self.sys.lts
            bof = self.p._block_of
            for a in range(self.sys.n_labels):
                fwd_a = lts.fwd[a]
                for x in range(self.sys.n):
                    row = fwd_a[x]
                    if row:
                        bx = bof[x]
                        for y in row:
                            self.bg_out[bx].add((a, bof[y]))
            for bh, outs in self.bg_out.items():
                for a, ch in outs:
                    self.bg_in[ch].add((a, bh))
                    self.pending.push((a, bh, ch))
        else:
            for a in range(self.sys.n_labels):
                for bh in self.p.handles():
                    for ch in self.p.handles():
                        self.pending.push((a, bh, ch))

    def _materialize_masks(self) -> list[int]:
        masks = [0] * self.sys.n
        for bh, b in self.p:
            m = self.utau[bh].mask
            for x in b:
                masks[x] = m
        return masks

    # -- block-graph events (finite fast path) -----------------------------------
    #
    # bg_in/bg_out start exact and stay a superset of the true block
    # adjacency: a split hands each half every pair its parent had, without
    # inspecting member edges.  Because block extents are frozen per handle,
    # a pair whose B & pre_a(C) test comes up empty can never become real,
    # so verification deletes it permanently — each false pair costs one
    # discarded pop, and the definitional rescan backstops the bookkeeping.

    def _bg_drop_pair(self, a: int, bh: int, ch: int) -> None:
        outs = self.bg_out.get(bh)
        if outs is not None:
            outs.discard((a, ch))
        ins = self.bg_in.get(ch)
        if ins is not None:
            ins.discard((a, bh))

    def _bg_split(self, old: int, h1: int, h2: int) -> None:
        old_in = self.bg_in.pop(old)
        old_out = self.bg_out.pop(old)
        halves = (h1, h2)
        new_in: set[tuple[int, int]] = set()
        new_out: set[tuple[int, int]] = set()
        push = self.pending.push
        for a, wh in old_in:
            if wh == old:
                continue
            entry = self.bg_out[wh]
            entry.discard((a, old))
            for h in halves:
                entry.add((a, h))
                new_in.add((a, wh))
                push((a, wh, h))
        for a, ch in old_out:
            if ch == old:
                continue
            entry = self.bg_in[ch]
            entry.discard((a, old))
            for h in halves:
                entry.add((a, h))
                new_out.add((a, ch))
                push((a, h, ch))
        self_labels = {a for a, wh in old_in if wh == old} | {
            a for a, ch in old_out if ch == old
        }
        for a in self_labels:
            for src in halves:
                for dst in halves:
                    new_in.add((a, src))
                    new_out.add((a, dst))
                    push((a, src, dst))
        self.bg_in[h1] = set(new_in)
        self.bg_in[h2] = new_in
        self.bg_out[h1] = set(new_out)
        self.bg_out[h2] = new_out

    # -- guard evaluation -----------------------------------------------------------

    def _in_v(self, t: tuple[int, int, int], *, block_on_unmarked: bool = True) -> bool:
        a, bh, ch = t
        if not (self.p.is_live(bh) and self.p.is_live(ch)):
            return False
        if bh in self.unmarked:
            if block_on_unmarked:
                self.blocked.setdefault(bh, set()).add(t)
            return False
        pre_c = self.sys.pre(a, self.p.block(ch))
        if (self.p.block(bh) & pre_c).is_empty():
            if self.fast:
                self._bg_drop_pair(a, bh, ch)  # block extents are frozen: final
            return False
        s_region = self.sys.pre(a, self.utau[ch])
        return not self.utau[bh].issubset(s_region)

    def _pop_refine(self) -> Optional[tuple[int, int, int]]:
        while True:
            t = self.pending.pop()
            if t is None:
                return None
            if self._in_v(t):
                return t

    def _find_search(self) -> Optional[int]:
        cands = []
        for h in sorted(self.unmarked):
            if self.sys.has_search_witness(self.utau[h]):
                if self.strategy.pick == "min":
                    return h
                cands.append(h)
        if cands:
            return cands[self.rng.randrange(len(cands))]
        return None

    # -- the two step bodies -----------------------------------------------------------

    def search_step(self, handle: int) -> int:
        """Grow sigma by one witness from the chosen U-block; returns it."""
        u = self.utau[handle]
        if handle not in self.unmarked:
            raise ValueError("search_step: block principal already meets sigma")
        wits = self.sys.search_witnesses(u)
        if not wits:
            raise ValueError("search_step: block principal does not meet I u post(sigma)")
        s = self.strategy.choose(wits, self.rng)
        self.sys.sigma_add(s)
        self.counters.search_steps += 1
        self.counters.iterations += 1
        for h in [h for h in self.unmarked if s in self.utau[h]]:
            self.unmarked.discard(h)
            self.marked.add(h)
            for t in self.blocked.pop(h, ()):  # triples that waited on this mark
                self.pending.push(t)
            if self.fast:
                for a, ch in self.bg_out[h]:
                    self.pending.push((a, h, ch))
        return s

    def refine_step(self, triple: tuple[int, int, int]) -> None:
        """a-stabilize the chosen <a, B, C> from V; splits P, Q and prunes tau."""
        if not self._in_v(triple, block_on_unmarked=False):
            raise ValueError(f"refine_step: triple {triple} is not in V")
        a, bh, ch = triple
        s_region = self.sys.pre(a, self.utau[ch])
        pre_c = self.sys.pre(a, self.p.block(ch))

        b_block = self.p.block(bh)
        b_in = b_block & pre_c
        b_out = b_block - pre_c
        if not b_out.is_empty():
            h1, h2 = self.p.split(bh, b_in, b_out)
            cs = self.tau.pop(bh)
            self.tau[h1] = set(cs)
            self.tau[h2] = cs
            for qh in cs:
                owners = self.tau_inv[qh]
                owners.discard(bh)
                owners.add(h1)
                owners.add(h2)
            shared = self.utau.pop(bh)
            self.utau[h1] = shared
            self.utau[h2] = shared
            was_marked = bh in self.marked
            self.marked.discard(bh)
            self.unmarked.discard(bh)
            (self.marked if was_marked else self.unmarked).update((h1, h2))
            self.blocked.pop(bh, None)
            if self.fast:
                self._bg_split(bh, h1, h2)
            b_prime = h1
        else:
            b_prime = bh

        # split the straddling Q-blocks inside tau(B'), rewriting every tau entry
        for qh in list(self.tau[b_prime]):
            xblk = self.q.block(qh)
            inter = xblk & s_region
            if inter.is_empty():
                continue
            diff = xblk - s_region
            if diff.is_empty():
                continue
            q1, q2 = self.q.split(qh, inter, diff)
            self.counters.q_splits += 1
            owners = self.tau_inv.pop(qh)
            self.tau_inv[q1] = set(owners)
            self.tau_inv[q2] = set(owners)
            for ah in owners:  # extensions are unchanged by this rewrite
                entry = self.tau[ah]
                entry.discard(qh)
                entry.add(q1)
                entry.add(q2)

        # prune: keep only Q-blocks inside pre_a of the target principal
        kept = set()
        for qh in self.tau[b_prime]:
            if self.q.block(qh).issubset(s_region):
                kept.add(qh)
            else:
                self.tau_inv[qh].discard(b_prime)
        self.tau[b_prime] = kept
        old = self.utau[b_prime]
        new = old & s_region  # union of the kept blocks
        assert new != old, "Refine must strictly shrink the split block's principal"
        self.utau[b_prime] = new
        self.counters.refine_steps += 1
        self.counters.iterations += 1

        if b_prime in self.marked and not self.sys.sigma_intersects(new):
            self.marked.discard(b_prime)
            self.unmarked.add(b_prime)
        if self.fast:
            # the shrunken principal can break the stability of pairs into B'
            for a, wh in self.bg_in[b_prime]:
                self.pending.push((a, wh, b_prime))

    # -- definitional recomputation --------------------------------------------------

    def _rescan(self) -> bool:
        self.marked.clear()
        self.unmarked.clear()
        for h in self.p.handles():
            (self.marked if self.sys.sigma_intersects(self.utau[h]) else self.unmarked).add(h)
        for ts in self.blocked.values():
            for t in ts:
                self.pending.push(t)
        self.blocked.clear()
        work = any(self.sys.has_search_witness(self.utau[h]) for h in self.unmarked)

        candidates: set[tuple[int, int, int]] = set()
        if self.fast:
            lts = self.sys.lts
            bof = self.p._block_of
            for a in range(self.sys.n_labels):
                fwd_a = lts.fwd[a]
                for x in range(self.sys.n):
                    bx = None
                    for y in fwd_a[x]:
                        if bx is None:
                            bx = bof[x]
                        candidates.add((a, bx, bof[y]))
        else:
            for a in range(self.sys.n_labels):
                for bh in self.p.handles():
                    for ch in self.p.handles():
                        candidates.add((a, bh, ch))
        for t in sorted(candidates):
            if self._in_v(t, block_on_unmarked=False):
                self.pending.push(t)
                work = True
        return work

    def _check_invariants(self) -> None:
        for bh, b in self.p:
            assert b.issubset(self.utau[bh]), "Inv3: B not inside its own principal"
            recomputed = None
            for qh in self.tau[bh]:
                assert self.q.is_live(qh), "tau references a dead Q handle"
                blk = self.q.block(qh)
                recomputed = blk if recomputed is None else (recomputed | blk)
            if recomputed is None:
                assert self.utau[bh].is_empty(), "utau cache out of sync"
            else:
                assert recomputed == self.utau[bh], "utau cache out of sync"
        if self.fast:
            total = 0
            for _, b in self.p:
                total += len(b)
            assert total == self.sys.n, "P lost coverage"
            sig = 0
            for s in self.sys.sigma:
                sig |= 1 << s
            assert sig & ~self._reach_mask == 0, "Inv2: sigma left post*(I)"
            if self.r_init_masks is not None:
                now = self._materialize_masks()
                assert all(m & ~r == 0 for m, r in zip(now, self.r_init_masks)), "Inv1: R grew"

    # -- driver ---------------------------------------------------------------------------

    def run(self) -> bool:
        final = True
        while True:
            if self.debug:
                self._check_invariants()
            prefer_search = self.strategy.prefers_search(self.counters.iterations, self.rng)
            search_c = None
            refine_c = None
            if prefer_search:
                search_c = self._find_search()
                if search_c is None:
                    refine_c = self._pop_refine()
            else:
                refine_c = self._pop_refine()
                if refine_c is None:
                    search_c = self._find_search()
            if search_c is None and refine_c is None:
                if self._rescan():
                    continue
                break
            if self.counters.iterations >= self.cap:
                final = False
                break
            if search_c is not None:
                self.search_step(search_c)
            else:
                self.refine_step(refine_c)
            if self.trace is not None:
                self.trace.append(self._materialize_masks())
        return final

    def snapshot(self) -> TwoPr:
        return TwoPr(self.p.copy(), self.q.copy(), {h: set(cs) for h, cs in self.tau.items()})


def run_twopr(
    system,
    twopr: TwoPr,
    sigma_init=(),
    strategy: Strategy = Strategy(),
    cap: int = DEFAULT_CAP,
    *,
    trace: bool = False,
    debug: bool = False,
    validate: bool = True,
) -> EngineOutcome:
    """Run the symbolic engine on an Lts, a SymbolicSystem, or an adapter.

    ``twopr`` must encode the initial preorder the way the induced triple
    does (P = Q, tau(B) the Q-blocks inside R_i(B)); build it with
    ``induce_twopr`` or ``universal_twopr``.
    """
    if cap < 1:
        raise ValueError("cap must be at least 1")
    start = time.perf_counter()
    engine = TwoPrEngine(
        system, twopr, sigma_init, strategy, cap,
        trace=trace, debug=debug, validate=validate,
    )
    final = engine.run()
    elapsed = time.perf_counter() - start

    result = engine.snapshot()
    if engine.fast:
        relation = twopr_to_relation(result)
        sigma: object = StateSet.of(engine.sys.n, engine.sys.sigma)
    else:
        relation = None
        sigma = sorted(engine.sys.sigma)
    return EngineOutcome(
        engine="twopr",
        relation=relation,
        twopr=result,
        sigma=sigma,
        counters=engine.counters,
        elapsed=elapsed,
        final=final,
        trace=engine.trace,
    )

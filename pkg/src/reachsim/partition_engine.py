"""The precise reachable-simulation-partition engine.

Compared with the plain explicit loop, reachability of a principal here means
"some sigma state *generates* it" (equal principal, not just non-empty
intersection), a U_bad set records states whose Search can no longer grow
sigma, and an Expand branch advances the whole frontier; once the frontier is
closed, the run hands off to the refinement-only engine and returns its
result.  On return the sigma-generated principals are exactly the reachable
simulation principals, and grouping by principal refines the reachable
simulation blocks without crossing them.

The guard sets are recomputed from their definitions every iteration: this
engine is exercised at example/corpus scale, where the logical form is both
the clearest and cheap.
"""

from __future__ import annotations

import time
from typing import Optional

from .explicit import run_refalgo
from .lts import Lts, post_star
from .relations import Relation, preorder_check
from .runtime import DEFAULT_CAP, Counters, EngineOutcome, Strategy
from .statesets import StateSet, ids_from_mask, lowest_bit

__all__ = ["PartitionEngineState", "run_partition", "expand_step", "HANDOFF", "EXPANDED"]

HANDOFF = "handoff"
EXPANDED = "expanded"


class PartitionEngineState:
    """Mutable engine state: the relation, sigma, and the U_bad set."""

    def __init__(self, lts: Lts, masks: list[int], sigma_mask: int, u_bad_mask: int = 0):
        self.lts = lts
        self.n = lts.n_states
        self.masks = masks
        self.sigma_mask = sigma_mask
        self.u_bad_mask = u_bad_mask

    @property
    def relation(self) -> Relation:
        return Relation(self.n, self.masks)

    @property
    def sigma(self) -> StateSet:
        return StateSet(self.n, self.sigma_mask)

    @property
    def u_bad(self) -> StateSet:
        return StateSet(self.n, self.u_bad_mask)

    def sigma_principal_values(self) -> set[int]:
        return {self.masks[s] for s in ids_from_mask(self.sigma_mask)}

    def post_sigma_mask(self) -> int:
        out = 0
        for s in ids_from_mask(self.sigma_mask):
            out |= self.lts.post_all_mask(s)
        return out

    def compute_u(self) -> list[int]:
        """States x with no sigma state sharing R(x), but R(x) meeting post(sigma)."""
        values = self.sigma_principal_values()
        post_sig = self.post_sigma_mask()
        return [
            x
            for x in range(self.n)
            if self.masks[x] not in values and self.masks[x] & post_sig
        ]

    def compute_v(self) -> list[tuple[int, int, int]]:
        """Unstable triples whose source principal is sigma-generated."""
        values = self.sigma_principal_values()
        lts = self.lts
        out = []
        for a in range(len(lts.labels)):
            fwd_a = lts.fwd[a]
            for x in range(self.n):
                if self.masks[x] not in values:
                    continue
                for y in fwd_a[x]:
                    if self.masks[x] & ~lts.pre_mask(a, self.masks[y]):
                        out.append((a, x, y))
        return out


def expand_step(state: PartitionEngineState, *, enforce_guard: bool = True) -> str:
    """The Expand branch: grow sigma by post(sigma), or signal the handoff.

    ``enforce_guard=False`` lets tests drive the frontier advance alone; the
    engine itself always calls under the U = U_bad != empty, V = empty guard.
    """
    if enforce_guard:
        u = state.compute_u()
        u_mask = 0
        for x in u:
            u_mask |= 1 << x
        if not (u_mask and u_mask == state.u_bad_mask and not state.compute_v()):
            raise ValueError("Expand guard does not hold: need U = U_bad != empty and V = empty")
    post_sig = state.post_sigma_mask()
    if post_sig & ~state.sigma_mask == 0:
        return HANDOFF
    state.sigma_mask |= post_sig
    state.u_bad_mask = 0
    return EXPANDED


def run_partition(
    lts: Lts,
    r_init: Relation,
    sigma_init,
    strategy: Strategy = Strategy(),
    cap: int = DEFAULT_CAP,
    *,
    trace: bool = False,
    debug: bool = False,
) -> EngineOutcome:
    """Run the partition-precise engine; requires I <= sigma_init <= post*(I)."""
    if r_init.n != lts.n_states:
        raise ValueError("relation over the wrong universe")
    if cap < 1:
        raise ValueError("cap must be at least 1")
    report = preorder_check(r_init)
    if not report.is_preorder:
        raise ValueError(f"initial relation is not a preorder: {report.counterexample}")
    if isinstance(sigma_init, StateSet):
        sigma_mask = sigma_init.mask
    else:
        sigma_mask = StateSet.of(lts.n_states, sigma_init).mask
    reach = post_star(lts).mask
    if lts.initial.mask & ~sigma_mask:
        raise ValueError("sigma_init must contain every initial state")
    if sigma_mask & ~reach:
        raise ValueError("sigma_init contains unreachable states")

    start = time.perf_counter()
    rng = strategy.rng()
    state = PartitionEngineState(lts, list(r_init.masks), sigma_mask)
    counters = Counters()
    events: Optional[list] = [] if trace else None
    final = True
    handoff: Optional[EngineOutcome] = None

    while True:
        if debug:
            assert state.sigma_mask & ~reach == 0, "Inv2: sigma left post*(I)"
            assert all(state.masks[x] >> x & 1 for x in range(state.n)), "Inv3: reflexivity"
            assert all(
                state.masks[x] & ~r_init.masks[x] == 0 for x in range(state.n)
            ), "Inv1: R grew"

        u = state.compute_u()
        u_mask = 0
        for x in u:
            u_mask |= 1 << x
        if debug:
            assert state.u_bad_mask & ~u_mask == 0, "Inv4: U_bad not inside U"
        v = state.compute_v()

        search_cands = [x for x in u if not state.u_bad_mask >> x & 1]
        search_on = bool(search_cands)
        refine_on = bool(v)
        expand_on = bool(u_mask) and u_mask == state.u_bad_mask and not refine_on

        if not u_mask and not refine_on:
            break
        if counters.iterations >= cap:
            final = False
            break

        do_search = False
        if search_on and refine_on:
            do_search = strategy.prefers_search(counters.iterations, rng)
        elif search_on:
            do_search = True

        if do_search:
            x = strategy.choose(search_cands, rng)
            grow = (state.masks[x] & state.post_sigma_mask()) & ~state.sigma_mask
            counters.iterations += 1
            if grow:
                ids = ids_from_mask(grow)
                s = strategy.choose(ids, rng)
                state.sigma_mask |= 1 << s
                state.u_bad_mask = 0
                counters.search_steps += 1
                if events is not None:
                    events.append(("search", x, s))
            else:
                state.u_bad_mask |= 1 << x
                if events is not None:
                    events.append(("search-bad", x, None))
        elif refine_on:
            a, x, y = strategy.choose(sorted(v), rng)
            state.masks[x] &= lts.pre_mask(a, state.masks[y])
            state.u_bad_mask = 0
            counters.refine_steps += 1
            counters.iterations += 1
            if events is not None:
                events.append(("refine", a, x, y))
        else:
            assert expand_on
            counters.expand_steps += 1
            counters.iterations += 1
            result = expand_step(state, enforce_guard=False)
            if events is not None:
                events.append(("expand", result))
            if result == HANDOFF:
                handoff = run_refalgo(
                    lts,
                    state.relation,
                    StateSet(state.n, state.sigma_mask),
                    strategy,
                    max(1, cap - counters.iterations),
                )
                state.masks = list(handoff.relation.masks)
                final = handoff.final
                break

    elapsed = time.perf_counter() - start
    if handoff is not None:
        counters.refine_steps += handoff.counters.refine_steps
        counters.iterations += handoff.counters.iterations
    return EngineOutcome(
        engine="partition",
        relation=Relation(state.n, state.masks),
        twopr=None,
        sigma=StateSet(state.n, state.sigma_mask),
        counters=counters,
        elapsed=elapsed,
        final=final,
        trace=events,
    )

"""Explicit-representation engines over per-state principals.

``run_explicit`` interleaves two guarded commands until neither is enabled:

* Search — some principal contains no state known reachable but does contain
  an initial state or a successor of one; put such a witness into sigma.
* Refine — some reachable-marked principal R(x) is unstable against a
  transition x -a-> x'; replace it by R(x) & pre_a(R(x')).

``sim_fixpoint`` is the bare refinement loop with no reachability side, and
``run_refalgo`` is its sigma-aware variant used as the handoff target of the
partition engine: sigma is pinned to post*(I), so Search never fires.

The guard sets U and V are defined logically; this implementation maintains
them through dirty-tracking work queues (a refined principal re-queues the
triples aimed at it, a sigma growth unblocks triples that were waiting on a
reachability mark) and re-derives both sets from their definitions whenever
the queues drain, so termination never trusts the incremental bookkeeping.
"""

from __future__ import annotations

import time
from typing import Iterable, Optional

from .lts import Lts, post_star
from .relations import Relation, preorder_check
from .runtime import DEFAULT_CAP, Counters, EngineOutcome, Strategy, TripleQueue
from .statesets import StateSet, ids_from_mask, lowest_bit

__all__ = ["sim_fixpoint", "run_explicit", "run_refalgo"]


class _ExplicitCore:
    """One run of the explicit loop; ``search_enabled=False`` gives RefAlgo."""

    def __init__(
        self,
        lts: Lts,
        masks: list[int],
        sigma_mask: int,
        strategy: Strategy,
        cap: int,
        search_enabled: bool,
        trace: bool,
        debug: bool,
        reach_mask: Optional[int] = None,
    ):
        self.lts = lts
        self.n = lts.n_states
        self.masks = masks
        self.sigma = sigma_mask
        self.sigma0 = sigma_mask
        self.initial = lts.initial.mask
        self.strategy = strategy
        self.rng = strategy.rng()
        self.cap = cap
        self.search_enabled = search_enabled
        self.debug = debug
        self.reach_mask = reach_mask
        if debug and reach_mask is None:
            self.reach_mask = post_star(lts).mask
        self.r_init = list(masks) if debug else None

        self.post_sigma = 0
        for s in ids_from_mask(sigma_mask):
            self.post_sigma |= lts.post_all_mask(s)

        self.counters = Counters()
        # pre_a(R(y)) cached per (label, target), dropped when R(y) changes;
        # the explicit representation shares nothing across states on purpose
        self._pre_by_target: dict[tuple[int, int], tuple[int, int]] = {}
        self.pending = TripleQueue(strategy.pick, self.rng)
        self.blocked: set[tuple[int, int, int]] = set()
        for a in range(len(lts.labels)):
            fwd_a = lts.fwd[a]
            for x in range(self.n):
                for y in fwd_a[x]:
                    self.pending.push((a, x, y))

        # states whose principal might be sigma-unmarked (U candidates)
        self.u_scan: list[int] = list(range(self.n)) if search_enabled else []
        self.u_set: set[int] = set(self.u_scan)

        self.trace: Optional[list[list[int]]] = [list(masks)] if trace else None

    # -- guard evaluation ----------------------------------------------------

    def _pre_of_target(self, a: int, y: int) -> int:
        src = self.masks[y]
        entry = self._pre_by_target.get((a, y))
        if entry is not None and entry[0] is src:
            return entry[1]
        pre = self.lts.pre_mask_raw(a, src)
        self._pre_by_target[(a, y)] = (src, pre)
        return pre

    def _unstable(self, a: int, x: int, y: int) -> bool:
        return bool(self.masks[x] & ~self._pre_of_target(a, y))

    def _valid_refine(self, t: tuple[int, int, int]) -> bool:
        a, x, y = t
        if not self.masks[x] & self.sigma:
            if self._unstable(a, x, y):
                self.blocked.add(t)  # waits for a sigma mark
            return False
        return self._unstable(a, x, y)

    def _pop_refine(self) -> Optional[tuple[int, int, int]]:
        while True:
            t = self.pending.pop()
            if t is None:
                return None
            if self._valid_refine(t):
                return t

    def _find_search(self) -> Optional[tuple[int, int]]:
        """A (state, witness) with R(x) sigma-free but touching I u post(sigma)."""
        avail = self.initial | self.post_sigma
        keep: list[int] = []
        found: list[tuple[int, int]] = []
        want_all = self.strategy.pick == "random"
        for x in self.u_scan:
            m = self.masks[x]
            if m & self.sigma:
                self.u_set.discard(x)
                continue
            keep.append(x)
            hit = m & avail
            if hit:
                if not want_all:
                    keep.extend(z for z in self.u_scan if z > x and z in self.u_set)
                    self.u_scan = keep
                    return x, lowest_bit(hit)
                witnesses = ids_from_mask(hit)
                found.append((x, witnesses[self.rng.randrange(len(witnesses))]))
        self.u_scan = keep
        if found:
            return found[self.rng.randrange(len(found))]
        return None

    # -- branch bodies ---------------------------------------------------------

    def _do_search(self, cand: tuple[int, int]) -> None:
        _, s = cand
        self.sigma |= 1 << s
        self.post_sigma |= self.lts.post_all_mask(s)
        self.counters.search_steps += 1
        self.counters.iterations += 1
        if self.blocked:
            for t in self.blocked:
                self.pending.push(t)
            self.blocked.clear()

    def _do_refine(self, t: tuple[int, int, int]) -> None:
        a, x, y = t
        pm = self._pre_of_target(a, y)
        new = self.masks[x] & pm
        self.masks[x] = new
        self.counters.refine_steps += 1
        self.counters.iterations += 1
        lts = self.lts
        for b in range(len(lts.labels)):
            for w in lts.bwd[b][x]:
                self.pending.push((b, w, x))
        if self.search_enabled and not new & self.sigma and x not in self.u_set:
            self.u_set.add(x)
            self.u_scan.append(x)
            self.u_scan.sort()

    # -- full definitional recomputation ---------------------------------------

    def _rescan(self) -> bool:
        """Re-derive U and V from their definitions; True if any work exists."""
        work = False
        if self.search_enabled:
            self.u_scan = [x for x in range(self.n) if not self.masks[x] & self.sigma]
            self.u_set = set(self.u_scan)
            avail = self.initial | self.post_sigma
            work = any(self.masks[x] & avail for x in self.u_scan)
        lts = self.lts
        for a in range(len(lts.labels)):
            fwd_a = lts.fwd[a]
            for x in range(self.n):
                m = self.masks[x]
                if not m & self.sigma:
                    continue
                for y in fwd_a[x]:
                    if m & ~self._pre_of_target(a, y):
                        self.pending.push((a, x, y))
                        work = True
        return work

    def _check_invariants(self) -> None:
        assert self.sigma0 | self.sigma == self.sigma, "Inv2: sigma shrank"
        assert self.sigma & ~self.reach_mask == 0, "Inv2: sigma left post*(I)"
        for x in range(self.n):
            assert self.masks[x] >> x & 1, f"Inv3: reflexivity lost at {x}"
            assert self.masks[x] & ~self.r_init[x] == 0, f"Inv1: R(x) grew at {x}"

    # -- main loop ----------------------------------------------------------------

    def run(self) -> tuple[bool, int]:
        final = True
        while True:
            if self.debug:
                self._check_invariants()
            prefer_search = self.search_enabled and self.strategy.prefers_search(
                self.counters.iterations, self.rng
            )
            search_cand = None
            refine_cand = None
            if prefer_search:
                search_cand = self._find_search()
                if search_cand is None:
                    refine_cand = self._pop_refine()
            else:
                refine_cand = self._pop_refine()
                if refine_cand is None and self.search_enabled:
                    search_cand = self._find_search()
            if search_cand is None and refine_cand is None:
                if self._rescan():
                    continue
                break  # U and V definitionally empty
            if self.counters.iterations >= self.cap:
                final = False  # enabled work remains but the budget is spent
                break
            if search_cand is not None:
                self._do_search(search_cand)
            else:
                self._do_refine(refine_cand)
            if self.trace is not None:
                self.trace.append(list(self.masks))
        return final, self.sigma


def _as_sigma_mask(lts: Lts, sigma) -> int:
    if sigma is None:
        return 0
    if isinstance(sigma, StateSet):
        if sigma.n != lts.n_states:
            raise ValueError("sigma over the wrong universe")
        return sigma.mask
    return StateSet.of(lts.n_states, sigma).mask


def sim_fixpoint(lts: Lts, r0: Relation) -> Relation:
    """Greatest simulation inside a reflexive r0: plain refinement to fixpoint."""
    if r0.n != lts.n_states:
        raise ValueError("relation over the wrong universe")
    if not r0.is_reflexive():
        raise ValueError("sim_fixpoint requires a reflexive input relation")
    core = _ExplicitCore(
        lts,
        list(r0.masks),
        sigma_mask=(1 << lts.n_states) - 1,  # every principal is eligible
        strategy=Strategy(),
        cap=DEFAULT_CAP,
        search_enabled=False,
        trace=False,
        debug=False,
    )
    final, _ = core.run()
    assert final, "sim_fixpoint hit the safety cap"
    return Relation(lts.n_states, core.masks)


def run_explicit(
    lts: Lts,
    r_init: Relation,
    sigma_init=None,
    strategy: Strategy = Strategy(),
    cap: int = DEFAULT_CAP,
    *,
    trace: bool = False,
    debug: bool = False,
) -> EngineOutcome:
    """The preorder-based Search/Refine engine.

    Returns the relation R and sigma with R^sigma equal to the reachable
    principals of the simulation preorder (and the principal-grouping blocks
    overapproximating the reachable simulation partition).
    """
    if r_init.n != lts.n_states:
        raise ValueError("relation over the wrong universe")
    if cap < 1:
        raise ValueError("cap must be at least 1")
    report = preorder_check(r_init)
    if not report.is_preorder:
        raise ValueError(f"initial relation is not a preorder: {report.counterexample}")
    sigma_mask = _as_sigma_mask(lts, sigma_init)
    reach = post_star(lts).mask
    if sigma_mask & ~reach:
        raise ValueError("sigma_init contains unreachable states")

    start = time.perf_counter()
    core = _ExplicitCore(
        lts, list(r_init.masks), sigma_mask, strategy, cap,
        search_enabled=True, trace=trace, debug=debug, reach_mask=reach,
    )
    final, sigma = core.run()
    elapsed = time.perf_counter() - start
    return EngineOutcome(
        engine="explicit",
        relation=Relation(lts.n_states, core.masks),
        twopr=None,
        sigma=StateSet(lts.n_states, sigma),
        counters=core.counters,
        elapsed=elapsed,
        final=final,
        trace=core.trace,
    )


def run_refalgo(
    lts: Lts,
    r: Relation,
    sigma=None,
    strategy: Strategy = Strategy(),
    cap: int = DEFAULT_CAP,
    *,
    trace: bool = False,
    debug: bool = False,
) -> EngineOutcome:
    """Refinement-only engine with sigma pinned to post*(I).

    The input relation must be reflexive but need not be transitive; it is
    meant to sit between the simulation preorder and some initial preorder.
    """
    if r.n != lts.n_states:
        raise ValueError("relation over the wrong universe")
    if cap < 1:
        raise ValueError("cap must be at least 1")
    if not r.is_reflexive():
        raise ValueError("run_refalgo requires a reflexive relation")
    reach = post_star(lts)
    if sigma is not None:
        given = _as_sigma_mask(lts, sigma)
        if given != reach.mask:
            raise ValueError("run_refalgo requires sigma = post*(I)")

    start = time.perf_counter()
    core = _ExplicitCore(
        lts, list(r.masks), reach.mask, strategy, cap,
        search_enabled=False, trace=trace, debug=debug, reach_mask=reach.mask,
    )
    final, sigma_mask = core.run()
    elapsed = time.perf_counter() - start
    return EngineOutcome(
        engine="refalgo",
        relation=Relation(lts.n_states, core.masks),
        twopr=None,
        sigma=StateSet(lts.n_states, sigma_mask),
        counters=core.counters,
        elapsed=elapsed,
        final=final,
        trace=core.trace,
    )

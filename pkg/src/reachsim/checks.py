"""Result serialization and literal verification of the correctness theorems.

``outcome_to_json`` and ``truth_to_json`` fix the diffable wire formats: all
sets sorted ascending, principal-group map keyed by the minimum member of
the group of states sharing that principal, blocks ordered by minimum
member.  ``run_check`` then evaluates the selected theorem's clauses on the
two documents, returning one pass/fail entry per clause with a witness on
failure (and a strictness probe on the inclusion clauses).
"""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass
from typing import Optional

from .lts import Lts, serialize_aut
from .oracle import GroundTruth
from .relations import induced_partition
from .runtime import EngineOutcome, Strategy
from .statesets import StateSet

__all__ = [
    "CheckError",
    "ClauseResult",
    "CheckReport",
    "instance_meta",
    "outcome_to_json",
    "truth_to_json",
    "run_check",
    "THEOREM_FOR_ENGINE",
]

THEOREM_FOR_ENGINE = {"explicit": "1", "refalgo": "1", "twopr": "3", "partition": "5"}


class CheckError(ValueError):
    """Malformed or mismatched check inputs."""


def instance_meta(lts: Lts) -> dict:
    aut, sidecar = serialize_aut(lts)
    digest = hashlib.md5((aut + (sidecar or "")).encode()).hexdigest()[:12]
    return {
        "states": lts.n_states,
        "transitions": lts.n_transitions,
        "digest": digest,
    }


def _finite_groups(outcome: EngineOutcome) -> list[tuple[list[int], list[int]]]:
    """(block, principal) pairs grouped by equal principal, by min member."""
    rel = outcome.relation
    groups = rel.group_by_principal()
    out = [(sorted(owners), sorted(StateSet(rel.n, value).to_ids())) for value, owners in groups.items()]
    out.sort(key=lambda pair: pair[0][0])
    return [(block, principal) for block, principal in out]


def outcome_to_json(
    outcome: EngineOutcome,
    instance: Optional[dict] = None,
    strategy: Optional[Strategy] = None,
    *,
    timing: bool = False,
) -> dict:
    doc: dict = {"engine": outcome.engine}
    if instance is not None:
        doc["instance"] = instance
    if strategy is not None:
        doc["strategy"] = asdict(strategy)
    doc["sigma"] = outcome.sigma_ids()
    if outcome.relation is not None:
        groups = _finite_groups(outcome)
        doc["principals"] = {str(block[0]): principal for block, principal in groups}
        doc["blocks"] = [block for block, _ in groups]
    if outcome.twopr is not None:
        t = outcome.twopr

        def to_js(region):
            return region.to_ids() if t.p.finite else region.to_json()

        if not t.p.finite:
            # no dense ids to key by: interval documents key principals by P handle
            doc["principals"] = {str(h): to_js(t.utau(h)) for h in sorted(t.p.handles())}
            doc["blocks"] = [to_js(b) for b in induced_partition(t).blocks()]
        doc["p"] = {str(h): to_js(t.p.block(h)) for h in sorted(t.p.handles())}
        doc["q"] = {str(h): to_js(t.q.block(h)) for h in sorted(t.q.handles())}
        doc["tau"] = {str(h): sorted(t.tau[h]) for h in sorted(t.p.handles())}
    doc["counters"] = outcome.counters.to_json()
    doc["final"] = outcome.final
    if timing:
        doc["timing"] = outcome.elapsed
    if outcome.trace is not None:
        doc["trace"] = outcome.trace
    return doc


def truth_to_json(gt: GroundTruth, instance: Optional[dict] = None) -> dict:
    doc = gt.to_json()
    if instance is not None:
        doc["instance"] = instance
    return doc


@dataclass
class ClauseResult:
    clause: str
    passed: bool
    strict: Optional[bool] = None
    witness: Optional[str] = None

    def to_json(self) -> dict:
        return {"clause": self.clause, "passed": self.passed, "strict": self.strict, "witness": self.witness}


@dataclass
class CheckReport:
    theorem: str
    clauses: list[ClauseResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses)

    def to_json(self) -> dict:
        return {
            "theorem": self.theorem,
            "passed": self.passed,
            "clauses": [c.to_json() for c in self.clauses],
        }


def _sets(list_of_lists) -> set[frozenset[int]]:
    return {frozenset(xs) for xs in list_of_lists}


def _witness_diff(a: set[frozenset[int]], b: set[frozenset[int]]) -> str:
    only_a = [sorted(s) for s in a - b]
    only_b = [sorted(s) for s in b - a]
    parts = []
    if only_a:
        parts.append(f"only left: {sorted(only_a)[:3]}")
    if only_b:
        parts.append(f"only right: {sorted(only_b)[:3]}")
    return "; ".join(parts)


def run_check(run_data: dict, truth_data: dict, theorem: Optional[str] = None) -> CheckReport:
    """Evaluate a theorem's clauses on an engine-run and a ground-truth document."""
    ri = run_data.get("instance")
    ti = truth_data.get("instance")
    if ri is not None and ti is not None and ri != ti:
        raise CheckError(f"instance mismatch: run={ri} truth={ti}")
    if theorem is None:
        theorem = THEOREM_FOR_ENGINE.get(run_data.get("engine", ""), "1")
    if "principals" not in run_data or "blocks" not in run_data:
        raise CheckError("run document has no materialized principals")

    sigma = set(run_data["sigma"])
    blocks = [list(b) for b in run_data["blocks"]]
    principal_of_block = [frozenset(run_data["principals"][str(b[0])]) for b in blocks]
    marked_principals = {
        p for b, p in zip(blocks, principal_of_block) if p & sigma
    }
    marked_blocks = {
        frozenset(b) for b, p in zip(blocks, principal_of_block) if p & sigma
    }
    reach = set(truth_data["reach"])
    eq1 = _sets(truth_data["principals_eq1"])
    eq2 = _sets(truth_data["principals_eq2"])
    psim = [frozenset(b) for b in truth_data["psim"]]
    blocks_reachable = _sets(truth_data["blocks_reachable"])

    clauses: list[ClauseResult] = []

    if theorem in ("1", "3"):
        tag = "1.a" if theorem == "1" else "3.a"
        ok = marked_principals == eq1
        clauses.append(
            ClauseResult(tag, ok, witness=None if ok else _witness_diff(eq1, marked_principals))
        )
        tag = "1.b" if theorem == "1" else "3.b"
        ok = blocks_reachable <= marked_blocks
        clauses.append(
            ClauseResult(
                tag,
                ok,
                strict=(blocks_reachable < marked_blocks) if ok else None,
                witness=None if ok else _witness_diff(blocks_reachable, marked_blocks),
            )
        )
    elif theorem == "5":
        member_block = {}
        for i, b in enumerate(blocks):
            for x in b:
                member_block[x] = i
        sigma_generated = {principal_of_block[member_block[s]] for s in sigma}
        ok = sigma_generated == eq2
        clauses.append(
            ClauseResult("5.3a", ok, witness=None if ok else _witness_diff(eq2, sigma_generated))
        )

        p_sigma = [frozenset(b) for b in blocks if set(b) & sigma]
        lhs = {b & frozenset(reach) for b in psim if b & reach}
        rhs = {b & frozenset(reach) for b in p_sigma}
        ok = lhs == rhs
        clauses.append(ClauseResult("5.3b", ok, witness=None if ok else _witness_diff(lhs, rhs)))

        psim_of = {}
        for b in psim:
            for x in b:
                psim_of[x] = b
        rhs_c: set[frozenset[int]] = set()
        witness = None
        ok = True
        for b in p_sigma:
            covers = {psim_of[x] for x in b}
            if len(covers) != 1:
                ok = False
                witness = f"engine block {sorted(b)} straddles simulation blocks"
                break
            rhs_c.add(next(iter(covers)))
        if ok:
            ok = blocks_reachable == rhs_c
            if not ok:
                witness = _witness_diff(blocks_reachable, rhs_c)
        clauses.append(ClauseResult("5.3c", ok, witness=witness))
    else:
        raise CheckError(f"unknown theorem selector {theorem!r}; expected 1, 3 or 5")

    return CheckReport(theorem, clauses)

"""Explicit-vs-symbolic benchmark harness with per-instance timeouts.

Each (instance, engine, repetition) task runs in its own process so a hung
or over-budget run can be killed without poisoning the harness; a killed
task becomes a row with the timeout marker set.  Rows carry the block-count
columns whose chains must hold on every run: for the explicit engine
states >= P >= r, and for the symbolic engine
states >= P >= induced-P >= r.  The per-instance gain column is the
fractional wall-time reduction of the symbolic engine against the explicit
run of the same instance and repetition.

The measured configuration is the universal initial preorder with an empty
initial sigma; both engines see identical inputs.
"""

from __future__ import annotations

import csv
import multiprocessing as mp
import time
from collections import deque
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional, Sequence

from .explicit import run_explicit
from .lts import load_lts
from .relations import Relation
from .runtime import DEFAULT_CAP, Strategy
from .statesets import StateSet
from .twopr_engine import run_twopr, universal_twopr

__all__ = ["BenchRow", "bench", "write_csv", "measure_engine"]

BENCH_ENGINES = ("explicit", "twopr")


@dataclass
class BenchRow:
    name: str
    engine: str
    rep: int
    states: Optional[int] = None
    transitions: Optional[int] = None
    sigma: Optional[int] = None
    p_blocks: Optional[int] = None
    q_blocks: Optional[int] = None
    p_induced: Optional[int] = None
    r_blocks: Optional[int] = None
    time_s: Optional[float] = None
    final: Optional[bool] = None
    timeout: bool = False
    error: Optional[str] = None
    gain: Optional[float] = None

    def inequalities_hold(self) -> bool:
        """states >= P >= r (explicit); states >= P >= induced >= r (twopr)."""
        if self.timeout or self.error:
            return True  # nothing measured
        chain = [self.states, self.p_blocks]
        if self.engine == "twopr":
            chain.append(self.p_induced)
        chain.append(self.r_blocks)
        return all(a >= b for a, b in zip(chain, chain[1:]))


def measure_engine(lts, engine: str, strategy: Strategy, cap: int) -> dict:
    """Run one engine on one instance and extract the table metrics."""
    n = lts.n_states
    if engine == "explicit":
        out = run_explicit(lts, Relation.universal(n), None, strategy, cap)
        sigma_ids = set(out.sigma_ids())
        groups = out.relation.group_by_principal()
        p_count = len(groups)
        r_count = sum(1 for value in groups if set(StateSet(n, value).to_ids()) & sigma_ids)
        return {
            "states": n,
            "transitions": lts.n_transitions,
            "sigma": len(sigma_ids),
            "p_blocks": p_count,
            "q_blocks": None,
            "p_induced": None,
            "r_blocks": r_count,
            "time_s": out.elapsed,
            "final": out.final,
        }
    if engine == "twopr":
        out = run_twopr(lts, universal_twopr(lts), [], strategy, cap)
        t = out.twopr
        sigma_mask = 0
        for s in out.sigma_ids():
            sigma_mask |= 1 << s
        values: dict[int, bool] = {}
        for h in t.p.handles():
            u = t.utau(h).mask
            values[u] = values.get(u, False) or bool(u & sigma_mask)
        return {
            "states": n,
            "transitions": lts.n_transitions,
            "sigma": len(out.sigma_ids()),
            "p_blocks": len(t.p),
            "q_blocks": len(t.q),
            "p_induced": len(values),
            "r_blocks": sum(1 for marked in values.values() if marked),
            "time_s": out.elapsed,
            "final": out.final,
        }
    raise ValueError(f"bench engine must be one of {BENCH_ENGINES}, got {engine!r}")


def _worker(path: str, engine: str, strategy: Strategy, cap: int, conn) -> None:
    try:
        lts = load_lts(path)
        conn.send(measure_engine(lts, engine, strategy, cap))
    except Exception as e:  # reported as an error row
        conn.send({"error": f"{type(e).__name__}: {e}"})
    finally:
        conn.close()


def bench(
    suite: str | Path | Sequence[Path],
    engines: Sequence[str] = BENCH_ENGINES,
    repeat: int = 1,
    timeout_s: float = 60.0,
    cap: int = DEFAULT_CAP,
    jobs: int = 1,
    strategy: Strategy = Strategy(),
) -> list[BenchRow]:
    """Run every engine on every ``.aut`` in the suite, with timeouts."""
    for e in engines:
        if e not in BENCH_ENGINES:
            raise ValueError(f"bench engine must be one of {BENCH_ENGINES}, got {e!r}")
    if isinstance(suite, (str, Path)):
        paths = sorted(Path(suite).glob("*.aut"))
    else:
        paths = [Path(p) for p in suite]
    tasks = deque(
        (path, engine, rep) for path in paths for engine in engines for rep in range(repeat)
    )
    rows: list[BenchRow] = []
    active: list[tuple[mp.Process, object, tuple, float]] = []

    def finish(entry, row: BenchRow) -> None:
        proc, conn, _, _ = entry
        conn.close()
        proc.join()
        active.remove(entry)
        rows.append(row)

    while tasks or active:
        while tasks and len(active) < max(1, jobs):
            path, engine, rep = tasks.popleft()
            parent, child = mp.Pipe(duplex=False)
            proc = mp.Process(target=_worker, args=(str(path), engine, strategy, cap, child))
            proc.start()
            child.close()
            active.append((proc, parent, (path, engine, rep), time.monotonic() + timeout_s))
        for entry in list(active):
            proc, conn, (path, engine, rep), deadline = entry
            row = BenchRow(name=path.stem, engine=engine, rep=rep)
            if conn.poll(0.02):
                result = conn.recv()
                if "error" in result:
                    row.error = result["error"]
                else:
                    for key, value in result.items():
                        setattr(row, key, value)
                finish(entry, row)
            elif not proc.is_alive():
                row.error = "worker died"
                finish(entry, row)
            elif time.monotonic() > deadline:
                proc.terminate()
                row.timeout = True
                row.time_s = timeout_s
                finish(entry, row)

    explicit_times = {
        (r.name, r.rep): r.time_s
        for r in rows
        if r.engine == "explicit" and not r.timeout and not r.error
    }
    for r in rows:
        if r.engine == "twopr" and not r.timeout and not r.error:
            t1 = explicit_times.get((r.name, r.rep))
            if t1:
                r.gain = (t1 - r.time_s) / t1
    rows.sort(key=lambda r: (r.name, r.rep, r.engine))
    return rows


def write_csv(rows: Sequence[BenchRow], path: str | Path) -> None:
    names = [f.name for f in fields(BenchRow)] + ["ineq_ok"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for r in rows:
            record = [getattr(r, f.name) for f in fields(BenchRow)]
            record = ["" if v is None else v for v in record]
            # the paper marks timeouts with a dagger
            if r.timeout:
                record[names.index("timeout")] = "dagger"
            writer.writerow(record + [r.inequalities_hold()])


"""Command-line interface.

Subcommands: run, oracle, check, gen-random, unroll, bench, validate.
Exit codes: 0 success/pass, 1 check failure, 2 input error, 3 cap or
timeout hit.

Results are JSON documents with all sets sorted, so a fixed seed and
strategy reproduce byte-identical output; wall-clock timing is only
embedded when --timing is passed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import demos
from .bench import BENCH_ENGINES, bench, write_csv
from .checks import CheckError, instance_meta, outcome_to_json, run_check, truth_to_json
from .explicit import run_explicit, run_refalgo, sim_fixpoint
from .generate import gen_random, unroll
from .intervals import SymbolicSystem
from .lts import Lts, LtsError, load_lts, post_star, save_lts
from .oracle import ground_truth
from .partition_engine import run_partition
from .relations import (
    PreorderInputError,
    Relation,
    induce_twopr,
    parse_preorder_spec,
    preorder_check,
)
from .runtime import DEFAULT_CAP, Counters, EngineOutcome, Strategy
from .statesets import StateSet
from .twopr_engine import run_twopr, universal_twopr

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT = 2
EXIT_CAPPED = 3

DEMOS = {
    "succ-to-zero": demos.succ_to_zero,
    "countdown-chain": demos.countdown_chain,
}


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _strategy(args) -> Strategy:
    return Strategy(branch=args.branch, pick=args.pick, seed=args.seed)


def _sigma_ids(spec: str, lts_initial: list[int]) -> list[int]:
    if spec == "empty":
        return []
    if spec == "initials":
        return list(lts_initial)
    if spec.startswith("file:"):
        path = Path(spec[len("file:"):])
        try:
            lines = path.read_text().splitlines()
        except OSError as e:
            raise CliError(f"cannot read {path}: {e}")
        ids = []
        for ln, raw in enumerate(lines, start=1):
            raw = raw.strip()
            if not raw:
                continue
            if not raw.lstrip("-").isdigit():
                raise CliError(f"{path}: line {ln}: expected a state id")
            ids.append(int(raw))
        return ids
    raise CliError(f"--sigma0 must be 'empty', 'initials' or 'file:PATH', got {spec!r}")


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preorder", default=None,
                   help="initial preorder: universal | partition:FILE | pairs:FILE"
                        " (demo inputs also accept 'demo'; default universal)")
    p.add_argument("--close", action="store_true",
                   help="close a pairs: relation reflexively and transitively first")
    p.add_argument("--sigma0", default="empty",
                   help="initial sigma: empty | initials | file:PATH")
    p.add_argument("--branch", default="search-first",
                   choices=["search-first", "refine-first", "alternating", "random"])
    p.add_argument("--pick", default="min", choices=["min", "random"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--record-trace", action="store_true",
                   help="embed per-iteration relation snapshots (small systems only)")
    p.add_argument("--timing", action="store_true", help="embed wall-clock time")
    p.add_argument("--out", default=None, help="write JSON here instead of stdout")


def _load_input(path: str):
    """Returns (lts, None) for .aut inputs or (None, symbolic system) for demos."""
    if path.startswith("demo:"):
        name = path[len("demo:"):]
        if name not in DEMOS:
            raise CliError(f"unknown demo {name!r}; available: {', '.join(sorted(DEMOS))}")
        return None, DEMOS[name]()
    try:
        return load_lts(path), None
    except (OSError, LtsError) as e:
        raise CliError(str(e))


def _run_demo(system: SymbolicSystem, args) -> EngineOutcome:
    if args.engine != "twopr":
        raise CliError("demo inputs run through the symbolic engine only (--engine twopr)")
    preorder = args.preorder or "demo"
    if preorder == "universal":
        triple = universal_twopr(system)
    elif preorder == "demo":
        if system.name == "countdown-chain":
            triple = demos.countdown_chain_twopr()
        else:
            triple = universal_twopr(system)
    else:
        raise CliError("demo inputs accept --preorder universal or demo")
    if args.sigma0 == "initials":
        sigma0 = [system.initial.pick()]
    else:
        sigma0 = _sigma_ids(args.sigma0, [])
    return run_twopr(system, triple, sigma0, _strategy(args), args.cap)


def cmd_run(args) -> int:
    lts, system = _load_input(args.input)
    if system is not None:
        outcome = _run_demo(system, args)
        doc = outcome_to_json(outcome, {"demo": system.name}, _strategy(args), timing=args.timing)
        _emit(doc, args.out)
        return EXIT_OK if outcome.final else EXIT_CAPPED

    n = lts.n_states
    strategy = _strategy(args)
    if args.engine == "oracle":
        try:
            r_init = parse_preorder_spec(args.preorder or "universal", n, close=args.close)
        except PreorderInputError as e:
            raise CliError(str(e))
        _emit(truth_to_json(ground_truth(lts, r_init), instance_meta(lts)), args.out)
        return EXIT_OK

    try:
        r_init = parse_preorder_spec(args.preorder or "universal", n, close=args.close)
    except PreorderInputError as e:
        raise CliError(str(e))
    sigma0 = _sigma_ids(args.sigma0, lts.initial.to_ids())
    if any(s < 0 or s >= n for s in sigma0):
        raise CliError("sigma0 contains out-of-range state ids")

    try:
        if args.engine == "explicit":
            outcome = run_explicit(lts, r_init, sigma0, strategy, args.cap, trace=args.record_trace)
        elif args.engine == "refalgo":
            outcome = run_refalgo(lts, r_init, None, strategy, args.cap, trace=args.record_trace)
        elif args.engine == "partition":
            outcome = run_partition(lts, r_init, sigma0, strategy, args.cap, trace=args.record_trace)
        elif args.engine == "twopr":
            outcome = run_twopr(
                lts, induce_twopr(r_init), sigma0, strategy, args.cap, trace=args.record_trace
            )
        elif args.engine == "sim":
            relation = sim_fixpoint(lts, r_init)
            outcome = EngineOutcome(
                engine="sim", relation=relation, twopr=None,
                sigma=StateSet.empty(n), counters=Counters(), elapsed=0.0, final=True,
            )
        else:
            raise CliError(f"unknown engine {args.engine!r}")
    except ValueError as e:
        raise CliError(str(e))

    doc = outcome_to_json(outcome, instance_meta(lts), strategy, timing=args.timing)
    _emit(doc, args.out)
    return EXIT_OK if outcome.final else EXIT_CAPPED


def cmd_oracle(args) -> int:
    lts, system = _load_input(args.input)
    if system is not None:
        raise CliError("the oracle works on finite .aut inputs only")
    try:
        r_init = parse_preorder_spec(args.preorder or "universal", lts.n_states, close=args.close)
    except PreorderInputError as e:
        raise CliError(str(e))
    _emit(truth_to_json(ground_truth(lts, r_init), instance_meta(lts)), args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    try:
        run_data = json.loads(Path(args.run).read_text())
        truth_data = json.loads(Path(args.truth).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise CliError(f"cannot load inputs: {e}")
    theorem = None if args.theorem == "auto" else args.theorem
    try:
        report = run_check(run_data, truth_data, theorem)
    except CheckError as e:
        raise CliError(str(e))
    _emit(report.to_json(), args.out)
    for clause in report.clauses:
        status = "pass" if clause.passed else f"FAIL ({clause.witness})"
        print(f"[{clause.clause}] {status}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_gen_random(args) -> int:
    try:
        lts = gen_random(
            args.states, args.labels, args.density, args.seed,
            strongly_connected=args.strongly_connected,
        )
    except ValueError as e:
        raise CliError(str(e))
    save_lts(lts, args.out)
    print(f"wrote {args.out}: {lts.n_states} states, {lts.n_transitions} transitions",
          file=sys.stderr)
    return EXIT_OK


def cmd_unroll(args) -> int:
    lts, system = _load_input(args.input)
    if system is not None:
        raise CliError("unroll works on finite .aut inputs only")
    try:
        out = unroll(lts, args.copies)
    except ValueError as e:
        raise CliError(str(e))
    save_lts(out, args.out)
    print(f"wrote {args.out}: {out.n_states} states, {out.n_transitions} transitions",
          file=sys.stderr)
    return EXIT_OK


def cmd_bench(args) -> int:
    engines = tuple(e.strip() for e in args.engines.split(",") if e.strip())
    for e in engines:
        if e not in BENCH_ENGINES:
            raise CliError(f"--engines must name a subset of {','.join(BENCH_ENGINES)}")
    suite = Path(args.suite)
    if not suite.is_dir():
        raise CliError(f"suite directory {suite} does not exist")
    rows = bench(
        suite, engines, repeat=args.repeat, timeout_s=args.timeout,
        cap=args.cap, jobs=args.jobs,
        strategy=Strategy(branch=args.branch, pick=args.pick, seed=args.seed),
    )
    write_csv(rows, args.out)
    gains = [r.gain for r in rows if r.gain is not None]
    timeouts = sum(1 for r in rows if r.timeout)
    wins = sum(1 for g in gains if g > 0)
    print(
        f"{len(rows)} rows -> {args.out}; timeouts={timeouts}; "
        f"symbolic wins {wins}/{len(gains)}"
        + (f"; mean gain {sum(gains) / len(gains):.1%}" if gains else ""),
        file=sys.stderr,
    )
    return EXIT_CAPPED if timeouts else EXIT_OK


def cmd_validate(args) -> int:
    lts, system = _load_input(args.input)
    if system is not None:
        print("demo systems are code-defined constants; nothing to validate", file=sys.stderr)
        return EXIT_OK
    problems = []
    for a in range(len(lts.labels)):
        for x in range(lts.n_states):
            for y in lts.fwd[a][x]:
                if x not in lts.bwd[a][y]:
                    problems.append(f"adjacency duality broken at ({x},{lts.labels[a]},{y})")
    if args.preorder:
        try:
            r = parse_preorder_spec(args.preorder, lts.n_states, close=args.close)
            report = preorder_check(r)
            if not report.is_preorder:
                problems.append(f"initial relation is not a preorder: {report.counterexample}")
        except PreorderInputError as e:
            problems.append(str(e))
    if args.sigma0 != "empty":
        sigma0 = _sigma_ids(args.sigma0, lts.initial.to_ids())
        reach = post_star(lts)
        outside = [s for s in sigma0 if s not in reach]
        if outside:
            problems.append(f"sigma0 states not in post*(I): {outside}")
    if problems:
        for p in problems:
            print(p, file=sys.stderr)
        return EXIT_INPUT
    print(
        f"ok: {lts.n_states} states, {lts.n_transitions} transitions, "
        f"{len(lts.labels)} labels, initial={lts.initial.to_ids()}",
        file=sys.stderr,
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reachsim",
        description="Reachable simulation preorders and partitions on labeled transition systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an engine on an .aut file or built-in demo")
    p.add_argument("input", help=".aut path or demo:NAME")
    p.add_argument("--engine", default="explicit",
                   choices=["explicit", "partition", "twopr", "sim", "refalgo", "oracle"])
    _add_run_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("oracle", help="emit brute-force ground truth as JSON")
    p.add_argument("input")
    p.add_argument("--preorder", default="universal")
    p.add_argument("--close", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("check", help="verify a run against ground truth")
    p.add_argument("--run", required=True, help="engine output JSON")
    p.add_argument("--truth", required=True, help="oracle output JSON")
    p.add_argument("--theorem", default="auto", choices=["auto", "1", "3", "5"])
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("gen-random", help="generate a seeded random system")
    p.add_argument("--states", type=int, required=True)
    p.add_argument("--labels", type=int, default=1)
    p.add_argument("--density", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strongly-connected", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_random)

    p = sub.add_parser("unroll", help="layered unrolling with the initial states in the top layer")
    p.add_argument("input")
    p.add_argument("-k", "--copies", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_unroll)

    p = sub.add_parser("bench", help="explicit-vs-symbolic benchmark over a suite directory")
    p.add_argument("--suite", required=True)
    p.add_argument("--engines", default="explicit,twopr")
    p.add_argument("--repeat", type=int, default=1)
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--branch", default="search-first",
                   choices=["search-first", "refine-first", "alternating", "random"])
    p.add_argument("--pick", default="min", choices=["min", "random"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("validate", help="validate an input file (and optional preorder/sigma)")
    p.add_argument("input")
    p.add_argument("--preorder", default=None)
    p.add_argument("--close", action="store_true")
    p.add_argument("--sigma0", default="empty")
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code


if __name__ == "__main__":
    sys.exit(main())

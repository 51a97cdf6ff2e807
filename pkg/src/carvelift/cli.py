"""Command-line surface: one subcommand per pipeline stage plus the full
campaign and report rendering.

Exit codes: 0 success, 1 usage or I/O error, 2 program parse error.
All randomness flows through --rng; repeated invocations reproduce their
outputs byte for byte (timestamps live only in report metadata).
"""

from __future__ import annotations

import argparse
import json
import sys

from .campaign import CampaignConfig, run_campaign
from .carver import carve, load_units, save_units
from .inputfiles import load_input_file
from .lifter import validate_many, write_confirmed
from .minic.errors import MiniCError
from .minic.parser import parse_program
from .minic.values import SystemInput
from .minic.vm import CoverageMap, Limits, run_system
from .parameterizer import load_puts, parameterize, save_puts
from .report import Report, render_table
from .tracer import load_trace, save_trace
from .unitfuzz import fuzz_unit, load_candidates, save_candidates


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _load_program(path):
    try:
        with open(path, "r") as fh:
            source = fh.read()
    except OSError as e:
        raise _UsageError(str(e))
    return parse_program(source, path)


def _rebase_candidate(cand, sysinput: SystemInput):
    """Point a loaded candidate at the input named on the command line."""
    from dataclasses import replace

    return replace(cand, input=sysinput)


def _gather_input(args) -> SystemInput:
    sources = []
    for i, a in enumerate(getattr(args, "arg", None) or []):
        sources.append((f"arg{i}", a.encode()))
    if getattr(args, "stdin", None):
        try:
            with open(args.stdin, "rb") as fh:
                sources.append(("stdin", fh.read()))
        except OSError as e:
            raise _UsageError(str(e))
    return SystemInput(tuple(sources))


def build_parser() -> _Parser:
    p = _Parser(prog="carvelift", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="execute a program against a system input")
    runp.add_argument("program")
    runp.add_argument("--stdin", help="file whose bytes become the stdin source")
    runp.add_argument("--arg", action="append", help="append a command-line argument source")
    runp.add_argument("--trace", help="write the execution trace here (JSON lines)")
    runp.add_argument("--step-budget", type=int, default=Limits().step_budget)

    carvep = sub.add_parser("carve", help="carve unit tests out of a trace")
    carvep.add_argument("program")
    carvep.add_argument("trace")
    carvep.add_argument("--function", action="append", help="carve only these callees")
    carvep.add_argument("--out", help="write carved tests here (*.unit.jsonl)")

    paramp = sub.add_parser("parameterize", help="match carved values against system input")
    paramp.add_argument("program")
    paramp.add_argument("units", help="carved tests (*.unit.jsonl)")
    paramp.add_argument("--input", required=True, help="system input file (raw stdin or JSON spec)")
    paramp.add_argument("--out", help="write parameterized tests here (*.put.jsonl)")

    fuzzp = sub.add_parser("fuzz", help="fuzz parameterized unit tests")
    fuzzp.add_argument("program")
    fuzzp.add_argument("puts", help="parameterized tests (*.put.jsonl)")
    fuzzp.add_argument("--budget", type=int, default=200, help="executions per test")
    fuzzp.add_argument("--seed", type=int, default=0, help="RNG seed")
    fuzzp.add_argument("--covered", help="JSON coverage map of already-covered branches")
    fuzzp.add_argument("--workers", type=int, default=1)
    fuzzp.add_argument("--out", help="write candidates here (*.cand.jsonl)")

    liftp = sub.add_parser("lift", help="lift candidates to validated system inputs")
    liftp.add_argument("program")
    liftp.add_argument("candidates", help="candidates (*.cand.jsonl)")
    liftp.add_argument("--input", required=True, help="system input the tests were carved from")
    liftp.add_argument("--out", help="directory for confirmed inputs and the manifest")
    liftp.add_argument("--match-location", action="store_true",
                       help="require the same trapping function, not just the same trap kind")
    liftp.add_argument("--workers", type=int, default=1)

    campp = sub.add_parser("campaign", help="run the full pipeline under a time budget")
    campp.add_argument("program")
    campp.add_argument("--seed-input", action="append", required=True,
                       help="seed input file; repeatable")
    campp.add_argument("--time", type=float, default=900.0, help="time budget in seconds")
    campp.add_argument("--rng", type=int, default=0, help="campaign RNG seed")
    campp.add_argument("--focus", action="append", help="fuzz only these functions")
    campp.add_argument("--fuzz-budget", type=int, default=200)
    campp.add_argument("--expand", type=int, default=10, help="extra system tests per seed")
    campp.add_argument("--max-iterations", type=int, default=None)
    campp.add_argument("--workers", type=int, default=1)
    campp.add_argument("--out", default="report.json", help="report path")
    campp.add_argument("--confirmed-dir", help="also write confirmed system tests here")

    repp = sub.add_parser("report", help="render a campaign report")
    repp.add_argument("report")
    repp.add_argument("--format", choices=("table", "json"), default="table")
    return p


def cli_main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    try:
        return _dispatch(args)
    except _UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except MiniCError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    cmd = args.command
    if cmd == "run":
        program = _load_program(args.program)
        result = run_system(program, _gather_input(args), Limits(step_budget=args.step_budget),
                            tracing=args.trace is not None, trace_id="cli")
        if args.trace:
            save_trace(result.trace, args.trace)
        if result.output:
            print(result.output, end="" if result.output.endswith("\n") else "\n")
        if result.outcome.kind != "ok":
            print(f"[{result.outcome.summary()}]", file=sys.stderr)
        return 0

    if cmd == "carve":
        program = _load_program(args.program)
        trace = load_trace(args.trace)
        tests = carve(trace, program, set(args.function) if args.function else None)
        out = args.out or (args.trace.rsplit(".", 1)[0] + ".unit.jsonl")
        save_units(tests, out)
        print(f"carved {len(tests)} unit tests -> {out}")
        return 0

    if cmd == "parameterize":
        program = _load_program(args.program)
        units = load_units(args.units)
        sysinput = load_input_file(args.input)
        puts = []
        for u in units:
            if u.setup_error:
                continue
            puts.append(parameterize(u, sysinput, program.layouts))
        out = args.out or (args.units.replace(".unit.", ".put.")
                           if ".unit." in args.units else args.units + ".put.jsonl")
        save_puts(puts, out)
        n_param = sum(1 for t in puts if t.parameters)
        print(f"parameterized {n_param} of {len(puts)} tests -> {out}")
        return 0

    if cmd == "fuzz":
        program = _load_program(args.program)
        puts = load_puts(args.puts)
        covered = CoverageMap()
        if args.covered:
            with open(args.covered) as fh:
                covered = CoverageMap.from_json(json.load(fh))
        all_candidates = []
        total = 0
        for t in puts:
            if not t.parameters:
                continue
            fr = fuzz_unit(program, t, args.budget, covered, args.seed, workers=args.workers)
            covered.merge(fr.coverage_delta)
            all_candidates.extend(fr.candidates)
            total += fr.stats.executions
        out = args.out or (args.puts.rsplit(".", 1)[0] + ".cand.jsonl")
        save_candidates(all_candidates, out)
        print(f"{total} executions, {len(all_candidates)} candidates -> {out}")
        return 0

    if cmd == "lift":
        program = _load_program(args.program)
        candidates = load_candidates(args.candidates)
        sysinput = load_input_file(args.input)
        rebased = [_rebase_candidate(c, sysinput) for c in candidates]
        outcomes = validate_many(program, rebased, match_location=args.match_location,
                                 workers=args.workers)
        confirmed = [oc for oc in outcomes if oc.confirmed]
        for oc in outcomes:
            tag = oc.classification + (f" ({oc.note})" if oc.note else "")
            print(f"{oc.candidate.test_id} exec {oc.candidate.exec_index}: {tag}")
        if args.out:
            manifest = write_confirmed(outcomes, args.out)
            print(f"{len(confirmed)} confirmed inputs -> {manifest}")
        return 0

    if cmd == "campaign":
        program = _load_program(args.program)
        seeds = [load_input_file(p) for p in args.seed_input]
        config = CampaignConfig(
            seeds=seeds,
            time_budget_s=args.time,
            fuzz_budget=args.fuzz_budget,
            rng_seed=args.rng,
            focus=set(args.focus) if args.focus else None,
            seed_expand_n=args.expand,
            workers=args.workers,
            max_iterations=args.max_iterations,
            program_name=args.program,
            confirmed_dir=args.confirmed_dir,
        )
        report = run_campaign(program, config)
        report.save(args.out)
        print(f"report -> {args.out}")
        print(render_table(report.data), end="")
        return 0

    if cmd == "report":
        report = Report.load(args.report)
        if args.format == "json":
            print(report.to_json())
        else:
            print(render_table(report.data), end="")
        return 0

    raise AssertionError(cmd)


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()

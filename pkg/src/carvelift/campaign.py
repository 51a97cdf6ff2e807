"""Campaign orchestration: seeds, system runs, carving, the select/fuzz/lift
loop under a time budget, and the final report.

The loop keeps two coverage maps: the coverage of system runs (seeds,
their expansions, and confirmed lifted tests), which drives scheduling,
and the cumulative map over system and unit runs, which decides what
counts as new coverage during fuzzing.  Confirmed lifted tests run
immediately, so their coverage feeds the very next selection.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from .carver import UnitTest, carve
from .lifter import FAILURE_CONFIRMED, FALSE_POSITIVE, LiftOutcome, lift_input, validate
from .memgraph import NodeBudget
from .minic.syntax import Program
from .minic.values import SystemInput
from .minic.vm import CoverageMap, Limits, run_system
from .parameterizer import ParameterizedUnitTest, parameterize
from .unitfuzz import FuzzSetupError, fuzz_unit


@dataclass
class CampaignConfig:
    seeds: list[SystemInput]
    time_budget_s: float = 900.0
    fuzz_budget: int = 200
    rng_seed: int = 0
    focus: set[str] | None = None
    node_budget: NodeBudget = field(default_factory=NodeBudget)
    system_limits: Limits = field(default_factory=Limits)
    unit_limits: Limits = field(default_factory=lambda: Limits(step_budget=500_000))
    seed_expand_n: int = 10
    workers: int = 1
    max_iterations: int | None = None  # deterministic cutoff for regression tests
    match_location: bool = False
    program_name: str = "program"
    confirmed_dir: str | None = None  # write confirmed system tests here

    def validate(self):
        if not self.seeds:
            raise ValueError("campaign needs at least one seed input")
        if self.time_budget_s <= 0 or self.fuzz_budget <= 0 or self.seed_expand_n < 0:
            raise ValueError("campaign budgets must be positive")


@dataclass
class UnitStats:
    """Scheduling inputs: fuzz executions given per function, and each
    function's branch coverage under all system tests so far."""

    invocations: dict[str, int] = field(default_factory=dict)
    branch_fraction: dict[str, float] = field(default_factory=dict)

    def bump(self, function: str, n: int):
        self.invocations[function] = self.invocations.get(function, 0) + n

    def refresh_fractions(self, program: Program, system_coverage: CoverageMap, functions):
        for fn in functions:
            total = program.branch_total(fn)
            if total == 0:
                self.branch_fraction[fn] = 1.0
                continue
            covered = sum(1 for bid in system_coverage.counts if bid[0] == fn)
            self.branch_fraction[fn] = covered / total


def select_next(units: list[ParameterizedUnitTest], stats: UnitStats) -> ParameterizedUnitTest:
    """Pick the test whose function got the fewest fuzz inputs; ties fall to
    the lowest system-coverage fraction, then to carve order."""
    if not units:
        raise ValueError("no eligible unit tests to select from")
    def key(pair):
        idx, u = pair
        return (stats.invocations.get(u.callee, 0),
                stats.branch_fraction.get(u.callee, 0.0),
                idx)
    return min(enumerate(units), key=key)[1]


# ---------------------------------------------------------------------------
# Seed expansion (byte-level input mutator)
# ---------------------------------------------------------------------------

def seed_expand(seeds: list[SystemInput], n: int = 10, rng: random.Random | None = None) -> list[SystemInput]:
    """n byte-level variants per seed: bitflips, byte insertion, deletion,
    duplication, and random overwrites (1 to 4 edits per variant)."""
    rng = rng or random.Random(0)
    out = []
    for seed in seeds:
        for _ in range(n):
            out.append(_mutate_input(seed, rng))
    return out


def _mutate_input(si: SystemInput, rng: random.Random) -> SystemInput:
    sources = [(name, bytearray(content)) for name, content in si.sources]
    if not sources:
        return si
    for _ in range(rng.randint(1, 4)):
        name, buf = sources[rng.randrange(len(sources))]
        ops = ["insert"] if not buf else ["bitflip", "insert", "delete", "duplicate", "overwrite"]
        op = rng.choice(ops)
        if op == "bitflip":
            buf[rng.randrange(len(buf))] ^= 1 << rng.randrange(8)
        elif op == "insert":
            buf.insert(rng.randint(0, len(buf)), rng.randrange(256))
        elif op == "delete":
            del buf[rng.randrange(len(buf))]
        elif op == "duplicate":
            i = rng.randrange(len(buf))
            buf.insert(i, buf[i])
        elif op == "overwrite":
            buf[rng.randrange(len(buf))] = rng.randrange(256)
    return SystemInput(tuple((name, bytes(buf)) for name, buf in sources))


# ---------------------------------------------------------------------------
# Report data
# ---------------------------------------------------------------------------

@dataclass
class IterationRecord:
    index: int
    test_id: str
    callee: str
    fuzz_seed: int
    executions: int
    failure_candidates: int
    coverage_candidates: int
    lifts_confirmed_failure: int = 0
    lifts_confirmed_coverage: int = 0
    lifts_false_positive: int = 0
    lifts_different_trap: int = 0
    lifts_deduplicated: int = 0
    cumulative_branches: int = 0
    system_branches: int = 0
    complete: bool = True

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class FailureEntry:
    iteration: int  # -1 for failures observed directly on system runs
    origin: str  # 'lifted' | 'system'
    trap_kind: str
    trap_function: str
    unit_test: str | None
    callee: str | None
    binding: dict | None
    input_sources: list  # [[name, hex], ...]
    input_preview: str

    def to_dict(self) -> dict:
        return dict(self.__dict__)


class Campaign:
    """Mutable state of one campaign run; `run_campaign` drives it."""

    def __init__(self, program: Program, config: CampaignConfig):
        config.validate()
        self.program = program
        self.config = config
        self.system_coverage = CoverageMap()  # system runs only: drives scheduling
        self.cumulative = CoverageMap()  # units + system runs: defines "new"
        self.stats = UnitStats()
        self.invocations_all: dict[str, int] = {}
        self.func_steps_all: dict[str, int] = {}
        self.functions_reached: set[str] = set()
        self.failures: list[FailureEntry] = []
        self.iterations: list[IterationRecord] = []
        self.lift_outcomes: list[LiftOutcome] = []
        self.seed_runs: list[dict] = []
        self.units: list[UnitTest] = []
        self.puts: list[ParameterizedUnitTest] = []
        self.eligible: list[ParameterizedUnitTest] = []
        self.unit_time_s = 0.0
        self.unit_execs = 0
        self.unit_time_by_fn: dict[str, float] = {}
        self.unit_execs_by_fn: dict[str, int] = {}
        self.system_time_s = 0.0
        self.system_runs = 0
        self.notes: list[str] = []
        # failure signatures already confirmed at system level; further
        # candidates with the same signature are triaged away, not re-lifted
        self.confirmed_signatures: set[tuple[str, str, str]] = set()

    def _merge_run_counters(self, result):
        for fn, n in result.calls.items():
            self.invocations_all[fn] = self.invocations_all.get(fn, 0) + n
        for fn, n in result.func_steps.items():
            self.func_steps_all[fn] = self.func_steps_all.get(fn, 0) + n

    def record_system_run(self, result, elapsed: float, reached: bool = True):
        self.system_time_s += elapsed
        self.system_runs += 1
        self._merge_run_counters(result)
        if reached:
            self.functions_reached.update(result.calls)

    def add_system_failure(self, result, sysinput: SystemInput, iteration: int):
        self.failures.append(FailureEntry(
            iteration, "system", result.outcome.trap_kind, result.outcome.trap_function,
            None, None, None,
            [[name, content.hex()] for name, content in sysinput.sources],
            sysinput.describe()[:200],
        ))


def run_campaign(program: Program, config: CampaignConfig) -> "Report":
    from .report import Report

    state = Campaign(program, config)
    started = time.time()
    t0 = time.monotonic()
    deadline = t0 + config.time_budget_s
    rng = random.Random(config.rng_seed)

    # phase 1: seed expansion, then every system test runs with tracing
    inputs = list(config.seeds) + seed_expand(config.seeds, config.seed_expand_n, rng)
    traces = []
    for i, si in enumerate(inputs):
        if time.monotonic() >= deadline and i > 0:
            state.notes.append(f"time budget exhausted after {i} of {len(inputs)} seed runs")
            break
        t = time.perf_counter()
        result = run_system(program, si, config.system_limits, tracing=True,
                            trace_id=f"sys{i}", node_budget=config.node_budget)
        state.record_system_run(result, time.perf_counter() - t)
        state.system_coverage.merge(result.coverage)
        state.cumulative.merge(result.coverage)
        if result.outcome.is_failure:
            state.add_system_failure(result, si, -1)
        state.seed_runs.append({
            "index": i,
            "expanded": i >= len(config.seeds),
            "outcome": result.outcome.summary(),
            "output_len": len(result.output),
            "input": [[name, content.hex()] for name, content in si.sources],
        })
        traces.append(result.trace)

    # phase 2: carve everything, parameterize, filter eligibility
    for trace in traces:
        state.units.extend(carve(trace, program))
    for unit in state.units:
        if unit.setup_error:
            continue
        state.puts.append(parameterize(unit, unit.input, program.layouts))
    focus = config.focus
    state.eligible = [p for p in state.puts
                      if p.parameters and (focus is None or p.callee in focus)]
    if not state.eligible:
        state.notes.append("no eligible parameterized unit tests; fuzz loop skipped")

    # phase 3: the select / fuzz / lift loop
    iteration = 0
    while state.eligible:
        if time.monotonic() >= deadline:
            break
        if config.max_iterations is not None and iteration >= config.max_iterations:
            state.notes.append(f"stopped at configured max_iterations={config.max_iterations}")
            break
        state.stats.refresh_fractions(program, state.system_coverage,
                                      {p.callee for p in state.eligible})
        test = select_next(state.eligible, state.stats)
        fuzz_seed = (config.rng_seed * 1_000_003 + iteration) & 0xFFFFFFFF
        rec = IterationRecord(iteration, test.id, test.callee, fuzz_seed, 0, 0, 0)
        try:
            fr = fuzz_unit(program, test, config.fuzz_budget, state.cumulative, fuzz_seed,
                           config.unit_limits, config.workers, deadline=deadline)
        except FuzzSetupError as e:
            state.notes.append(f"iteration {iteration}: {e}")
            state.eligible = [p for p in state.eligible if p.id != test.id]
            iteration += 1
            continue
        state.stats.bump(test.callee, fr.stats.executions)
        state.cumulative.merge(fr.coverage_delta)
        state.unit_time_s += fr.stats.total_time_s
        state.unit_execs += fr.stats.executions
        state.unit_time_by_fn[test.callee] = state.unit_time_by_fn.get(test.callee, 0.0) + fr.stats.total_time_s
        state.unit_execs_by_fn[test.callee] = state.unit_execs_by_fn.get(test.callee, 0) + fr.stats.executions
        for fn, nn in fr.stats.calls.items():
            state.invocations_all[fn] = state.invocations_all.get(fn, 0) + nn
        for fn, nn in fr.stats.func_steps.items():
            state.func_steps_all[fn] = state.func_steps_all.get(fn, 0) + nn
        rec.executions = fr.stats.executions
        rec.failure_candidates = sum(1 for c in fr.candidates if c.reason_kind == "unit-failure")
        rec.coverage_candidates = len(fr.candidates) - rec.failure_candidates
        rec.complete = fr.stats.executions == config.fuzz_budget
        if not fr.stats.anchor_ok:
            state.notes.append(f"iteration {iteration}: anchor replay of {test.id} failed")

        # lift every candidate; confirmed system tests run right here, so
        # their coverage is visible to the next selection step
        for cand in fr.candidates:
            if time.monotonic() >= deadline:
                rec.complete = False
                break
            if cand.reason_kind == "unit-failure":
                signature = (cand.callee, cand.trap_kind, cand.trap_function or "?")
                if signature in state.confirmed_signatures:
                    rec.lifts_deduplicated += 1
                    continue
            lifted = lift_input(cand.input, cand, cand.binding)
            t = time.perf_counter()
            oc = validate(program, lifted, cand, config.system_limits, config.match_location)
            state.record_system_run(oc.system, time.perf_counter() - t, reached=oc.confirmed)
            state.lift_outcomes.append(oc)
            if oc.classification == FAILURE_CONFIRMED:
                rec.lifts_confirmed_failure += 1
                state.confirmed_signatures.add((cand.callee, cand.trap_kind, cand.trap_function or "?"))
                state.system_coverage.merge(oc.system.coverage)
                state.cumulative.merge(oc.system.coverage)
                state.failures.append(FailureEntry(
                    iteration, "lifted", oc.system.outcome.trap_kind,
                    oc.system.outcome.trap_function, cand.test_id, cand.callee,
                    {slot: repr(v) for slot, v in cand.binding.values.items()},
                    [[name, content.hex()] for name, content in lifted.sources],
                    lifted.describe()[:200],
                ))
            elif oc.classification == FALSE_POSITIVE:
                rec.lifts_false_positive += 1
                if oc.note.startswith("different-trap:"):
                    rec.lifts_different_trap += 1
            else:
                rec.lifts_confirmed_coverage += 1
                state.system_coverage.merge(oc.system.coverage)
                state.cumulative.merge(oc.system.coverage)
                if oc.system.outcome.is_failure:
                    # the covering run also crashed: a real failing system test
                    state.add_system_failure(oc.system, lifted, iteration)
        rec.cumulative_branches = len(state.cumulative.counts)
        rec.system_branches = len(state.system_coverage.counts)
        state.iterations.append(rec)
        iteration += 1

    wall = time.monotonic() - t0
    if config.confirmed_dir:
        from .lifter import write_confirmed
        write_confirmed(state.lift_outcomes, config.confirmed_dir)
    return Report.build(state, started, wall)

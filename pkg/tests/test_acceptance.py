"""Acceptance suite: one test per criterion, each printing a PASS line.

The campaign-based criteria run real 60-second campaigns, so this module
takes a while; run it with `pytest tests/test_acceptance.py -v`.
"""

import itertools
import random
import time

import pytest

from carvelift.campaign import CampaignConfig, UnitStats, run_campaign, seed_expand, select_next
from carvelift.carver import carve, replay_matches
from carvelift.examples import list_examples
from carvelift.lifter import lift_input
from carvelift.memgraph import (
    NodeBudget, SegmentMap, execute_plan, graph_signature, plan_reconstruction,
    roots_after_execution, segment_lookup, snapshot,
)
from carvelift.minic import SystemInput, parse_program, run_system, run_unit
from carvelift.minic.memory import Memory
from carvelift.minic.syntax import CHAR, INT, Layouts, PtrT
from carvelift.minic.values import Ptr
from carvelift.parameterizer import parameterize
from carvelift.report import comparable_view
from carvelift.tracer import input_from_json

CAMPAIGN_SECONDS = 60.0
EMPTY_LAYOUTS = Layouts({})


def report_line(criterion, text):
    print(f"ACCEPTANCE {criterion}: PASS — {text}", flush=True)


def calc_subject():
    return next(s for s in list_examples() if s.name == "calc")


# ---------------------------------------------------------------------------
# 1. Running-example fidelity
# ---------------------------------------------------------------------------

def test_c01_running_example_fidelity():
    started = time.monotonic()
    calc = calc_subject()
    seed = SystemInput.make(stdin="1 + 2")
    config = CampaignConfig(seeds=[seed], time_budget_s=4.0, rng_seed=0,
                            max_iterations=0, program_name="calc")
    report = run_campaign(calc.program, config).data

    add_tests = [t for t in report["units"]["tests"]
                 if t["callee"] == "add" and t["id"].startswith("sys0:")]
    assert len(add_tests) == 1
    assert add_tests[0]["parameters"] == 2
    assert add_tests[0]["spans"] == [["stdin", 0, 1], ["stdin", 4, 5]]

    result = run_system(calc.program, seed, tracing=True, trace_id="sys0")
    add = next(t for t in carve(result.trace, calc.program) if t.callee == "add")
    put = parameterize(add, seed, calc.program.layouts)
    lifted = lift_input(seed, put, {"p1": 337747944, "p2": 352295539})
    assert lifted.stdin == b"337747944 + 352295539"

    elapsed = time.monotonic() - started
    assert elapsed < 5.0, f"took {elapsed:.2f}s"
    report_line("C1", f"add carved with spans [0,1) and [4,5); lift exact; {elapsed:.2f}s")


# ---------------------------------------------------------------------------
# 2. Replay fidelity suite
# ---------------------------------------------------------------------------

def test_c02_replay_fidelity_suite():
    mismatches = 0
    checked = 0
    for subject in list_examples():
        for rng_seed in range(5):
            inputs = subject.seed_inputs()
            inputs = inputs + seed_expand(inputs, 10, random.Random(rng_seed))
            for i, si in enumerate(inputs):
                result = run_system(subject.program, si, tracing=True,
                                    trace_id=f"{subject.name}{rng_seed}_{i}")
                for unit in carve(result.trace, subject.program):
                    if unit.setup_error:
                        continue
                    checked += 1
                    if not replay_matches(subject.program, unit):
                        mismatches += 1
    assert checked > 500
    assert mismatches == 0
    report_line("C2", f"{checked} carved tests replayed, 0 footprint mismatches")


# ---------------------------------------------------------------------------
# 3. Memory-graph round-trip property
# ---------------------------------------------------------------------------

def _random_heap(rng):
    """Random shapes: records and arrays (typed byte regions), cycles,
    shared nodes, char runs; up to 200 nodes."""
    mem = Memory()
    n = rng.randint(1, 200)
    sids = []
    for _ in range(n):
        size = rng.choice([1, 3, 8, 12, 16, 24, 40, 64])
        sid = mem.alloc(size, "heap", content=bytes(rng.randrange(256) for _ in range(size)))
        sids.append(sid)
    for sid in sids:
        seg = mem.seg(sid)
        for off in range(0, max(0, seg.size - 7), 8):
            if rng.random() < 0.45:
                target = mem.seg(rng.choice(sids))  # cycles and sharing included
                mem.write_ptr_raw(sid, off, Ptr(target.sid, rng.randint(0, target.size)))
    roots = []
    for i in range(rng.randint(1, 4)):
        if rng.random() < 0.25:
            roots.append((f"arg{i}", INT, rng.randint(-(2 ** 63), 2 ** 63 - 1)))
        else:
            target = mem.seg(rng.choice(sids))
            roots.append((f"arg{i}", PtrT(CHAR), Ptr(target.sid, rng.randint(0, target.size))))
    return mem, roots


def test_c03_memory_graph_roundtrip():
    rng = random.Random(2024)
    failures = 0
    big = NodeBudget(max_nodes=1 << 20, max_bytes=1 << 30)
    for case in range(1000):
        mem, roots = _random_heap(rng)
        g = snapshot(mem, roots, EMPTY_LAYOUTS, big)
        plan = plan_reconstruction(g)
        mem2 = Memory()
        result = execute_plan(plan, mem2)
        g2 = snapshot(mem2, roots_after_execution(g, result), EMPTY_LAYOUTS, big)
        if graph_signature(g) != graph_signature(g2):
            failures += 1
    assert failures == 0

    # truncation law: with max-nodes below the reachable size, the flag is
    # set and the node count is exactly the budget
    for case in range(50):
        mem, roots = _random_heap(rng)
        g = snapshot(mem, roots, EMPTY_LAYOUTS, big)
        if len(g.nodes) < 2:
            continue
        n = rng.randint(1, len(g.nodes) - 1)
        gt = snapshot(mem, roots, EMPTY_LAYOUTS, NodeBudget(max_nodes=n, max_bytes=1 << 30))
        assert gt.truncated
        assert len(gt.nodes) == n
    report_line("C3", "1000 random heap round-trips isomorphic; truncation law holds")


# ---------------------------------------------------------------------------
# 4. Segment-map algebra
# ---------------------------------------------------------------------------

def test_c04_segment_map_algebra():
    rng = random.Random(11)
    for case in range(1000):
        mem = Memory()
        length = rng.randint(0, 4096)
        sid = mem.alloc(length, rng.choice(["heap", "stack", "static"]))
        sm = SegmentMap.from_memory(mem)
        off = rng.randint(0, length)
        _, remaining = segment_lookup(sm, Ptr(sid, off))
        assert remaining == length - off
        d = rng.randint(0, remaining)
        _, remaining2 = segment_lookup(sm, Ptr(sid, off + d))
        assert remaining2 == remaining - d

    mem = Memory()
    sid = mem.alloc(10, "heap")
    assert segment_lookup(SegmentMap.from_memory(mem), Ptr(sid, 10)) == (sid, 0)
    report_line("C4", "remaining(ptr+d) = remaining(ptr) - d over 1000 cases; boundary exact")


# ---------------------------------------------------------------------------
# 5. Zero-false-alarm law (full campaigns)
# ---------------------------------------------------------------------------

def test_c05_zero_false_alarm_law():
    reports = 0
    failures_seen = 0
    for subject in list_examples():
        for rng_seed in range(5):
            config = CampaignConfig(seeds=subject.seed_inputs(),
                                    time_budget_s=CAMPAIGN_SECONDS,
                                    fuzz_budget=60, rng_seed=rng_seed,
                                    program_name=subject.name)
            report = run_campaign(subject.program, config).data
            reports += 1
            for failure in report["failures"]:
                failures_seen += 1
                # every reported failure is failure-confirmed by construction
                # (lifted and validated, or observed directly on a system run);
                # re-running its input must reproduce the same trap kind
                si = input_from_json(failure["input_sources"])
                rerun = run_system(subject.program, si)
                assert rerun.outcome.is_failure, (subject.name, rng_seed, failure)
                assert rerun.outcome.trap_kind == failure["trap_kind"], (subject.name, failure)
    assert reports == 15
    assert failures_seen > 0, "campaigns should confirm the planted defects"
    report_line("C5", f"15/15 reports clean; {failures_seen} reported failures all reproduce")


# ---------------------------------------------------------------------------
# 6. False-positive filtering
# ---------------------------------------------------------------------------

SPURIOUS_SRC = """
int helper(int x) {
  assert(x < 100);
  return x;
}
int main() {
  int n;
  n = atoi(input());
  helper(7);
  print_int(n);
  return 0;
}
"""


def test_c06_false_positive_filtering():
    program = parse_program(SPURIOUS_SRC)
    config = CampaignConfig(seeds=[SystemInput.make(stdin="7")], time_budget_s=30.0,
                            fuzz_budget=80, rng_seed=1, max_iterations=8,
                            seed_expand_n=0, program_name="spurious")
    report = run_campaign(program, config).data
    assert report["fuzzing"]["failure_candidates"] > 0, "unit level must produce candidates"
    assert report["failures"] == []
    assert report["lifting"]["failure_confirmed"] == 0
    assert report["lifting"]["false_positives"] > 0
    report_line("C6", f"{report['fuzzing']['failure_candidates']} unit failures, "
                      f"0 reported after lifting")


# ---------------------------------------------------------------------------
# 7. Desk-scale speedup analogue
# ---------------------------------------------------------------------------

def test_c07_speedup_analogue():
    calc = calc_subject()
    seed = SystemInput.make(stdin="1 + 2")
    result = run_system(calc.program, seed, tracing=True)
    add = next(t for t in carve(result.trace, calc.program) if t.callee == "add")
    put = parameterize(add, seed, calc.program.layouts)

    n = 25
    t0 = time.perf_counter()
    for _ in range(n):
        run_system(calc.program, seed)
    system_mean = (time.perf_counter() - t0) / n

    binding = put.original_binding()
    t0 = time.perf_counter()
    for _ in range(n):
        run_unit(calc.program, put, binding)
    unit_mean = (time.perf_counter() - t0) / n

    ratio = system_mean / unit_mean
    assert ratio >= 10.0, f"system/unit ratio {ratio:.1f}x below 10x"
    report_line("C7", f"mean system {system_mean * 1000:.2f}ms vs add unit "
                      f"{unit_mean * 1000:.2f}ms = {ratio:.1f}x (>= 10x)")


# ---------------------------------------------------------------------------
# 8. Scheduler law
# ---------------------------------------------------------------------------

class _T:
    def __init__(self, i, callee):
        self.id = f"t{i}"
        self.callee = callee


def test_c08_scheduler_law():
    inv_values = (0, 1, 2)
    frac_values = (0.0, 0.5, 1.0)
    checked = 0
    for size in range(1, 7):
        domain = list(itertools.product(inv_values, frac_values))
        # exhaustive over per-test stat assignments for small pools, a
        # deterministic lattice slice for the larger ones
        assignments = itertools.product(domain, repeat=size) if size <= 4 else (
            tuple(domain[(i * 7 + k * 3) % len(domain)] for i in range(size))
            for k in range(len(domain) ** 2)
        )
        for stats_tuple in assignments:
            pool = [_T(i, f"f{i}") for i in range(size)]
            st = UnitStats()
            for t, (inv, frac) in zip(pool, stats_tuple):
                st.invocations[t.callee] = inv
                st.branch_fraction[t.callee] = frac
            chosen = select_next(pool, st)
            keys = [(st.invocations[t.callee], st.branch_fraction[t.callee], i)
                    for i, t in enumerate(pool)]
            assert keys[pool.index(chosen)] == min(keys)
            checked += 1
    # explicit constructed ties from the contract examples
    st = UnitStats(invocations={"f": 5, "g": 3}, branch_fraction={"f": 0.4, "g": 0.9})
    assert select_next([_T(0, "f"), _T(1, "g")], st).callee == "g"
    st = UnitStats(invocations={"f": 3, "g": 3}, branch_fraction={"f": 0.4, "g": 0.9})
    assert select_next([_T(0, "g"), _T(1, "f")], st).callee == "f"
    report_line("C8", f"{checked} scheduler pools verified against the ordering rule")


# ---------------------------------------------------------------------------
# 9. Focus-mode analogue
# ---------------------------------------------------------------------------

def test_c09_focus_mode_analogue():
    calc = calc_subject()
    counts = {}
    for label, focus in (("unfocused", None), ("focused", {"add"})):
        config = CampaignConfig(seeds=calc.seed_inputs(), time_budget_s=CAMPAIGN_SECONDS,
                                fuzz_budget=60, rng_seed=2, focus=focus,
                                program_name="calc")
        report = run_campaign(calc.program, config).data
        counts[label] = report["functions"]["invocations"].get("add", 0)
        if focus:
            assert {r["callee"] for r in report["iterations"]} <= {"add"}
    ratio = counts["focused"] / max(1, counts["unfocused"])
    assert ratio >= 5.0, f"focus ratio {ratio:.1f}x below 5x ({counts})"
    report_line("C9", f"add invocations {counts['unfocused']} -> {counts['focused']} "
                      f"({ratio:.1f}x >= 5x)")


# ---------------------------------------------------------------------------
# 10. Determinism
# ---------------------------------------------------------------------------

def test_c10_determinism():
    calc = calc_subject()

    def one():
        config = CampaignConfig(seeds=calc.seed_inputs(), time_budget_s=20.0,
                                fuzz_budget=50, rng_seed=9, program_name="calc")
        return run_campaign(calc.program, config).data

    a, b = one(), one()
    cutoff = min(
        sum(1 for r in a["iterations"] if r["complete"]),
        sum(1 for r in b["iterations"] if r["complete"]),
    )
    assert cutoff > 0
    assert comparable_view(a, cutoff) == comparable_view(b, cutoff)
    report_line("C10", f"two campaigns identical over {cutoff} completed iterations")

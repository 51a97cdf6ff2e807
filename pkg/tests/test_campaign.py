import random

import pytest

from carvelift.campaign import (
    CampaignConfig, UnitStats, run_campaign, seed_expand, select_next,
)
from carvelift.minic import SystemInput
from carvelift.report import comparable_view


# ---------------------------------------------------------------------------
# seed_expand
# ---------------------------------------------------------------------------

def test_expand_ten_distinct_variants():
    seed = SystemInput.make(stdin="1 + 2")
    variants = seed_expand([seed], 10, random.Random(0))
    assert len(variants) == 10
    assert len({v.sources for v in variants}) > 1
    assert all(v != seed for v in variants)


def test_expand_zero():
    assert seed_expand([SystemInput.make(stdin="x")], 0, random.Random(0)) == []


def test_expand_empty_seed_only_insertions():
    # an empty buffer admits only insertion; later edits may delete again,
    # so emptiness can recur, but expansion never fails and mostly grows
    seed = SystemInput.make(stdin="")
    variants = seed_expand([seed], 20, random.Random(1))
    assert len(variants) == 20
    assert sum(1 for v in variants if len(v.stdin) >= 1) >= 15


def test_expand_deterministic():
    seed = SystemInput.make(stdin="abc", args=["1"])
    a = seed_expand([seed], 10, random.Random(5))
    b = seed_expand([seed], 10, random.Random(5))
    assert a == b


def test_expand_multiple_seeds():
    seeds = [SystemInput.make(stdin="a"), SystemInput.make(stdin="b")]
    variants = seed_expand(seeds, 3, random.Random(0))
    assert len(variants) == 6


# ---------------------------------------------------------------------------
# select_next
# ---------------------------------------------------------------------------

class FakeTest:
    def __init__(self, tid, callee):
        self.id = tid
        self.callee = callee

    def __repr__(self):
        return self.id


def stats_for(**entries):
    st = UnitStats()
    for fn, (inv, frac) in entries.items():
        st.invocations[fn] = inv
        st.branch_fraction[fn] = frac
    return st


def test_select_lowest_invocation_count():
    st = stats_for(f=(5, 0.4), g=(3, 0.9))
    pool = [FakeTest("t1", "f"), FakeTest("t2", "g")]
    assert select_next(pool, st).callee == "g"


def test_select_coverage_tiebreak():
    st = stats_for(f=(3, 0.4), g=(3, 0.9))
    pool = [FakeTest("t2", "g"), FakeTest("t1", "f")]
    assert select_next(pool, st).callee == "f"


def test_select_single_candidate():
    st = stats_for(f=(100, 1.0))
    only = FakeTest("t", "f")
    assert select_next([only], st) is only


def test_select_carve_order_final_tiebreak():
    st = stats_for(f=(1, 0.5), g=(1, 0.5))
    pool = [FakeTest("first", "f"), FakeTest("second", "g")]
    assert select_next(pool, st).id == "first"


def test_select_empty_pool_raises():
    with pytest.raises(ValueError):
        select_next([], UnitStats())


def test_select_exhaustive_small_pools():
    """For every pool of up to 6 tests with known stats, the selected test
    must have minimal invocation count, then minimal coverage, then the
    lowest carve index."""
    rng = random.Random(0)
    for trial in range(300):
        n = rng.randint(1, 6)
        pool = []
        st = UnitStats()
        for i in range(n):
            fn = f"f{i}"
            pool.append(FakeTest(f"t{i}", fn))
            st.invocations[fn] = rng.randint(0, 3)
            st.branch_fraction[fn] = rng.choice([0.0, 0.25, 0.5, 1.0])
        chosen = select_next(pool, st)
        keys = [(st.invocations[t.callee], st.branch_fraction[t.callee], i)
                for i, t in enumerate(pool)]
        best = min(keys)
        idx = pool.index(chosen)
        assert keys[idx] == best


# ---------------------------------------------------------------------------
# run_campaign
# ---------------------------------------------------------------------------

def calc_config(**kw):
    base = dict(seeds=[SystemInput.make(stdin="1 + 2")], time_budget_s=30.0,
                fuzz_budget=40, rng_seed=7, program_name="calc", seed_expand_n=4)
    base.update(kw)
    return CampaignConfig(**base)


def test_campaign_smoke(calc):
    rep = run_campaign(calc.program, calc_config(max_iterations=12)).data
    assert rep["units"]["carved"] > 0
    add_tests = [t for t in rep["units"]["tests"] if t["callee"] == "add"]
    assert add_tests and any(t["parameters"] == 2 for t in add_tests)
    assert rep["meta"]["iterations_total"] <= 12
    assert rep["coverage"]["system_branches"] <= rep["coverage"]["total_branches"]


def test_campaign_finds_and_confirms_planted_failure(calc):
    rep = run_campaign(calc.program, calc_config(max_iterations=30)).data
    lifted = [f for f in rep["failures"] if f["origin"] == "lifted"]
    assert lifted
    assert all(f["trap_kind"] == "out-of-bounds" for f in lifted)
    assert rep["lifting"]["failure_confirmed"] >= 1


def test_campaign_budget_smaller_than_one_run(calc):
    cfg = calc_config(time_budget_s=1e-6)
    rep = run_campaign(calc.program, cfg).data
    assert rep["fuzzing"]["unit_executions"] == 0
    assert rep["meta"]["iterations_total"] == 0
    assert len(rep["seed_runs"]) >= 1  # the first seed always runs


def test_campaign_focus_discipline(calc):
    cfg = calc_config(focus={"add"}, max_iterations=6)
    rep = run_campaign(calc.program, cfg).data
    assert {r["callee"] for r in rep["iterations"]} == {"add"}


def test_campaign_coverage_monotone(calc):
    rep = run_campaign(calc.program, calc_config(max_iterations=15)).data
    cum = [r["cumulative_branches"] for r in rep["iterations"]]
    sysb = [r["system_branches"] for r in rep["iterations"]]
    assert cum == sorted(cum)
    assert sysb == sorted(sysb)


def test_campaign_deterministic_by_iteration(calc):
    cfg_a = calc_config(max_iterations=8)
    cfg_b = calc_config(max_iterations=8)
    a = run_campaign(calc.program, cfg_a).data
    b = run_campaign(calc.program, cfg_b).data
    assert comparable_view(a) == comparable_view(b)


def test_campaign_reported_failures_replay(calc):
    from carvelift.minic import run_system
    from carvelift.tracer import input_from_json

    rep = run_campaign(calc.program, calc_config(max_iterations=25)).data
    for f in rep["failures"]:
        si = input_from_json(f["input_sources"])
        rerun = run_system(calc.program, si)
        assert rerun.outcome.is_failure
        assert rerun.outcome.trap_kind == f["trap_kind"]


def test_campaign_confirmed_manifest_replays(calc, tmp_path):
    import json

    from carvelift.inputfiles import parse_input_spec
    from carvelift.minic import run_system

    cfg = calc_config(max_iterations=25, confirmed_dir=str(tmp_path / "confirmed"))
    run_campaign(calc.program, cfg)
    manifest = json.loads((tmp_path / "confirmed" / "manifest.json").read_text())
    assert manifest
    for entry in manifest:
        data = (tmp_path / "confirmed" / entry["file"]).read_bytes()
        rerun = run_system(calc.program, parse_input_spec(data))
        if entry["classification"] == "failure-confirmed":
            assert rerun.outcome.is_failure
            assert rerun.outcome.trap_kind == entry["trap"]
        else:
            for key in entry["new_branches"]:
                from carvelift.minic import branch_from_key
                assert rerun.coverage.covered(branch_from_key(key))


def test_campaign_seed_runs_replay_recorded_outcome(calc):
    from carvelift.minic import run_system
    from carvelift.tracer import input_from_json

    rep = run_campaign(calc.program, calc_config(max_iterations=2)).data
    for sr in rep["seed_runs"]:
        rerun = run_system(calc.program, input_from_json(sr["input"]))
        assert rerun.outcome.summary() == sr["outcome"]


def test_campaign_validates_config():
    with pytest.raises(ValueError):
        CampaignConfig(seeds=[]).validate()
    with pytest.raises(ValueError):
        CampaignConfig(seeds=[SystemInput.make(stdin="x")], time_budget_s=0).validate()

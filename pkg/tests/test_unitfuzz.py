import random

import pytest

from carvelift.carver import carve
from carvelift.minic import INT64_MAX, INT64_MIN, SystemInput, parse_program, run_system
from carvelift.minic.vm import CoverageMap
from carvelift.parameterizer import parameterize
from carvelift.unitfuzz import (
    DBL_MAX, FuzzSetupError, MAX_RANDOM_STRING, candidate_to_json, double_strategy,
    fuzz_unit, int_strategy, load_candidates, make_bindings, mutate_double,
    mutate_int, mutate_string, save_candidates, string_strategy,
)


def rng(seed=0):
    return random.Random(seed)


# ---------------------------------------------------------------------------
# individual strategies
# ---------------------------------------------------------------------------

def test_int_constant_zero():
    assert int_strategy("zero", 123, rng()) == 0


def test_int_constant_max_min():
    assert int_strategy("max", 0, rng()) == INT64_MAX == 9223372036854775807
    assert int_strategy("min", 0, rng()) == INT64_MIN


def test_int_bitflip_lowest_bit():
    flipped = {int_strategy("bitflip", 1, rng(s)) for s in range(200)}
    assert 0 in flipped  # bit 0 of 1 flips to 0
    assert all(v != 1 for v in flipped)


def test_int_random_in_64_bit_range():
    for s in range(50):
        v = int_strategy("random", 0, rng(s))
        assert INT64_MIN <= v <= INT64_MAX


def test_double_constants():
    assert double_strategy("zero", 1.5, rng()) == 0.0
    assert double_strategy("max", 0.0, rng()) == DBL_MAX
    assert double_strategy("min", 0.0, rng()) == -DBL_MAX


def test_double_sign_bit_flip():
    seen = {double_strategy("bitflip", 1.0, rng(s)) for s in range(400)}
    assert -1.0 in seen


def test_double_random_pattern_frozen_seed():
    # frozen at first run: the bit pattern drawn by Random(1234)
    v = double_strategy("random", 0.0, rng(1234))
    expected = random.Random(1234).getrandbits(64)
    import struct
    assert struct.pack("<d", v) == struct.pack("<Q", expected)


def test_string_all_zeros_and_ones():
    assert string_strategy("zeros", b"abc", rng()) == b"\x00\x00\x00"
    assert string_strategy("ones", b"ab", rng()) == b"\xff\xff"


def test_string_repeat_whole_original():
    out = {string_strategy("repeat", b"12", rng(s)) for s in range(100)}
    assert b"121212" in out
    assert all(set(o) <= {0x31, 0x32} for o in out)


def test_string_random_lengths_capped():
    for s in range(100):
        assert 1 <= len(string_strategy("random-bytes", b"x", rng(s))) <= MAX_RANDOM_STRING
        out = string_strategy("random-ascii", b"x", rng(s))
        assert all(0x20 <= c <= 0x7E for c in out)


def test_string_bitflip_changes_one_bit():
    out = string_strategy("bitflip", b"\x00\x00", rng(3))
    assert len(out) == 2
    assert bin(int.from_bytes(out, "big")).count("1") == 1


def test_dispatchers_deterministic():
    assert mutate_int(5, rng(42)) == mutate_int(5, rng(42))
    assert mutate_string(b"ab", rng(42)) == mutate_string(b"ab", rng(42))
    a, b = mutate_double(1.0, rng(42)), mutate_double(1.0, rng(42))
    assert (a != a and b != b) or a == b  # NaN-safe comparison


# ---------------------------------------------------------------------------
# fuzz_unit
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def add_put():
    from carvelift.examples import get_example

    calc = get_example("calc")
    si = SystemInput.make(stdin="1 + 2")
    result = run_system(calc.program, si, tracing=True)
    add = next(t for t in carve(result.trace, calc.program) if t.callee == "add")
    return calc.program, parameterize(add, si, calc.program.layouts), result.coverage


def test_fuzz_deterministic(add_put):
    prog, put, covered = add_put
    a = fuzz_unit(prog, put, 50, covered, seed=7)
    b = fuzz_unit(prog, put, 50, covered, seed=7)
    assert [candidate_to_json(c) for c in a.candidates] == [candidate_to_json(c) for c in b.candidates]
    assert a.stats.outcomes == b.stats.outcomes


def test_fuzz_different_seeds_differ(add_put):
    prog, put, covered = add_put
    a = fuzz_unit(prog, put, 50, covered, seed=1)
    b = fuzz_unit(prog, put, 50, covered, seed=2)
    assert [c.binding.values for c in a.candidates] != [c.binding.values for c in b.candidates]


def test_anchor_never_a_candidate(add_put):
    prog, put, covered = add_put
    result = fuzz_unit(prog, put, 40, covered, seed=3)
    assert result.stats.anchor_ok
    assert all(c.exec_index > 0 for c in result.candidates)


def test_first_binding_is_originals(add_put):
    _, put, _ = add_put
    bindings = make_bindings(put, 5, seed=0)
    assert bindings[0].values == put.original_binding()
    assert all(m == "original" for m in bindings[0].mutators.values())


def test_new_coverage_sets_disjoint_from_covered_at_time(add_put):
    prog, put, covered = add_put
    result = fuzz_unit(prog, put, 100, covered, seed=5)
    seen = covered.copy()
    by_exec = {c.exec_index: c for c in result.candidates if c.reason_kind == "new-coverage"}
    bindings = make_bindings(put, 100, seed=5)
    from carvelift.minic import run_unit
    for b in bindings:
        run = run_unit(prog, put, b.values if b.exec_index else None)
        if b.exec_index in by_exec:
            cand = by_exec[b.exec_index]
            assert all(not seen.covered(br) for br in cand.branches)
            assert cand.branches  # non-empty by construction
        seen.merge(run.coverage)


def test_failure_candidates_found_within_budget(add_put):
    prog, put, covered = add_put
    result = fuzz_unit(prog, put, 100, covered, seed=7)
    failures = [c for c in result.candidates if c.reason_kind == "unit-failure"]
    assert failures
    assert all(c.trap_kind == "out-of-bounds" for c in failures)
    assert all(c.trap_function == "num_to_str" for c in failures)


def test_nothing_new_possible_means_no_candidates():
    """A branch-free callee with no reachable trap cannot yield candidates
    once its coverage is already known."""
    src = """
    int ident(int x) { return x; }
    int main() { print_int(ident(atoi(input()))); return 0; }
    """
    prog = parse_program(src)
    si = SystemInput.make(stdin="5")
    res = run_system(prog, si, tracing=True)
    put = parameterize(next(t for t in carve(res.trace, prog) if t.callee == "ident"),
                       si, prog.layouts)
    assert put.parameters
    fr = fuzz_unit(prog, put, 80, res.coverage, seed=21)
    assert fr.candidates == []


def test_injected_assert_found():
    src = """
    int guarded(int x) {
      assert(x < 1000);
      return x;
    }
    int main() { guarded(atoi(input())); return 0; }
    """
    prog = parse_program(src)
    si = SystemInput.make(stdin="5")
    res = run_system(prog, si, tracing=True)
    put = parameterize(next(t for t in carve(res.trace, prog) if t.callee == "guarded"),
                       si, prog.layouts)
    assert put.parameters
    fr = fuzz_unit(prog, put, 50, res.coverage, seed=11)
    kinds = {c.trap_kind for c in fr.candidates if c.reason_kind == "unit-failure"}
    assert "assert-fail" in kinds


def test_no_parameters_rejected(add_put):
    prog, put, covered = add_put
    from carvelift.parameterizer import ParameterizedUnitTest

    bare = ParameterizedUnitTest(put.base, [])
    with pytest.raises(ValueError, match="no parameters"):
        fuzz_unit(prog, bare, 10, covered, seed=0)


def test_setup_error_aborts_with_diagnostic(calc):
    from carvelift.memgraph import NodeBudget
    from carvelift.parameterizer import (
        InputSpan, ParamLocation, Parameter, ParameterizedUnitTest,
    )

    result = run_system(calc.program, SystemInput.make(stdin="1 + 2"), tracing=True,
                        node_budget=NodeBudget(max_nodes=0, max_bytes=0))
    add = next(t for t in carve(result.trace, calc.program) if t.callee == "add")
    assert add.setup_error
    fake_param = Parameter("p1", "int", ParamLocation("arg0"), 1, b"1",
                           InputSpan("stdin", 0, 1))
    broken = ParameterizedUnitTest(add, [fake_param])
    with pytest.raises(FuzzSetupError, match="truncated"):
        fuzz_unit(calc.program, broken, 10, CoverageMap(), seed=0)


def test_candidate_serialization_roundtrip(add_put, tmp_path):
    prog, put, covered = add_put
    result = fuzz_unit(prog, put, 60, covered, seed=13)
    path = tmp_path / "add.cand.jsonl"
    save_candidates(result.candidates, path)
    loaded = load_candidates(path)
    assert [candidate_to_json(c) for c in result.candidates] == [candidate_to_json(c) for c in loaded]


def test_sharded_execution_matches_sequential(add_put):
    prog, put, covered = add_put
    seq = fuzz_unit(prog, put, 20, covered, seed=9, workers=1)
    par = fuzz_unit(prog, put, 20, covered, seed=9, workers=2)
    assert [candidate_to_json(c) for c in seq.candidates] == [candidate_to_json(c) for c in par.candidates]
    assert seq.stats.outcomes == par.stats.outcomes

import pytest

from carvelift.carver import (
    VARIANT_FULL, VARIANT_ZTERM, carve, load_units, reachable_functions,
    reachable_globals, replay_matches, save_units, unit_to_json,
)
from carvelift.minic import SystemInput, parse_program, run_system, run_unit
from carvelift.minic.vm import callee_footprint

REACH_SRC = """
int unused_global;
int used_global;
char* label = "tag";

int h(int x) { return x + used_global; }
int g(int x) { return h(x); }
int f(int x) { return g(x); }
int lonely(int x) { return x + unused_global; }
int ping(int n) { if (n > 0) { return pong(n - 1); } return 0; }
int pong(int n) { if (n > 0) { return ping(n - 1); } return 0; }
int main() { f(1); ping(2); lonely(3); return 0; }
"""


@pytest.fixture(scope="module")
def reach_prog():
    return parse_program(REACH_SRC)


def test_reachable_functions_transitive(reach_prog):
    assert reachable_functions(reach_prog, "f") == {"f", "g", "h"}


def test_reachable_functions_no_calls(reach_prog):
    assert reachable_functions(reach_prog, "h") == {"h"}


def test_reachable_functions_mutual_recursion_terminates(reach_prog):
    assert reachable_functions(reach_prog, "ping") == {"ping", "pong"}


def test_reachable_globals_excludes_unreachable_reader(reach_prog):
    assert reachable_globals(reach_prog, "f") == {"used_global"}


def test_reachable_globals_store_in_self():
    prog = parse_program("int g; int w(int v) { g = v; return 0; } int main() { return w(1); }")
    assert reachable_globals(prog, "w") == {"g"}


def test_reachable_globals_empty():
    prog = parse_program("int f(int x) { return x; } int main() { return f(1); }")
    assert reachable_globals(prog, "f") == set()


# ---------------------------------------------------------------------------
# carve
# ---------------------------------------------------------------------------

def test_carve_one_test_per_event(calc, calc_trace):
    tests = carve(calc_trace.trace, calc.program)
    assert len(tests) == len(calc_trace.trace.events)


def test_carve_filter(calc, calc_trace):
    tests = carve(calc_trace.trace, calc.program, {"add"})
    assert [t.callee for t in tests] == ["add"]


def test_carve_main_only_program():
    prog = parse_program("int main() { print_str(input()); return 0; }")
    result = run_system(prog, SystemInput.make(stdin="hi"), tracing=True)
    tests = carve(result.trace, prog)
    assert [t.callee for t in tests] == ["main"]
    replal = run_unit(prog, tests[0])
    assert replal.output == "hi"


def test_carved_add_context_restricted_to_reachable(calc, calc_units):
    add = next(t for t in calc_units if t.callee == "add")
    # calc's globals are unreachable from add, so only the two arguments remain
    assert set(add.graph.roots) == {"arg0", "arg1"}
    assert len(add.graph.nodes) == 4


def test_replay_fidelity_all_units(calc, calc_units):
    for t in calc_units:
        if not t.setup_error:
            assert replay_matches(calc.program, t), t.id


def test_unit_serialization_roundtrip(calc, calc_units, tmp_path):
    path = tmp_path / "calc.unit.jsonl"
    save_units(calc_units, path)
    loaded = load_units(path)
    assert len(loaded) == len(calc_units)
    for a, b in zip(calc_units, loaded):
        assert unit_to_json(a) == unit_to_json(b)
    add = next(t for t in loaded if t.callee == "add")
    assert replay_matches(calc.program, add)


# ---------------------------------------------------------------------------
# string variants
# ---------------------------------------------------------------------------

VARIANT_SRC = """
int probe(char* s) {
  if (s[3] == 'x') { return 1; }
  return 0;
}
int main() {
  char* buf;
  buf = malloc(5);
  buf[0] = 'a';
  buf[1] = 'b';
  buf[2] = 0;
  buf[3] = 'x';
  buf[4] = 'y';
  probe(buf);
  return 0;
}
"""


def test_full_variant_wins_when_bytes_matter():
    """probe reads past the NUL, so only the full dump replays faithfully."""
    prog = parse_program(VARIANT_SRC)
    result = run_system(prog, SystemInput(()), tracing=True)
    probe = next(t for t in carve(result.trace, prog) if t.callee == "probe")
    assert probe.string_variant == VARIANT_FULL
    assert replay_matches(prog, probe)


ZTERM_SRC = """
int probe(char* s) { return strlen(s); }
int main() {
  char* buf;
  buf = malloc(5);
  buf[0] = 'a';
  buf[1] = 'b';
  buf[2] = 0;
  buf[3] = 'x';
  buf[4] = 'y';
  probe(buf);
  return 0;
}
"""


def test_zero_terminated_variant_preferred_on_tie():
    """probe only looks before the NUL: both variants replay, ties prefer
    the zero-terminated reading (and the node shrinks accordingly)."""
    prog = parse_program(ZTERM_SRC)
    result = run_system(prog, SystemInput(()), tracing=True)
    probe = next(t for t in carve(result.trace, prog) if t.callee == "probe")
    assert probe.string_variant == VARIANT_ZTERM
    node = probe.graph.nodes[probe.graph.roots["arg0"].node]
    assert node.data == b"ab\x00"
    assert replay_matches(prog, probe)


def test_truncated_event_becomes_setup_error(calc):
    from carvelift.memgraph import NodeBudget

    result = run_system(calc.program, SystemInput.make(stdin="1 + 2"), tracing=True,
                        node_budget=NodeBudget(max_nodes=0, max_bytes=0))
    tests = carve(result.trace, calc.program)
    add = next(t for t in tests if t.callee == "add")
    assert add.setup_error
    outcome = run_unit(calc.program, add)
    assert outcome.outcome.kind == "setup-error"
    assert not outcome.outcome.is_failure


def test_carve_count_matches_unfiltered_events(revlines):
    result = run_system(revlines.program, SystemInput.make(stdin="a\nbb\nccc"), tracing=True)
    tests = carve(result.trace, revlines.program)
    assert len(tests) == len(result.trace.events)
    for t in tests:
        assert replay_matches(revlines.program, t), t.id


def test_footprint_recorded_for_trapping_run(calc):
    result = run_system(calc.program, SystemInput.make(stdin="9999999999999 + 1"), tracing=True)
    assert result.outcome.trap_kind == "out-of-bounds"
    tests = carve(result.trace, calc.program, {"num_to_str"})
    bad = [t for t in tests if not replay_matches(calc.program, t)]
    assert bad == []
    last = tests[-1]
    replay = run_unit(calc.program, last)
    assert replay.outcome.trap_kind == "out-of-bounds"
    assert callee_footprint(replay, "num_to_str") == last.recorded_footprint

"""Carving: turn recorded invocations into replayable unit tests.

Each trace event becomes one unit test: a setup plan that rebuilds the
recorded context (reachable globals plus the heap graph) and a call to
the recorded function.  Teardown is implicit because every unit execution
gets a fresh, disposable VM.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field, replace

from .memgraph import Edge, MemoryGraph, Node, Root, SetupPlan, plan_reconstruction, trim_trailing_garbage
from .minic.syntax import CharT, Program
from .minic.values import SystemInput
from .minic.vm import callee_footprint, run_unit
from .tracer import Trace, TraceEvent, graph_from_json, graph_to_json, input_from_json, input_to_json

VARIANT_ZTERM = "zero-terminated"
VARIANT_FULL = "full"


@dataclass
class UnitTest:
    id: str
    callee: str
    graph: MemoryGraph
    setup: SetupPlan
    recorded_args: list[Root]
    origin: tuple[str, int]  # (trace id, event seq)
    string_variant: str
    recorded_footprint: set[tuple[int, str]] = field(default_factory=set)
    input: SystemInput = field(default_factory=lambda: SystemInput(()))
    setup_error: bool = False


# ---------------------------------------------------------------------------
# Reachability
# ---------------------------------------------------------------------------

def reachable_functions(program: Program, f: str, context: MemoryGraph | None = None) -> set[str]:
    """Least fixed point over the static call graph, seeded with f.

    The function-pointer clauses (a pointer to the function created in a
    reachable function, or present in the recorded context) are inert:
    MiniC has no function pointers.  `context` is accepted so they can be
    activated without changing call sites.
    """
    del context
    if f not in program.functions:
        raise KeyError(f"no function named {f!r}")
    seen = {f}
    work = deque([f])
    while work:
        fn = program.functions[work.popleft()]
        for callee in sorted(fn.callees):
            if callee not in seen:
                seen.add(callee)
                work.append(callee)
    return seen


def reachable_globals(program: Program, f: str, context: MemoryGraph | None = None) -> set[str]:
    """Globals loaded or stored in any function reachable from f."""
    out: set[str] = set()
    for fname in reachable_functions(program, f, context):
        out |= program.functions[fname].globals_touched
    return out


# ---------------------------------------------------------------------------
# Graph restriction and string variants
# ---------------------------------------------------------------------------

def restrict_graph(graph: MemoryGraph, keep_roots: list[str]) -> MemoryGraph:
    """Subgraph reachable from the kept roots, with canonical node ids."""
    out = MemoryGraph()
    remap: dict[int, int] = {}
    queue: deque[int] = deque()

    def visit(nid: int | None) -> int | None:
        if nid is None:
            return None
        if nid in remap:
            return remap[nid]
        remap[nid] = len(remap)
        queue.append(nid)
        return remap[nid]

    for name in keep_roots:
        root = graph.roots[name]
        if root.is_ref:
            out.roots[name] = replace(root, node=visit(root.node))
        else:
            out.roots[name] = root
    while queue:
        old = queue.popleft()
        node = graph.nodes[old]
        new = Node(remap[old], node.size, node.data, {}, node.origin, node.label,
                   node.global_name, node.ctype)
        out.nodes[new.nid] = new
        for off in sorted(node.edges):
            e = node.edges[off]
            new.edges[off] = Edge(visit(e.node), e.off)
    # order nodes by their new ids (visit() may interleave discovery)
    out.nodes = {nid: out.nodes[nid] for nid in sorted(out.nodes)}
    out.truncated = any(r.truncated for r in out.roots.values()) or any(
        e.node is None for n in out.nodes.values() for e in n.edges.values()
    )
    out.truncated_paths = list(graph.truncated_paths) if out.truncated else []
    return out


def zero_terminated_variant(graph: MemoryGraph) -> MemoryGraph | None:
    """The graph under the assumption that char runs end at their first
    zero byte; None when that reading changes nothing."""
    trimmed: dict[int, bytes] = {}
    for node in graph.nodes.values():
        if not isinstance(node.ctype, CharT) or node.edges or node.global_name:
            continue
        _, alt = trim_trailing_garbage(node.data)
        if alt is not None and len(alt) != node.size:
            trimmed[node.nid] = alt
    if not trimmed:
        return None
    out = MemoryGraph(truncated=graph.truncated, truncated_paths=list(graph.truncated_paths))
    for nid, node in graph.nodes.items():
        if nid in trimmed:
            data = trimmed[nid]
            out.nodes[nid] = Node(nid, len(data), data, dict(node.edges), node.origin,
                                  node.label, node.global_name, node.ctype)
        else:
            out.nodes[nid] = node
    out.roots = dict(graph.roots)
    return out


# ---------------------------------------------------------------------------
# Carving
# ---------------------------------------------------------------------------

def carve(trace: Trace, program: Program, function_filter: set[str] | None = None) -> list[UnitTest]:
    """One unit test per recorded invocation (optionally filtered by callee).

    Globals are restricted to those reachable from the callee.  When the
    zero-terminated reading of some char run differs from the full dump,
    both contexts are built and the one whose replay reproduces the
    recorded branch footprint wins; ties prefer the zero-terminated one.
    """
    tests: list[UnitTest] = []
    for ev in trace.events:
        if function_filter is not None and ev.callee not in function_filter:
            continue
        tests.append(_carve_event(trace, ev, program))
    return tests


def _carve_event(trace: Trace, ev: TraceEvent, program: Program) -> UnitTest:
    keep = [f"arg{i}" for i in range(len(ev.args))]
    keep += [g for g in ev.globals if g in reachable_globals(program, ev.callee)]
    full = restrict_graph(ev.graph, keep)
    test_id = f"{trace.trace_id}:{ev.seq}:{ev.callee}"

    def build(graph: MemoryGraph, variant: str) -> UnitTest:
        return UnitTest(
            id=test_id,
            callee=ev.callee,
            graph=graph,
            setup=plan_reconstruction(graph),
            recorded_args=[graph.roots[f"arg{i}"] for i in range(len(ev.args))],
            origin=(trace.trace_id, ev.seq),
            string_variant=variant,
            recorded_footprint=set(ev.footprint),
            input=trace.input,
            setup_error=graph.truncated,
        )

    zterm = zero_terminated_variant(full)
    if zterm is None:
        return build(full, VARIANT_ZTERM)
    candidate_z = build(zterm, VARIANT_ZTERM)
    candidate_f = build(full, VARIANT_FULL)
    if candidate_z.setup_error:
        return candidate_z
    if replay_matches(program, candidate_z):
        return candidate_z
    if replay_matches(program, candidate_f):
        return candidate_f
    return candidate_z


def replay_matches(program: Program, test: UnitTest) -> bool:
    """Replay fidelity: do the recorded arguments reproduce the recorded
    callee-local branch footprint exactly?"""
    result = run_unit(program, test)
    if result.outcome.kind == "setup-error":
        return False
    return callee_footprint(result, test.callee) == test.recorded_footprint


# ---------------------------------------------------------------------------
# Serialization (*.unit.jsonl)
# ---------------------------------------------------------------------------

def unit_to_json(test: UnitTest) -> dict:
    return {
        "id": test.id,
        "callee": test.callee,
        "origin": [test.origin[0], test.origin[1]],
        "variant": test.string_variant,
        "setup_error": 1 if test.setup_error else 0,
        "fp": sorted([i, arm] for i, arm in test.recorded_footprint),
        "input": input_to_json(test.input),
        "graph": graph_to_json(test.graph),
    }


def unit_from_json(d: dict) -> UnitTest:
    graph = graph_from_json(d["graph"])
    args = []
    i = 0
    while f"arg{i}" in graph.roots:
        args.append(graph.roots[f"arg{i}"])
        i += 1
    return UnitTest(
        id=d["id"],
        callee=d["callee"],
        graph=graph,
        setup=plan_reconstruction(graph),
        recorded_args=args,
        origin=(d["origin"][0], int(d["origin"][1])),
        string_variant=d["variant"],
        recorded_footprint={(int(i), arm) for i, arm in d["fp"]},
        input=input_from_json(d["input"]),
        setup_error=bool(d["setup_error"]),
    )


def save_units(tests: list[UnitTest], path):
    with open(path, "w") as fh:
        for t in tests:
            fh.write(json.dumps(unit_to_json(t), separators=(",", ":")) + "\n")


def load_units(path) -> list[UnitTest]:
    out = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                out.append(unit_from_json(json.loads(line)))
    return out

"""Execution traces: function-entry events and global-update records.

Traces are JSON Lines, one self-describing record per line, byte arrays
hex-encoded.  Record kinds: `start` (run metadata and the system input),
`call`, `global`, `end`.  The exact field list is frozen in
docs/trace-format.md; golden trace files diff cleanly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .memgraph import Edge, MemoryGraph, Node, NodeBudget, Root, snapshot
from .minic.memory import Memory
from .minic.syntax import Layouts, MiniType, type_from_str, type_to_str
from .minic.values import NULL, MiniValue, Ptr, SystemInput, bits_to_float, float_bits


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------

@dataclass
class TraceEvent:
    seq: int
    callee: str
    args: list[Root]  # views into graph.roots["arg0"], "arg1", ...
    globals: dict[str, Root]  # views into graph.roots[name]
    graph: MemoryGraph
    input_ref: str
    footprint: set[tuple[int, str]] = field(default_factory=set)


@dataclass
class GlobalUpdate:
    seq: int
    name: str
    graph: MemoryGraph  # single-root graph: roots == {name: new value or ref}

    @property
    def root(self) -> Root:
        return self.graph.roots[self.name]


@dataclass
class Trace:
    trace_id: str
    input: SystemInput
    events: list[TraceEvent] = field(default_factory=list)
    updates: list[GlobalUpdate] = field(default_factory=list)
    outcome: str = "?"


def fold_globals(updates: list[GlobalUpdate], at_seq: int,
                 initial: dict[str, tuple[Root, MemoryGraph | None]] | None = None,
                 ) -> dict[str, tuple[Root, MemoryGraph | None]]:
    """Last-writer-wins view of global values just before `at_seq`.

    `updates` must be sorted by seq; `initial` supplies initializer values
    for globals never written before that point.
    """
    out = dict(initial or {})
    for up in updates:
        if up.seq >= at_seq:
            break
        out[up.name] = (up.root, up.graph)
    return out


# ---------------------------------------------------------------------------
# Trace construction (driven by VM probes)
# ---------------------------------------------------------------------------

class TraceBuilder:
    def __init__(self, trace_id: str, sysinput: SystemInput, layouts: Layouts,
                 node_budget: NodeBudget | None = None):
        self.trace_id = trace_id
        self.input = sysinput
        self.layouts = layouts
        self.node_budget = node_budget or NodeBudget()
        self.seq = 0
        self.events: list[TraceEvent] = []
        self.updates: list[GlobalUpdate] = []

    def on_call(self, callee: str, arg_roots: list[tuple[str, MiniType, MiniValue]],
                global_roots: list[tuple[str, MiniType, MiniValue]], mem: Memory) -> set:
        graph = snapshot(mem, arg_roots + global_roots, self.layouts, self.node_budget)
        args = [graph.roots[name] for name, _, _ in arg_roots]
        gl = {name: graph.roots[name] for name, _, _ in global_roots}
        ev = TraceEvent(self.seq, callee, args, gl, graph, self.trace_id)
        self.seq += 1
        self.events.append(ev)
        return ev.footprint

    def on_global_store(self, name: str, ty: MiniType, value: MiniValue, mem: Memory):
        graph = snapshot(mem, [(name, ty, value)], self.layouts, self.node_budget)
        self.updates.append(GlobalUpdate(self.seq, name, graph))
        self.seq += 1

    def finish(self, outcome: str) -> Trace:
        return Trace(self.trace_id, self.input, self.events, self.updates, outcome)


# ---------------------------------------------------------------------------
# JSON codecs
# ---------------------------------------------------------------------------

def root_to_json(root: Root) -> dict:
    d: dict = {"t": type_to_str(root.type)}
    if root.truncated:
        d["trunc"] = 1
    elif root.is_ref:
        d["n"] = root.node
        d["o"] = root.off
    else:
        v = root.value
        if isinstance(v, Ptr):
            d["null"] = 1
        elif isinstance(v, float):
            d["b"] = f"{float_bits(v):016x}"
        else:
            d["v"] = int(v)
    return d


def root_from_json(d: dict) -> Root:
    ty = type_from_str(d["t"])
    if d.get("trunc"):
        return Root(ty, None, None, 0, truncated=True)
    if "n" in d:
        return Root(ty, None, d["n"], d.get("o", 0))
    if d.get("null"):
        return Root(ty, NULL)
    if "b" in d:
        return Root(ty, bits_to_float(int(d["b"], 16)))
    return Root(ty, int(d["v"]))


def graph_to_json(g: MemoryGraph) -> dict:
    nodes = []
    for n in g.nodes.values():
        nd: dict = {
            "id": n.nid,
            "size": n.size,
            "data": n.data.hex(),
            "origin": n.origin,
            "edges": [[off, e.node, e.off] for off, e in sorted(n.edges.items())],
        }
        if n.label is not None:
            nd["label"] = n.label
        if n.global_name is not None:
            nd["g"] = n.global_name
        if n.ctype is not None:
            nd["ct"] = type_to_str(n.ctype)
        nodes.append(nd)
    return {
        "nodes": nodes,
        "roots": [[name, root_to_json(r)] for name, r in g.roots.items()],
        "trunc": 1 if g.truncated else 0,
        "paths": list(g.truncated_paths),
    }


def graph_from_json(d: dict) -> MemoryGraph:
    g = MemoryGraph()
    for nd in d["nodes"]:
        node = Node(
            nd["id"], nd["size"], bytes.fromhex(nd["data"]),
            {off: Edge(tn, toff) for off, tn, toff in nd["edges"]},
            nd.get("origin", "heap"), nd.get("label"), nd.get("g"),
            type_from_str(nd["ct"]) if "ct" in nd else None,
        )
        g.nodes[node.nid] = node
    for name, rj in d["roots"]:
        g.roots[name] = root_from_json(rj)
    g.truncated = bool(d.get("trunc"))
    g.truncated_paths = list(d.get("paths", []))
    return g


def input_to_json(si: SystemInput) -> list:
    return [[name, content.hex()] for name, content in si.sources]


def input_from_json(obj: list) -> SystemInput:
    return SystemInput(tuple((name, bytes.fromhex(h)) for name, h in obj))


# ---------------------------------------------------------------------------
# Stream serialization
# ---------------------------------------------------------------------------

def serialize_trace(trace: Trace) -> bytes:
    if _is_empty(trace):
        return b""
    lines = [json.dumps({
        "k": "start", "id": trace.trace_id, "input": input_to_json(trace.input),
    }, separators=(",", ":"))]
    records: list[tuple[int, dict]] = []
    for ev in trace.events:
        records.append((ev.seq, {
            "k": "call", "seq": ev.seq, "callee": ev.callee,
            "graph": graph_to_json(ev.graph),
            "fp": sorted([idx, arm] for idx, arm in ev.footprint),
        }))
    for up in trace.updates:
        records.append((up.seq, {
            "k": "global", "seq": up.seq, "name": up.name, "graph": graph_to_json(up.graph),
        }))
    for _, rec in sorted(records, key=lambda t: t[0]):
        lines.append(json.dumps(rec, separators=(",", ":")))
    lines.append(json.dumps({"k": "end", "outcome": trace.outcome}, separators=(",", ":")))
    return ("\n".join(lines) + "\n").encode()


class TraceFormatError(Exception):
    def __init__(self, message: str, line: int):
        super().__init__(f"trace line {line}: {message}")
        self.line = line


def deserialize_trace(data: bytes | str) -> Trace:
    if isinstance(data, bytes):
        data = data.decode()
    trace: Trace | None = None
    for ln, raw in enumerate(data.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            rec = json.loads(raw)
        except json.JSONDecodeError as e:
            raise TraceFormatError(f"malformed JSON ({e.msg})", ln) from None
        kind = rec.get("k")
        try:
            if kind == "start":
                trace = Trace(rec["id"], input_from_json(rec["input"]))
            elif kind == "call":
                if trace is None:
                    raise TraceFormatError("call record before start record", ln)
                graph = graph_from_json(rec["graph"])
                args = []
                i = 0
                while f"arg{i}" in graph.roots:
                    args.append(graph.roots[f"arg{i}"])
                    i += 1
                gl = {name: r for name, r in graph.roots.items()
                      if not (name.startswith("arg") and name[3:].isdigit())}
                ev = TraceEvent(rec["seq"], rec["callee"], args, gl, graph, trace.trace_id,
                                {(idx, arm) for idx, arm in rec["fp"]})
                trace.events.append(ev)
            elif kind == "global":
                if trace is None:
                    raise TraceFormatError("global record before start record", ln)
                trace.updates.append(GlobalUpdate(rec["seq"], rec["name"], graph_from_json(rec["graph"])))
            elif kind == "end":
                if trace is None:
                    raise TraceFormatError("end record before start record", ln)
                trace.outcome = rec["outcome"]
            else:
                raise TraceFormatError(f"unknown record kind {kind!r}", ln)
        except TraceFormatError:
            raise
        except (KeyError, ValueError, TypeError) as e:
            raise TraceFormatError(f"bad {kind!r} record: {e}", ln) from None
    if trace is None:
        if data.strip():
            raise TraceFormatError("stream has records but no start record", 1)
        return _empty_trace()
    return trace


def _empty_trace() -> Trace:
    return Trace("<empty>", SystemInput(()))


def _is_empty(trace: Trace) -> bool:
    return (trace.trace_id == "<empty>" and not trace.input.sources
            and not trace.events and not trace.updates)


def load_trace(path) -> Trace:
    with open(path, "rb") as fh:
        return deserialize_trace(fh.read())


def save_trace(trace: Trace, path):
    with open(path, "wb") as fh:
        fh.write(serialize_trace(trace))

"""Turn recorded values that came straight from system input into parameters.

A recorded value becomes a parameter when its rendering occurs verbatim in
some input source: strings by substring, numbers by decimal representation.
The matched byte interval (the input span) is what lifting later edits.
Wrong attributions are cheap: the lifting stage filters them out.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field, replace

from .carver import UnitTest, VARIANT_ZTERM, unit_from_json, unit_to_json
from .memgraph import MemoryGraph, Node, Root
from .minic.syntax import ArrT, CharT, DoubleT, IntT, Layouts, MiniType, PtrT, RecT
from .minic.values import MiniValue, Ptr, SystemInput, wrap64, wrap8


@dataclass(frozen=True)
class InputSpan:
    source: str
    start: int
    end: int  # exclusive

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise ValueError(f"bad span [{self.start}, {self.end})")


@dataclass(frozen=True)
class ParamLocation:
    root: str  # 'arg<i>' or a global name
    node: int | None = None  # None: the root immediate itself
    offset: int = 0
    stype: str = "i"  # scalar encoding at the location: i / d / c / s (string)
    length: int | None = None  # byte capacity for inline char runs
    resizable: bool = False  # value is a whole, edge-free char node


@dataclass
class Parameter:
    slot: str
    kind: str  # 'int' | 'float' | 'string'
    location: ParamLocation
    original: MiniValue | bytes
    render: bytes  # rendering(original); equals the bytes at span
    span: InputSpan
    terminated: bool = False  # writeback appends a NUL byte
    int_form: bool = False  # float matched through its integer rendering


@dataclass
class ParameterizedUnitTest:
    base: UnitTest
    parameters: list[Parameter]

    @property
    def id(self) -> str:
        return self.base.id

    @property
    def callee(self) -> str:
        return self.base.callee

    def slots(self) -> list[str]:
        return [p.slot for p in self.parameters]

    def original_binding(self) -> dict[str, MiniValue | bytes]:
        return {p.slot: p.original for p in self.parameters}

    def materialize_graph(self, binding: dict[str, MiniValue | bytes]) -> MemoryGraph:
        """The base graph with every parameter slot rebound."""
        missing = [p.slot for p in self.parameters if p.slot not in binding]
        if missing:
            raise ValueError(f"binding misses slots {missing}")
        g = _copy_graph(self.base.graph)
        for p in self.parameters:
            _write_param(g, p, binding[p.slot])
        return g


# ---------------------------------------------------------------------------
# Renderings
# ---------------------------------------------------------------------------

def numeric_repr(v: MiniValue) -> str:
    """Canonical decimal text of a number.

    Ints render with no leading zeros and a leading '-' when negative.
    Doubles render as the shortest decimal string that parses back to the
    same binary64 (Python's repr guarantees this).
    """
    if isinstance(v, float):
        return repr(v)
    return str(int(v))


def numeric_match_keys(v: MiniValue) -> list[bytes]:
    """Renderings tried when searching the input; integral doubles also
    try their integer form."""
    keys = [numeric_repr(v).encode()]
    if isinstance(v, float) and math.isfinite(v) and v == int(v):
        keys.append(str(int(v)).encode())
    return keys


def render_value(p: Parameter, value: MiniValue | bytes) -> bytes:
    """Bytes spliced into the input when lifting `value` for parameter p."""
    if p.kind == "string":
        return bytes(value)
    if p.kind == "float":
        if p.int_form and isinstance(value, float) and math.isfinite(value) and value == int(value):
            return str(int(value)).encode()
        return numeric_repr(float(value)).encode()
    return str(wrap64(int(value))).encode()


# ---------------------------------------------------------------------------
# Matching
# ---------------------------------------------------------------------------

def match_value(value: MiniValue | bytes, kind: str, inputs: SystemInput) -> InputSpan | None:
    """Leftmost occurrence of the value's rendering, scanning sources in
    declaration order and comparing each source individually."""
    if kind == "string":
        keys = [bytes(value)] if value else []
    else:
        keys = numeric_match_keys(value)
    keys = [k for k in keys if k]
    if not keys:
        return None
    for source, content in inputs.sources:
        best = None
        for key in keys:
            pos = content.find(key)
            if pos >= 0 and (best is None or pos < best[0]):
                best = (pos, key)
        if best is not None:
            pos, key = best
            return InputSpan(source, pos, pos + len(key))
    return None


# ---------------------------------------------------------------------------
# Parameterization
# ---------------------------------------------------------------------------

@dataclass
class _Candidate:
    kind: str
    location: ParamLocation
    value: MiniValue | bytes
    terminated: bool = False


def parameterize(test: UnitTest, inputs: SystemInput, layouts: Layouts,
                 reachable: set[str] | None = None) -> ParameterizedUnitTest:
    """Traverse argument and reachable-global values (and the string nodes
    reachable from them); every value matched in the input becomes a
    parameter.  Overlapping spans keep the earlier-traversed parameter;
    unmatched values stay fixed."""
    if test.setup_error:
        raise ValueError(f"unit test {test.id} has a truncated context and cannot be parameterized")
    graph = test.graph
    zterm = test.string_variant == VARIANT_ZTERM
    candidates: list[_Candidate] = []
    visited: set[int] = set()

    def descend(nid: int, root_name: str):
        if nid in visited:
            return
        visited.add(nid)
        node = graph.nodes[nid]
        if isinstance(node.ctype, CharT) and not node.edges:
            content, terminated = _string_content(node.data, zterm)
            if content:
                candidates.append(_Candidate(
                    "string",
                    ParamLocation(root_name, nid, 0, "s", len(node.data), resizable=True),
                    content, terminated))
            return
        if node.ctype is None:
            _follow_edges(node, root_name)
            return
        esize = layouts.sizeof(node.ctype)
        if esize <= 0:
            return
        count = node.size // esize
        for k in range(count):
            _walk_typed(node, node.ctype, k * esize, root_name)

    def _follow_edges(node: Node, root_name: str):
        for off in sorted(node.edges):
            e = node.edges[off]
            if e.node is not None:
                descend(e.node, root_name)

    def _walk_typed(node: Node, ty: MiniType, off: int, root_name: str):
        if off >= node.size:
            return
        if isinstance(ty, IntT):
            if off + 8 <= node.size and off not in node.edges:
                v = struct.unpack_from("<q", node.data, off)[0]
                candidates.append(_Candidate("int", ParamLocation(root_name, node.nid, off, "i"), v))
        elif isinstance(ty, DoubleT):
            if off + 8 <= node.size and off not in node.edges:
                v = struct.unpack_from("<d", node.data, off)[0]
                candidates.append(_Candidate("float", ParamLocation(root_name, node.nid, off, "d"), v))
        elif isinstance(ty, CharT):
            candidates.append(_Candidate("int", ParamLocation(root_name, node.nid, off, "c"), node.data[off]))
        elif isinstance(ty, PtrT):
            e = node.edges.get(off)
            if e is not None and e.node is not None:
                descend(e.node, root_name)
        elif isinstance(ty, ArrT):
            if isinstance(ty.elem, CharT):
                run = node.data[off:off + ty.length]
                content, _ = _string_content(run, zterm)
                if content:
                    candidates.append(_Candidate(
                        "string", ParamLocation(root_name, node.nid, off, "s", ty.length), content))
            else:
                esz = layouts.sizeof(ty.elem)
                for k in range(ty.length):
                    _walk_typed(node, ty.elem, off + k * esz, root_name)
        elif isinstance(ty, RecT):
            for slot in layouts.get(ty.name).fields:
                _walk_typed(node, slot.type, off + slot.offset, root_name)

    def take_root(name: str, root: Root):
        if root.truncated:
            return
        if root.is_ref:
            descend(root.node, name)
            return
        v = root.value
        if isinstance(v, Ptr):
            return  # null pointers: nothing to match
        if isinstance(root.type, DoubleT):
            candidates.append(_Candidate("float", ParamLocation(name, None, 0, "d"), v))
        elif isinstance(root.type, CharT):
            candidates.append(_Candidate("int", ParamLocation(name, None, 0, "c"), v))
        else:
            candidates.append(_Candidate("int", ParamLocation(name, None, 0, "i"), v))

    for i in range(len(test.recorded_args)):
        take_root(f"arg{i}", graph.roots[f"arg{i}"])
    for name, root in graph.roots.items():
        if name.startswith("arg") and name[3:].isdigit():
            continue
        if reachable is not None and name not in reachable:
            continue
        take_root(name, root)

    claimed: dict[str, list[InputSpan]] = {}
    params: list[Parameter] = []
    for cand in candidates:
        span = match_value(cand.value, cand.kind, inputs)
        if span is None:
            continue
        if any(s.start < span.end and span.start < s.end for s in claimed.get(span.source, [])):
            continue  # keep the earlier-traversed parameter, skip this one
        claimed.setdefault(span.source, []).append(span)
        slot = f"p{len(params) + 1}"
        if cand.kind == "string":
            params.append(Parameter(slot, "string", cand.location, bytes(cand.value),
                                    bytes(cand.value), span, terminated=cand.terminated))
        else:
            int_form = (cand.kind == "float"
                        and inputs.get(span.source)[span.start:span.end] != numeric_repr(cand.value).encode())
            p = Parameter(slot, cand.kind, cand.location, cand.value, b"", span, int_form=int_form)
            p.render = render_value(p, cand.value)
            params.append(p)
    return ParameterizedUnitTest(test, params)


def _string_content(data: bytes, zterm: bool) -> tuple[bytes, bool]:
    """Match key of a char run and whether writeback should re-terminate."""
    if zterm:
        idx = data.find(b"\x00")
        if idx >= 0:
            return data[:idx], True
    return data, False


# ---------------------------------------------------------------------------
# Binding application
# ---------------------------------------------------------------------------

def _copy_graph(g: MemoryGraph) -> MemoryGraph:
    out = MemoryGraph(truncated=g.truncated, truncated_paths=list(g.truncated_paths))
    for nid, n in g.nodes.items():
        out.nodes[nid] = Node(n.nid, n.size, n.data, dict(n.edges), n.origin, n.label,
                              n.global_name, n.ctype)
    out.roots = dict(g.roots)
    return out


def _write_param(g: MemoryGraph, p: Parameter, value: MiniValue | bytes):
    loc = p.location
    if loc.node is None:
        root = g.roots[loc.root]
        if loc.stype == "d":
            g.roots[loc.root] = replace(root, value=float(value))
        elif loc.stype == "c":
            g.roots[loc.root] = replace(root, value=wrap8(int(value)))
        else:
            g.roots[loc.root] = replace(root, value=wrap64(int(value)))
        return
    node = g.nodes[loc.node]
    if loc.stype == "s":
        new = bytes(value)
        if loc.resizable:
            data = new + (b"\x00" if p.terminated else b"")
            g.nodes[loc.node] = Node(node.nid, len(data), data, dict(node.edges), node.origin,
                                     node.label, node.global_name, node.ctype)
        else:
            cap = loc.length
            run = new[:cap] + b"\x00" * max(0, cap - len(new))
            data = bytearray(node.data)
            data[loc.offset:loc.offset + cap] = run
            g.nodes[loc.node] = replace(node, data=bytes(data))
        return
    data = bytearray(node.data)
    if loc.stype == "d":
        struct.pack_into("<d", data, loc.offset, float(value))
    elif loc.stype == "c":
        data[loc.offset] = wrap8(int(value))
    else:
        struct.pack_into("<q", data, loc.offset, wrap64(int(value)))
    g.nodes[loc.node] = replace(node, data=bytes(data))


# ---------------------------------------------------------------------------
# Serialization (*.put.jsonl)
# ---------------------------------------------------------------------------

def param_to_json(p: Parameter) -> dict:
    loc = p.location
    d = {
        "slot": p.slot,
        "kind": p.kind,
        "loc": {"root": loc.root, "node": loc.node, "off": loc.offset, "st": loc.stype,
                "len": loc.length, "rs": 1 if loc.resizable else 0},
        "span": [p.span.source, p.span.start, p.span.end],
        "render": p.render.hex(),
        "term": 1 if p.terminated else 0,
        "intform": 1 if p.int_form else 0,
    }
    if p.kind == "string":
        d["orig"] = {"s": bytes(p.original).hex()}
    elif p.kind == "float":
        d["orig"] = {"b": f"{struct.unpack('<Q', struct.pack('<d', p.original))[0]:016x}"}
    else:
        d["orig"] = {"v": int(p.original)}
    return d


def param_from_json(d: dict) -> Parameter:
    loc = d["loc"]
    orig = d["orig"]
    if "s" in orig:
        original: MiniValue | bytes = bytes.fromhex(orig["s"])
    elif "b" in orig:
        original = struct.unpack("<d", struct.pack("<Q", int(orig["b"], 16)))[0]
    else:
        original = int(orig["v"])
    return Parameter(
        d["slot"], d["kind"],
        ParamLocation(loc["root"], loc["node"], loc["off"], loc["st"], loc["len"], bool(loc["rs"])),
        original, bytes.fromhex(d["render"]),
        InputSpan(d["span"][0], d["span"][1], d["span"][2]),
        terminated=bool(d["term"]), int_form=bool(d["intform"]),
    )


def put_to_json(t: ParameterizedUnitTest) -> dict:
    return {"unit": unit_to_json(t.base), "params": [param_to_json(p) for p in t.parameters]}


def put_from_json(d: dict) -> ParameterizedUnitTest:
    return ParameterizedUnitTest(unit_from_json(d["unit"]), [param_from_json(p) for p in d["params"]])


def save_puts(tests: list[ParameterizedUnitTest], path):
    with open(path, "w") as fh:
        for t in tests:
            fh.write(json.dumps(put_to_json(t), separators=(",", ":")) + "\n")


def load_puts(path) -> list[ParameterizedUnitTest]:
    out = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                out.append(put_from_json(json.loads(line)))
    return out

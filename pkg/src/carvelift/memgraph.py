"""Heap snapshots and their reconstruction.

A snapshot walks the segments reachable from a set of typed roots
(function arguments and globals) and freezes them into a MemoryGraph:
one node per reached segment, pointer slots as edges.  A SetupPlan
replays such a graph into a fresh memory: allocate everything, write
bytes, then patch pointers, so cycles need no special treatment.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .minic.errors import SetupFailure
from .minic.memory import Memory
from .minic.syntax import ArrT, Layouts, MiniType, PtrT, RecT
from .minic.values import NULL, MiniValue, Ptr


# ---------------------------------------------------------------------------
# The pointer-length segment map
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SegmentInfo:
    length: int
    origin: str  # 'stack' | 'heap' | 'static'
    live: bool


@dataclass
class SegmentMap:
    """Pointer-length map: what every live (or freed) segment id measures."""

    entries: dict[int, SegmentInfo]

    @staticmethod
    def from_memory(mem: Memory) -> "SegmentMap":
        return SegmentMap({sid: SegmentInfo(seg.size, seg.origin, seg.live) for sid, seg in mem.segments.items()})


class SegmentLookupError(Exception):
    """The segment id was never allocated; signals an instrumentation bug."""


class DeadSegmentSignal(Exception):
    """The segment was explicitly freed; a use-after-free signal."""


def segment_lookup(segmap: SegmentMap, ptr: Ptr) -> tuple[int, int]:
    """Return (segment id, remaining bytes from ptr's offset to segment end).

    A pointer one past the end is legal to hold and yields remaining 0.
    """
    if ptr.is_null:
        raise ValueError("segment_lookup requires a non-null pointer")
    info = segmap.entries.get(ptr.seg)
    if info is None:
        raise SegmentLookupError(f"segment {ptr.seg} unknown to the map")
    if not info.live:
        raise DeadSegmentSignal(f"segment {ptr.seg} is freed")
    remaining = info.length - ptr.off
    if remaining < 0:
        raise SegmentLookupError(f"offset {ptr.off} beyond segment {ptr.seg} of length {info.length}")
    return ptr.seg, remaining


# ---------------------------------------------------------------------------
# Memory graphs
# ---------------------------------------------------------------------------

@dataclass
class NodeBudget:
    max_nodes: int = 4096
    max_bytes: int = 65536


@dataclass(frozen=True)
class Edge:
    node: int | None  # None: the target was not dumped (budget hit)
    off: int


@dataclass
class Node:
    nid: int
    size: int
    data: bytes
    edges: dict[int, Edge] = field(default_factory=dict)
    origin: str = "heap"
    label: str | None = None
    global_name: str | None = None  # set when this node is a global's own storage
    ctype: MiniType | None = None  # element type seen through the first pointer


@dataclass
class Root:
    """A named entry point: an immediate value or a reference into the graph."""

    type: MiniType
    value: MiniValue | None = None  # immediates and null pointers
    node: int | None = None  # in-graph pointer target
    off: int = 0
    truncated: bool = False

    @property
    def is_ref(self) -> bool:
        return self.node is not None


@dataclass
class MemoryGraph:
    nodes: dict[int, Node] = field(default_factory=dict)
    roots: dict[str, Root] = field(default_factory=dict)
    truncated: bool = False
    truncated_paths: list[str] = field(default_factory=list)

    def total_bytes(self) -> int:
        return sum(n.size for n in self.nodes.values())


def element_type_at(ctype: MiniType | None, off: int, layouts: Layouts) -> MiniType | None:
    """Static type at byte offset `off` of a segment tiled with `ctype` elements."""
    if ctype is None:
        return None
    size = layouts.sizeof(ctype)
    if size <= 0:
        return None
    t: MiniType = ctype
    k = off % size
    while True:
        if isinstance(t, RecT):
            layout = layouts.get(t.name)
            for slot in reversed(layout.fields):
                if slot.offset <= k:
                    k -= slot.offset
                    t = slot.type
                    break
            else:
                return None
            continue
        if isinstance(t, ArrT):
            esz = layouts.sizeof(t.elem)
            k %= esz
            t = t.elem
            continue
        return t if k == 0 else None


def snapshot(mem: Memory, roots: list[tuple[str, MiniType, MiniValue]], layouts: Layouts,
             budget: NodeBudget | None = None) -> MemoryGraph:
    """Freeze everything reachable from `roots` into a MemoryGraph.

    Traversal is breadth-first from the roots in order, following pointer
    slots in offset order, so node ids (and the truncation point, if the
    budget is exceeded) are deterministic.  A pointed-to segment is dumped
    whole, once; interior pointers become (node, offset) edges.
    """
    budget = budget or NodeBudget()
    g = MemoryGraph()
    seen: dict[int, int] = {}  # sid -> nid
    bytes_used = 0
    queue: deque[tuple[int, int, str]] = deque()  # (sid, nid, path)

    def discover(sid: int, hint: MiniType | None, path: str) -> int | None:
        nonlocal bytes_used
        if sid in seen:
            return seen[sid]
        seg = mem.segments[sid]
        if len(g.nodes) >= budget.max_nodes or bytes_used + seg.size > budget.max_bytes:
            g.truncated = True
            g.truncated_paths.append(path)
            return None
        nid = len(g.nodes)
        is_global = seg.origin == "static" and seg.label is not None and not seg.label.startswith("<")
        g.nodes[nid] = Node(nid, seg.size, bytes(seg.data), {}, seg.origin, seg.label,
                            seg.label if is_global else None, hint)
        seen[sid] = nid
        bytes_used += seg.size
        queue.append((sid, nid, path))
        return nid

    for name, ty, value in roots:
        if isinstance(value, Ptr) and not value.is_null:
            pointee = ty.pointee if isinstance(ty, PtrT) else None
            nid = discover(value.seg, pointee, name)
            g.roots[name] = Root(ty, None, nid, value.off, truncated=nid is None)
        else:
            g.roots[name] = Root(ty, value)

    while queue:
        sid, nid, path = queue.popleft()
        node = g.nodes[nid]
        seg = mem.segments[sid]
        for off in sorted(seg.ptrs):
            target = seg.ptrs[off]
            slot_ty = element_type_at(node.ctype, off, layouts)
            hint = slot_ty.pointee if isinstance(slot_ty, PtrT) else None
            tnid = discover(target.seg, hint, f"{path}+{off}")
            node.edges[off] = Edge(tnid, target.off)

    return g


def trim_trailing_garbage(data: bytes) -> tuple[bytes, bytes | None]:
    """Offer the two readings of a dumped char run.

    The primary reading is the full byte run: termination is a convention,
    not a rule, and data may hide behind a zero byte.  The alternative,
    offered only when a zero byte exists, keeps the prefix up to and
    including the first zero, shedding whatever trails it.
    """
    idx = data.find(b"\x00")
    if idx < 0:
        return data, None
    return data, data[:idx + 1]


# ---------------------------------------------------------------------------
# Setup plans
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Allocate:
    nid: int
    size: int


@dataclass(frozen=True)
class WriteBytes:
    nid: int
    off: int
    data: bytes


@dataclass(frozen=True)
class WritePtr:
    nid: int
    off: int
    target: int
    target_off: int


@dataclass(frozen=True)
class SetGlobal:
    name: str
    root: Root


@dataclass(frozen=True)
class BindArg:
    position: int
    root: Root


Instruction = Allocate | WriteBytes | WritePtr | SetGlobal | BindArg


@dataclass
class SetupPlan:
    instructions: list[Instruction]
    truncated: bool = False


def plan_reconstruction(graph: MemoryGraph) -> SetupPlan:
    """Turn a graph into a two-pass plan: allocate all nodes, then patch.

    Nodes that are a global's own storage are not allocated; the executor
    binds them to the fresh VM's global segments.  Plans for truncated
    graphs carry the truncation marker and refuse to execute.
    """
    ins: list[Instruction] = []
    for node in graph.nodes.values():
        if node.global_name is None:
            ins.append(Allocate(node.nid, node.size))
    for node in graph.nodes.values():
        if node.size and any(node.data):
            ins.append(WriteBytes(node.nid, 0, node.data))
    for node in graph.nodes.values():
        for off in sorted(node.edges):
            edge = node.edges[off]
            if edge.node is not None:
                ins.append(WritePtr(node.nid, off, edge.node, edge.off))
    for name, root in graph.roots.items():
        if name.startswith("arg") and name[3:].isdigit():
            ins.append(BindArg(int(name[3:]), root))
        else:
            ins.append(SetGlobal(name, root))
    return SetupPlan(ins, graph.truncated)


@dataclass
class PlanResult:
    args: dict[int, MiniValue]
    global_values: dict[str, MiniValue]
    sidmap: dict[int, int]  # nid -> segment id in the target memory


def execute_plan(plan: SetupPlan, mem: Memory,
                 global_segs: dict[str, int] | None = None) -> PlanResult:
    """Replay a SetupPlan into `mem`.

    `global_segs` maps global names to their existing storage segments;
    global-bound nodes reuse those instead of allocating.  Reconstructed
    segments are heap allocations regardless of their recorded origin (a
    unit test cannot recreate someone else's stack frame).
    """
    if plan.truncated:
        raise SetupFailure("setup plan comes from a truncated memory graph")
    global_segs = global_segs or {}
    sidmap: dict[int, int] = {}

    # pass 1: allocate every planned node
    for instr in plan.instructions:
        if isinstance(instr, Allocate):
            sidmap[instr.nid] = mem.alloc(instr.size, "heap")

    # global storage nodes were not allocated; resolve them now
    for instr in plan.instructions:
        if isinstance(instr, (WriteBytes, WritePtr)) and instr.nid not in sidmap:
            _bind_global_node(instr.nid, plan, sidmap, global_segs)

    def resolve(root: Root) -> MiniValue:
        if root.truncated:
            raise SetupFailure("root references a truncated graph region")
        if root.is_ref:
            if root.node not in sidmap:
                _bind_global_node(root.node, plan, sidmap, global_segs)
            return Ptr(sidmap[root.node], root.off)
        return root.value if root.value is not None else NULL

    # pass 2: bytes first, then pointer patches
    for instr in plan.instructions:
        if isinstance(instr, WriteBytes):
            mem.write_bytes_raw(sidmap[instr.nid], instr.off, instr.data)
    for instr in plan.instructions:
        if isinstance(instr, WritePtr):
            if instr.target not in sidmap:
                _bind_global_node(instr.target, plan, sidmap, global_segs)
            mem.write_ptr_raw(sidmap[instr.nid], instr.off, Ptr(sidmap[instr.target], instr.target_off))

    args: dict[int, MiniValue] = {}
    global_values: dict[str, MiniValue] = {}
    for instr in plan.instructions:
        if isinstance(instr, BindArg):
            args[instr.position] = resolve(instr.root)
        elif isinstance(instr, SetGlobal):
            value = resolve(instr.root)
            # storage-bound aggregate: the node write already populated it
            if instr.root.is_ref and global_segs.get(instr.name) == sidmap.get(instr.root.node):
                continue
            global_values[instr.name] = value
    return PlanResult(args, global_values, sidmap)


def _bind_global_node(nid: int, plan: SetupPlan, sidmap: dict[int, int], global_segs: dict[str, int]):
    for instr in plan.instructions:
        if isinstance(instr, SetGlobal) and instr.root.is_ref and instr.root.node == nid:
            if instr.name in global_segs:
                sidmap[nid] = global_segs[instr.name]
                return
    raise SetupFailure(f"plan references node {nid} that is neither allocated nor a known global")


# ---------------------------------------------------------------------------
# Structural comparison (round-trip oracle support)
# ---------------------------------------------------------------------------

def graph_signature(g: MemoryGraph, with_types: bool = True):
    """Canonical structure-and-bytes signature; node ids are already canonical
    because traversal order is deterministic, so equal signatures mean
    isomorphic graphs."""
    from .minic.syntax import type_to_str

    def root_sig(name, r: Root):
        if r.is_ref or r.truncated:
            return (name, type_to_str(r.type) if with_types else "", r.node, r.off, r.truncated)
        v = r.value
        if isinstance(v, Ptr):
            v = ("null",) if v.is_null else ("ptr", v.seg, v.off)
        return (name, type_to_str(r.type) if with_types else "", v)

    nodes = tuple(
        (n.nid, n.size, bytes(n.data), tuple((off, e.node, e.off) for off, e in sorted(n.edges.items())),
         n.global_name)
        for n in g.nodes.values()
    )
    roots = tuple(root_sig(name, r) for name, r in g.roots.items())
    return (roots, nodes, g.truncated)


def roots_after_execution(graph: MemoryGraph, result: PlanResult) -> list[tuple[str, MiniType, MiniValue]]:
    """Reconstructed root values, suitable for re-snapshotting the new memory."""
    out = []
    for name, root in graph.roots.items():
        if root.is_ref:
            out.append((name, root.type, Ptr(result.sidmap[root.node], root.off)))
        else:
            out.append((name, root.type, root.value if root.value is not None else NULL))
    return out

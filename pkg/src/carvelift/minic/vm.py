"""The MiniC interpreter: deterministic execution with branch coverage,
allocation tracking, invocation probes, and simulated-heap safety checks.

Pointers are (segment, offset) pairs and every access is checked against
the segment table, so no simulated access can corrupt interpreter state;
faults become trap outcomes.  Given (program, input, limits) execution is
bit-identical across runs: allocation ids, coverage, traces, and output.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from .errors import SetupFailure, StepLimitExceeded, Trap
from .memory import Memory
from .parser import parse_program  # re-exported as part of the module surface
from .syntax import (
    AddrOf, ArrT, AssignStmt, Binary, Call, CharLit, CharT, DeclStmt, Deref,
    DoubleT, Expr, ExprStmt, FieldAccess, FloatLit, IfStmt, Index, IntLit,
    IntT, MiniType, NullLit, Program, PtrT, RecT, ReturnStmt, SizeofExpr,
    StrLit, Unary, VarRef, WhileStmt,
)
from .values import (
    NULL, MiniValue, Ptr, SystemInput, double_to_int, trunc_div, trunc_mod,
    wrap64, wrap8,
)

if TYPE_CHECKING:
    from ..memgraph import NodeBudget
    from ..tracer import Trace

__all__ = [
    "BranchId", "CoverageMap", "Limits", "Outcome", "RunResult",
    "parse_program", "run_system", "run_unit",
]

BranchId = tuple[str, int, str]  # (function, conditional index, 'then' | 'else')

MALLOC_CAP = 1 << 24  # larger requests report allocation failure (null), like a full heap


def branch_key(bid: BranchId) -> str:
    return f"{bid[0]}:{bid[1]}:{bid[2]}"


def branch_from_key(key: str) -> BranchId:
    fn, idx, arm = key.rsplit(":", 2)
    return (fn, int(idx), arm)


@dataclass
class CoverageMap:
    """Branch execution counts; merging is pointwise sum."""

    counts: dict[BranchId, int] = field(default_factory=dict)

    def add(self, bid: BranchId, n: int = 1):
        self.counts[bid] = self.counts.get(bid, 0) + n

    def merge(self, other: "CoverageMap"):
        for bid, n in other.counts.items():
            self.counts[bid] = self.counts.get(bid, 0) + n

    def covered(self, bid: BranchId) -> bool:
        return self.counts.get(bid, 0) > 0

    def branches(self) -> set[BranchId]:
        return set(self.counts)

    def new_against(self, base: "CoverageMap") -> set[BranchId]:
        return {bid for bid in self.counts if bid not in base.counts}

    def copy(self) -> "CoverageMap":
        return CoverageMap(dict(self.counts))

    def to_json(self) -> dict[str, int]:
        return {branch_key(bid): n for bid, n in sorted(self.counts.items())}

    @staticmethod
    def from_json(d: dict[str, int]) -> "CoverageMap":
        return CoverageMap({branch_from_key(k): int(n) for k, n in d.items()})


@dataclass
class Outcome:
    kind: str  # 'ok' | 'trap' | 'step-limit' | 'setup-error'
    exit_value: int | None = None
    trap_kind: str | None = None
    trap_function: str | None = None
    detail: str = ""

    @property
    def is_failure(self) -> bool:
        # traps (including failed asserts) are failures; an exhausted step
        # budget or a failed reconstruction is a harness artifact, never a failure
        return self.kind == "trap"

    def summary(self) -> str:
        if self.kind == "ok":
            return f"ok:{self.exit_value}"
        if self.kind == "trap":
            return f"trap:{self.trap_kind}@{self.trap_function}"
        return self.kind

    @staticmethod
    def ok(value: int) -> "Outcome":
        return Outcome("ok", exit_value=value)


@dataclass
class RunResult:
    outcome: Outcome
    coverage: CoverageMap
    trace: "Trace | None"
    output: str
    calls: dict[str, int] = field(default_factory=dict)  # function entry counts
    func_steps: dict[str, int] = field(default_factory=dict)  # exclusive steps per function
    steps: int = 0


@dataclass
class Limits:
    step_budget: int = 2_000_000
    call_depth: int = 200

    def __post_init__(self):
        if self.step_budget <= 0:
            raise ValueError("step budget must be positive")


DEFAULT_SYSTEM_LIMITS = Limits()
DEFAULT_UNIT_LIMITS = Limits(step_budget=500_000)

_RETURN = 0  # signal tag


class VM:
    """One confined, single-threaded execution of a MiniC program."""

    def __init__(self, program: Program, sysinput: SystemInput, limits: Limits,
                 trace_builder=None):
        if sys.getrecursionlimit() < 40_000:
            sys.setrecursionlimit(40_000)
        self.prog = program
        self.layouts = program.layouts
        self.input = sysinput
        self.limits = limits
        self.tracer = trace_builder
        self.mem = Memory()
        self.steps = 0
        self.coverage = CoverageMap()
        self.calls: dict[str, int] = {}
        self.func_steps: dict[str, int] = {}
        self.out: list[str] = []
        self.call_stack: list[str] = []
        self._collectors: list[tuple[str, set]] = []

        # deterministic boot order: literals, globals, stdin, argv
        self.literal_sids = [
            self.mem.alloc(len(lit) + 1, "static", "<lit>", lit + b"\x00")
            for lit in program.string_literals
        ]
        self.global_segs: dict[str, int] = {}
        for name, g in program.globals.items():
            sid = self.mem.alloc(self.layouts.sizeof(g.decl_type), "static", name)
            self.global_segs[name] = sid
            if g.init is not None:
                self.mem.write(Ptr(sid, 0), g.decl_type, self._literal_value(g.init, g.decl_type), "<init>")
        stdin = sysinput.stdin
        self.stdin_ptr = NULL
        if stdin is not None:
            self.stdin_ptr = Ptr(self.mem.alloc(len(stdin) + 1, "static", "<stdin>", stdin + b"\x00"), 0)
        self.arg_ptrs: list[Ptr] = []
        for name in sysinput.arg_names():
            content = sysinput.get(name)
            self.arg_ptrs.append(Ptr(self.mem.alloc(len(content) + 1, "static", f"<{name}>", content + b"\x00"), 0))

    def _literal_value(self, lit, ty: MiniType) -> MiniValue:
        if isinstance(lit, StrLit):
            return Ptr(self.literal_sids[lit.literal_index], 0)
        if isinstance(lit, NullLit):
            return NULL
        return coerce(lit.value, ty)

    # -- bookkeeping ----------------------------------------------------------

    def tick(self):
        self.steps += 1
        if self.steps > self.limits.step_budget:
            raise StepLimitExceeded()
        if self.call_stack:
            fn = self.call_stack[-1]
            self.func_steps[fn] = self.func_steps.get(fn, 0) + 1

    def record_branch(self, func: str, idx: int, taken: bool):
        arm = "then" if taken else "else"
        self.coverage.add((func, idx, arm))
        for fname, fp in self._collectors:
            if fname == func:
                fp.add((idx, arm))

    def current_function(self) -> str:
        return self.call_stack[-1] if self.call_stack else "<boot>"

    def global_root_entry(self, name: str) -> tuple[str, MiniType, MiniValue]:
        """A global as a snapshot root: scalars by value, aggregates by
        reference to their own storage."""
        ty = self.prog.globals[name].decl_type
        sid = self.global_segs[name]
        if isinstance(ty, (RecT, ArrT)):
            return (name, PtrT(ty), Ptr(sid, 0))
        return (name, ty, self.mem.read(Ptr(sid, 0), ty))

    def all_global_roots(self) -> list[tuple[str, MiniType, MiniValue]]:
        return [self.global_root_entry(name) for name in self.prog.globals]

    # -- calls ---------------------------------------------------------------

    def call_user(self, fname: str, argvals: list[MiniValue]) -> MiniValue:
        fn = self.prog.functions[fname]
        if len(self.call_stack) >= self.limits.call_depth:
            raise Trap("stack-overflow", fname, f"call depth {self.limits.call_depth} exceeded")
        if len(argvals) != len(fn.params):
            raise SetupFailure(f"{fname} expects {len(fn.params)} arguments, got {len(argvals)}")
        self.calls[fname] = self.calls.get(fname, 0) + 1
        self.call_stack.append(fname)
        frame: dict[str, tuple[int, MiniType]] = {}
        frame_sids: list[int] = []
        try:
            for vname, vty in fn.frame_vars:
                sid = self.mem.alloc(self.layouts.sizeof(vty), "stack", f"<{fname}.{vname}>")
                frame[vname] = (sid, vty)
                frame_sids.append(sid)
            coerced = [coerce(v, pty) for v, (_, pty) in zip(argvals, fn.params)]
            for (pname, pty), v in zip(fn.params, coerced):
                self.mem.write(Ptr(frame[pname][0], 0), pty, v, fname)
            if self.tracer is not None:
                arg_roots = [(f"arg{i}", pty, v) for i, ((_, pty), v) in enumerate(zip(fn.params, coerced))]
                fp = self.tracer.on_call(fname, arg_roots, self.all_global_roots(), self.mem)
                self._collectors.append((fname, fp))
            try:
                sig = self.exec_block(fn.body, frame)
                ret = sig[1] if sig is not None else _zero(fn.return_type)
                return coerce(ret, fn.return_type)
            finally:
                if self.tracer is not None:
                    self._collectors.pop()
        finally:
            for sid in frame_sids:
                self.mem.kill(sid)
            self.call_stack.pop()

    # -- statements ------------------------------------------------------------

    def exec_block(self, body, frame):
        for st in body:
            sig = self.exec_stmt(st, frame)
            if sig is not None:
                return sig
        return None

    def exec_stmt(self, st, frame):
        self.tick()
        cls = type(st)
        if cls is AssignStmt:
            ptr, ty = self.eval_lvalue(st.target, frame)
            value = coerce(self.eval(st.value, frame), ty)
            self.mem.write(ptr, ty, value, self.current_function())
            if self.tracer is not None:
                gname = _lvalue_root_global(st.target, self.prog)
                if gname is not None:
                    self.tracer.on_global_store(gname, *self.global_root_entry(gname)[1:], self.mem)
            return None
        if cls is ExprStmt:
            self.eval(st.expr, frame)
            return None
        if cls is IfStmt:
            taken = truthy(self.eval(st.cond, frame))
            self.record_branch(self.current_function(), st.cond_index, taken)
            return self.exec_block(st.then_body if taken else st.else_body, frame)
        if cls is WhileStmt:
            func = self.current_function()
            while True:
                self.tick()
                taken = truthy(self.eval(st.cond, frame))
                self.record_branch(func, st.cond_index, taken)
                if not taken:
                    return None
                sig = self.exec_block(st.body, frame)
                if sig is not None:
                    return sig
        if cls is DeclStmt:
            if st.init is not None:
                sid, ty = frame[st.name]
                value = coerce(self.eval(st.init, frame), ty)
                self.mem.write(Ptr(sid, 0), ty, value, self.current_function())
            return None
        if cls is ReturnStmt:
            value = self.eval(st.value, frame) if st.value is not None else 0
            return (_RETURN, value)
        raise AssertionError(st)

    # -- expressions -------------------------------------------------------------

    def eval(self, e: Expr, frame) -> MiniValue:
        cls = type(e)
        if cls is VarRef:
            if e.name in frame:
                sid, ty = frame[e.name]
            else:
                sid, ty = self.global_segs[e.name], self.prog.globals[e.name].decl_type
            if isinstance(ty, ArrT):
                return Ptr(sid, 0)  # arrays decay to a pointer to their first element
            return self.mem.read(Ptr(sid, 0), ty, self.current_function())
        if cls is IntLit or cls is FloatLit or cls is CharLit:
            return e.value
        if cls is Binary:
            return self.eval_binary(e, frame)
        if cls is Call:
            return self.eval_call(e, frame)
        if cls in (Index, FieldAccess, Deref):
            ptr, ty = self.eval_lvalue(e, frame)
            if isinstance(ty, ArrT):
                return ptr
            return self.mem.read(ptr, ty, self.current_function())
        if cls is Unary:
            v = self.eval(e.operand, frame)
            if e.op == "!":
                return 0 if truthy(v) else 1
            if isinstance(v, float):
                return -v
            return wrap64(-v)
        if cls is AddrOf:
            ptr, _ = self.eval_lvalue(e.operand, frame)
            return ptr
        if cls is StrLit:
            return Ptr(self.literal_sids[e.literal_index], 0)
        if cls is NullLit:
            return NULL
        if cls is SizeofExpr:
            return self.layouts.sizeof(e.sized)
        raise AssertionError(e)

    def eval_lvalue(self, e: Expr, frame) -> tuple[Ptr, MiniType]:
        cls = type(e)
        if cls is VarRef:
            if e.name in frame:
                sid, ty = frame[e.name]
            else:
                sid, ty = self.global_segs[e.name], self.prog.globals[e.name].decl_type
            return Ptr(sid, 0), ty
        if cls is Deref:
            v = self.eval(e.operand, frame)
            if v.is_null:
                raise Trap("null-deref", self.current_function())
            return v, e.ty
        if cls is Index:
            base_ty = e.base.ty
            idx = int(self.eval(e.index, frame))
            if isinstance(base_ty, ArrT):
                bptr, _ = self.eval_lvalue(e.base, frame)
                if idx < 0 or idx >= base_ty.length:
                    raise Trap("out-of-bounds", self.current_function(),
                               f"index {idx} outside array of length {base_ty.length}")
                esz = self.layouts.sizeof(base_ty.elem)
                return Ptr(bptr.seg, bptr.off + idx * esz), base_ty.elem
            bv = self.eval(e.base, frame)
            if bv.is_null:
                raise Trap("null-deref", self.current_function())
            esz = self.layouts.sizeof(e.ty)
            return Ptr(bv.seg, bv.off + idx * esz), e.ty
        if cls is FieldAccess:
            if e.arrow:
                bv = self.eval(e.base, frame)
                if bv.is_null:
                    raise Trap("null-deref", self.current_function())
                rec_name = e.base.ty.pointee.name if isinstance(e.base.ty, PtrT) else e.base.ty.elem.name
                base_ptr = bv
            else:
                base_ptr, bty = self.eval_lvalue(e.base, frame)
                rec_name = bty.name
            slot = self.layouts.get(rec_name).field(e.field_name)
            return Ptr(base_ptr.seg, base_ptr.off + slot.offset), slot.type
        raise AssertionError(f"not an lvalue: {e}")

    def eval_binary(self, e: Binary, frame) -> MiniValue:
        op = e.op
        if op == "&&":
            if not truthy(self.eval(e.lhs, frame)):
                return 0
            return 1 if truthy(self.eval(e.rhs, frame)) else 0
        if op == "||":
            if truthy(self.eval(e.lhs, frame)):
                return 1
            return 1 if truthy(self.eval(e.rhs, frame)) else 0

        lv = self.eval(e.lhs, frame)
        rv = self.eval(e.rhs, frame)
        func = self.current_function()

        if isinstance(lv, Ptr) or isinstance(rv, Ptr):
            return self._pointer_op(e, lv, rv, func)

        if op in ("==", "!=", "<", "<=", ">", ">="):
            return 1 if _compare(op, lv, rv) else 0

        if isinstance(lv, float) or isinstance(rv, float):
            a, b = float(lv), float(rv)
            if op == "+":
                return a + b
            if op == "-":
                return a - b
            if op == "*":
                return a * b
            if op == "/":
                # IEEE semantics: dividing by 0.0 yields inf/nan, not a trap
                if b == 0.0:
                    if a != a or a == 0.0:
                        return float("nan")
                    return float("inf") if a > 0 else float("-inf")
                return a / b
            raise AssertionError(op)

        a, b = lv, rv
        if op == "+":
            return wrap64(a + b)
        if op == "-":
            return wrap64(a - b)
        if op == "*":
            return wrap64(a * b)
        if op == "/":
            if b == 0:
                raise Trap("div-by-zero", func)
            return trunc_div(a, b)
        if op == "%":
            if b == 0:
                raise Trap("div-by-zero", func)
            return trunc_mod(a, b)
        raise AssertionError(op)

    def _pointer_op(self, e: Binary, lv, rv, func: str) -> MiniValue:
        op = e.op
        if op in ("==", "!="):
            eq = isinstance(lv, Ptr) and isinstance(rv, Ptr) and lv == rv
            return (1 if eq else 0) if op == "==" else (0 if eq else 1)
        if op in ("<", "<=", ">", ">="):
            if lv.seg != rv.seg:
                raise Trap("out-of-bounds", func, "ordering pointers into different segments")
            return 1 if _compare(op, lv.off, rv.off) else 0
        if op in ("+", "-") and isinstance(lv, Ptr) and not isinstance(rv, Ptr):
            if lv.is_null:
                raise Trap("null-deref", func, "arithmetic on a null pointer")
            pointee = _decayed(e.lhs.ty).pointee
            esz = self.layouts.sizeof(pointee)
            delta = int(rv) * esz
            new_off = lv.off + delta if op == "+" else lv.off - delta
            seg = self.mem.segments.get(lv.seg)
            if seg is None or new_off < 0 or new_off > seg.size:
                raise Trap("out-of-bounds", func,
                           f"pointer arithmetic leaves segment {lv.seg} (offset {new_off})")
            return Ptr(lv.seg, new_off)
        if op == "-" and isinstance(lv, Ptr) and isinstance(rv, Ptr):
            if lv.seg != rv.seg:
                raise Trap("out-of-bounds", func, "difference of pointers into different segments")
            esz = self.layouts.sizeof(_decayed(e.lhs.ty).pointee)
            return trunc_div(lv.off - rv.off, esz)
        raise AssertionError((op, lv, rv))

    # -- calls ----------------------------------------------------------------

    def eval_call(self, e: Call, frame) -> MiniValue:
        args = [self.eval(a, frame) for a in e.args]
        if e.name in self.prog.functions:
            return self.call_user(e.name, args)
        return self._builtin(e.name, args)

    def _builtin(self, name: str, args: list[MiniValue]) -> MiniValue:
        func = self.current_function()
        mem = self.mem
        if name == "input":
            return self.stdin_ptr
        if name == "argc":
            return len(self.arg_ptrs)
        if name == "arg":
            i = int(args[0])
            return self.arg_ptrs[i] if 0 <= i < len(self.arg_ptrs) else NULL
        if name == "malloc":
            n = int(args[0])
            if n < 0 or n > MALLOC_CAP:
                return NULL  # allocation failure, as a full heap would report
            return Ptr(mem.alloc(n, "heap"), 0)
        if name == "free":
            p = args[0]
            if p.is_null:
                return 0
            seg = mem.segments.get(p.seg)
            if seg is None:
                raise Trap("use-after-free", func, "freeing an unknown segment")
            if not seg.live:
                raise Trap("use-after-free", func, "double free")
            if p.off != 0:
                raise Trap("out-of-bounds", func, "freeing an interior pointer")
            if seg.origin != "heap":
                raise Trap("out-of-bounds", func, f"freeing {seg.origin} memory")
            mem.kill(p.seg)
            return 0
        if name == "strlen":
            return self._scan_nul(args[0], func)[0]
        if name == "atoi":
            return self._atoi(args[0], func)
        if name == "print_int":
            self.out.append(str(int(args[0])))
            return 0
        if name == "print_str":
            n, seg, start = self._scan_nul(args[0], func)
            self.out.append(seg.data[start:start + n].decode("latin-1"))
            return 0
        if name == "assert":
            if not truthy(args[0]):
                raise Trap("assert-fail", func)
            return 0
        raise AssertionError(f"unknown builtin {name}")

    def _scan_nul(self, p: Ptr, func: str):
        """Length of the zero-terminated run at p; running off the segment
        end without a terminator is an out-of-bounds read."""
        if p.is_null:
            raise Trap("null-deref", func)
        seg = self.mem.segments.get(p.seg)
        if seg is None or not seg.live:
            raise Trap("use-after-free", func)
        if p.off < 0 or p.off > seg.size:
            raise Trap("out-of-bounds", func)
        idx = seg.data.find(b"\x00", p.off)
        if idx < 0:
            raise Trap("out-of-bounds", func, "string run is not terminated within its segment")
        return idx - p.off, seg, p.off

    def _atoi(self, p: Ptr, func: str) -> int:
        n, seg, start = self._scan_nul(p, func)
        data = seg.data[start:start + n]
        i = 0
        while i < len(data) and data[i : i + 1] in (b" ", b"\t", b"\n", b"\r"):
            i += 1
        sign = 1
        if i < len(data) and data[i : i + 1] in (b"+", b"-"):
            sign = -1 if data[i : i + 1] == b"-" else 1
            i += 1
        value = 0
        while i < len(data) and 48 <= data[i] <= 57:
            value = wrap64(value * 10 + (data[i] - 48))
            i += 1
        return wrap64(sign * value)


def truthy(v: MiniValue) -> bool:
    if isinstance(v, Ptr):
        return not v.is_null
    return v != 0


def coerce(v: MiniValue, ty: MiniType) -> MiniValue:
    if isinstance(ty, IntT):
        return wrap64(double_to_int(v) if isinstance(v, float) else int(v))
    if isinstance(ty, CharT):
        return wrap8(double_to_int(v) if isinstance(v, float) else int(v))
    if isinstance(ty, DoubleT):
        return float(v)
    return v


def _zero(ty: MiniType) -> MiniValue:
    if isinstance(ty, DoubleT):
        return 0.0
    if isinstance(ty, PtrT):
        return NULL
    return 0


def _compare(op: str, a, b) -> bool:
    if op == "==":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


def _decayed(ty: MiniType) -> MiniType:
    return PtrT(ty.elem) if isinstance(ty, ArrT) else ty


def _lvalue_root_global(e: Expr, prog: Program) -> str | None:
    """Attribute a store to its root variable, walking the whole lvalue
    chain (fields, indices, dereferences) like the write-probe does."""
    while True:
        if isinstance(e, (Index, FieldAccess)):
            e = e.base
        elif isinstance(e, Deref):
            e = e.operand
        else:
            break
    if isinstance(e, VarRef) and e.name in prog.globals:
        return e.name
    return None


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------

def run_system(program: Program, sysinput: SystemInput, limits: Limits | None = None,
               tracing: bool = False, trace_id: str = "trace",
               node_budget: "NodeBudget | None" = None) -> RunResult:
    """Execute main() against a system input; optionally record a trace."""
    limits = limits or DEFAULT_SYSTEM_LIMITS
    builder = None
    if tracing:
        from ..tracer import TraceBuilder
        builder = TraceBuilder(trace_id, sysinput, program.layouts, node_budget)
    vm = VM(program, sysinput, limits, builder)
    outcome = _drive(vm, "main", [])
    trace = builder.finish(outcome.summary()) if builder is not None else None
    return RunResult(outcome, vm.coverage, trace, "".join(vm.out), vm.calls, vm.func_steps, vm.steps)


def run_unit(program: Program, test, bindings=None, limits: Limits | None = None) -> RunResult:
    """Execute one carved unit test in a fresh VM.

    The setup plan reconstructs globals and heap, then the recorded callee
    runs with the (possibly re-bound) arguments.  The input sources of the
    originating run are part of the context, so input()/arg() behave as
    recorded (the arguments still point at reconstructed nodes, not at the
    pristine sources).  Teardown is implicit: the VM instance is discarded.
    A truncated graph yields the distinguished setup-error outcome instead
    of a partial context.
    """
    from ..memgraph import execute_plan, plan_reconstruction

    limits = limits or DEFAULT_UNIT_LIMITS
    base = getattr(test, "base", test)
    vm = VM(program, getattr(base, "input", SystemInput(())), limits, None)
    if base.setup_error:
        return RunResult(Outcome("setup-error", detail="memory graph was truncated"),
                         vm.coverage, None, "", {}, {}, 0)
    if bindings is not None:
        graph = test.materialize_graph(bindings)
        plan = plan_reconstruction(graph)
    else:
        plan = base.setup
    try:
        setup = execute_plan(plan, vm.mem, vm.global_segs)
        for gname, value in setup.global_values.items():
            gty = program.globals[gname].decl_type
            if isinstance(gty, (RecT, ArrT)):
                continue  # aggregate storage was rebuilt in place
            vm.mem.write(Ptr(vm.global_segs[gname], 0), gty, coerce(value, gty), "<setup>")
        fn = program.functions[base.callee]
        args = [setup.args[i] for i in range(len(fn.params))]
    except (SetupFailure, KeyError) as e:
        return RunResult(Outcome("setup-error", detail=str(e)), vm.coverage, None, "", {}, {}, 0)
    outcome = _drive(vm, base.callee, args)
    return RunResult(outcome, vm.coverage, None, "".join(vm.out), vm.calls, vm.func_steps, vm.steps)


def _drive(vm: VM, entry: str, args: list[MiniValue]) -> Outcome:
    try:
        rv = vm.call_user(entry, args)
        return Outcome.ok(int(rv) if not isinstance(rv, Ptr) else 0)
    except Trap as t:
        return Outcome("trap", trap_kind=t.kind, trap_function=t.function, detail=t.detail)
    except StepLimitExceeded:
        return Outcome("step-limit")
    except SetupFailure as e:
        return Outcome("setup-error", detail=str(e))


def callee_footprint(result: RunResult, callee: str) -> set[tuple[int, str]]:
    """The conditional arms of `callee` itself covered by a unit run."""
    return {(idx, arm) for (fn, idx, arm) in result.coverage.counts if fn == callee}

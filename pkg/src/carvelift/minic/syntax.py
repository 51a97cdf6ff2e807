"""Abstract syntax and type model for MiniC."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ValidationError


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MiniType:
    pass


@dataclass(frozen=True)
class IntT(MiniType):
    def __repr__(self):
        return "int"


@dataclass(frozen=True)
class DoubleT(MiniType):
    def __repr__(self):
        return "double"


@dataclass(frozen=True)
class CharT(MiniType):
    def __repr__(self):
        return "char"


@dataclass(frozen=True)
class PtrT(MiniType):
    pointee: MiniType

    def __repr__(self):
        return f"{self.pointee!r}*"


@dataclass(frozen=True)
class ArrT(MiniType):
    elem: MiniType
    length: int

    def __repr__(self):
        return f"{self.elem!r}[{self.length}]"


@dataclass(frozen=True)
class RecT(MiniType):
    name: str

    def __repr__(self):
        return self.name


INT = IntT()
DOUBLE = DoubleT()
CHAR = CharT()

# Pointer assignability wildcard: the static type of malloc()'s result.
ANY_PTR = PtrT(RecT("<any>"))


def type_to_str(t: MiniType) -> str:
    """Compact prefix encoding used in trace files: i, d, c, *T, [N]T, %Name."""
    if isinstance(t, IntT):
        return "i"
    if isinstance(t, DoubleT):
        return "d"
    if isinstance(t, CharT):
        return "c"
    if isinstance(t, PtrT):
        return "*" + type_to_str(t.pointee)
    if isinstance(t, ArrT):
        return f"[{t.length}]" + type_to_str(t.elem)
    if isinstance(t, RecT):
        return "%" + t.name
    raise TypeError(t)


def type_from_str(s: str) -> MiniType:
    t, rest = _parse_type_str(s)
    if rest:
        raise ValueError(f"trailing characters in type encoding: {s!r}")
    return t


def _parse_type_str(s: str) -> tuple[MiniType, str]:
    if not s:
        raise ValueError("empty type encoding")
    head = s[0]
    if head == "i":
        return INT, s[1:]
    if head == "d":
        return DOUBLE, s[1:]
    if head == "c":
        return CHAR, s[1:]
    if head == "*":
        inner, rest = _parse_type_str(s[1:])
        return PtrT(inner), rest
    if head == "[":
        close = s.index("]")
        n = int(s[1:close])
        inner, rest = _parse_type_str(s[close + 1:])
        return ArrT(inner, n), rest
    if head == "%":
        return RecT(s[1:]), ""
    raise ValueError(f"bad type encoding: {s!r}")


# ---------------------------------------------------------------------------
# Record layouts (packed, no padding: this VM has no alignment requirements)
# ---------------------------------------------------------------------------

SCALAR_SIZES = {IntT: 8, DoubleT: 8, CharT: 1, PtrT: 8}


@dataclass(frozen=True)
class FieldSlot:
    name: str
    type: MiniType
    offset: int


@dataclass(frozen=True)
class RecordLayout:
    name: str
    fields: tuple[FieldSlot, ...]
    size: int

    def field(self, name: str) -> FieldSlot | None:
        for f in self.fields:
            if f.name == name:
                return f
        return None


class Layouts:
    """Byte layouts of all record types of one program."""

    def __init__(self, records: dict[str, list[tuple[str, MiniType]]]):
        self._table: dict[str, RecordLayout] = {}
        for name in records:
            self._build(name, records, ())

    def _build(self, name: str, records, chain) -> RecordLayout:
        if name in self._table:
            return self._table[name]
        if name in chain:
            raise ValidationError(f"record {name} contains itself by value (cycle {' -> '.join(chain + (name,))})")
        off = 0
        slots = []
        for fname, ftype in records[name]:
            slots.append(FieldSlot(fname, ftype, off))
            off += self._size(ftype, records, chain + (name,))
        layout = RecordLayout(name, tuple(slots), off)
        self._table[name] = layout
        return layout

    def _size(self, t: MiniType, records, chain) -> int:
        if isinstance(t, RecT):
            if t.name not in records:
                raise ValidationError(f"unknown record type {t.name}")
            return self._build(t.name, records, chain).size
        if isinstance(t, ArrT):
            return t.length * self._size(t.elem, records, chain)
        return SCALAR_SIZES[type(t)]

    def get(self, name: str) -> RecordLayout:
        return self._table[name]

    def __contains__(self, name: str) -> bool:
        return name in self._table

    def sizeof(self, t: MiniType) -> int:
        if isinstance(t, RecT):
            return self._table[t.name].size
        if isinstance(t, ArrT):
            return t.length * self.sizeof(t.elem)
        return SCALAR_SIZES[type(t)]

    def names(self) -> list[str]:
        return list(self._table)


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------

@dataclass
class Expr:
    line: int = field(default=0, repr=False, compare=False)
    col: int = field(default=0, repr=False, compare=False)
    ty: MiniType | None = field(default=None, repr=False, compare=False)


@dataclass
class IntLit(Expr):
    value: int = 0


@dataclass
class FloatLit(Expr):
    value: float = 0.0


@dataclass
class CharLit(Expr):
    value: int = 0


@dataclass
class StrLit(Expr):
    value: bytes = b""
    literal_index: int = -1  # filled by the validator; indexes the intern table


@dataclass
class NullLit(Expr):
    pass


@dataclass
class VarRef(Expr):
    name: str = ""


@dataclass
class Unary(Expr):
    op: str = ""
    operand: Expr | None = None


@dataclass
class Binary(Expr):
    op: str = ""
    lhs: Expr | None = None
    rhs: Expr | None = None


@dataclass
class Call(Expr):
    name: str = ""
    args: list[Expr] = field(default_factory=list)


@dataclass
class Index(Expr):
    base: Expr | None = None
    index: Expr | None = None


@dataclass
class FieldAccess(Expr):
    base: Expr | None = None
    field_name: str = ""
    arrow: bool = False


@dataclass
class AddrOf(Expr):
    operand: Expr | None = None


@dataclass
class Deref(Expr):
    operand: Expr | None = None


@dataclass
class SizeofExpr(Expr):
    sized: MiniType | None = None


# ---------------------------------------------------------------------------
# Statements
# ---------------------------------------------------------------------------

@dataclass
class Stmt:
    line: int = field(default=0, repr=False, compare=False)


@dataclass
class DeclStmt(Stmt):
    name: str = ""
    decl_type: MiniType | None = None
    init: Expr | None = None


@dataclass
class AssignStmt(Stmt):
    target: Expr | None = None
    value: Expr | None = None


@dataclass
class ExprStmt(Stmt):
    expr: Expr | None = None


@dataclass
class IfStmt(Stmt):
    cond: Expr | None = None
    then_body: list[Stmt] = field(default_factory=list)
    else_body: list[Stmt] = field(default_factory=list)
    cond_index: int = -1  # per-function conditional number, set by the validator


@dataclass
class WhileStmt(Stmt):
    cond: Expr | None = None
    body: list[Stmt] = field(default_factory=list)
    cond_index: int = -1


@dataclass
class ReturnStmt(Stmt):
    value: Expr | None = None


# ---------------------------------------------------------------------------
# Top-level definitions
# ---------------------------------------------------------------------------

@dataclass
class FunctionDef:
    name: str
    return_type: MiniType
    params: list[tuple[str, MiniType]]
    body: list[Stmt]
    line: int = 0
    # Filled by the validator:
    frame_vars: list[tuple[str, MiniType]] = field(default_factory=list)
    n_conditionals: int = 0
    callees: set[str] = field(default_factory=set)
    globals_touched: set[str] = field(default_factory=set)


@dataclass
class GlobalDef:
    name: str
    decl_type: MiniType
    init: Expr | None
    line: int = 0


@dataclass
class RecordDef:
    name: str
    fields: list[tuple[str, MiniType]]
    line: int = 0


@dataclass
class Program:
    functions: dict[str, FunctionDef]
    globals: dict[str, GlobalDef]
    record_defs: dict[str, RecordDef]
    layouts: Layouts
    string_literals: list[bytes]
    source_name: str = "<minic>"

    @property
    def main(self) -> FunctionDef:
        return self.functions["main"]

    def branch_total(self, function: str | None = None) -> int:
        """Static count of conditional arms (2 per if/while)."""
        if function is not None:
            return 2 * self.functions[function].n_conditionals
        return sum(2 * f.n_conditionals for f in self.functions.values())

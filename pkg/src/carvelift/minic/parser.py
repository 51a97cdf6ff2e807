"""Lexer, recursive-descent parser, and semantic validator for MiniC.

MiniC is a C-like toy language: int/double/char scalars, pointers, fixed
arrays, named records, globals, if/else, while, return, assignment.  No
preprocessor, no unions, no varargs, no function pointers, no casts.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError, ValidationError
from .syntax import (
    ANY_PTR, CHAR, DOUBLE, INT, AddrOf, ArrT, AssignStmt, Binary, Call, CharLit,
    CharT, DeclStmt, Deref, DoubleT, Expr, ExprStmt, FieldAccess, FloatLit,
    FunctionDef, GlobalDef, IfStmt, Index, IntLit, IntT, Layouts, MiniType,
    NullLit, Program, PtrT, RecT, RecordDef, ReturnStmt, SizeofExpr, Stmt,
    StrLit, Unary, VarRef, WhileStmt,
)

KEYWORDS = {"int", "double", "char", "record", "if", "else", "while", "return", "null", "sizeof"}

BUILTIN_SIGS: dict[str, tuple[list[MiniType], MiniType]] = {
    "input": ([], PtrT(CHAR)),
    "arg": ([INT], PtrT(CHAR)),
    "argc": ([], INT),
    "malloc": ([INT], ANY_PTR),
    "free": ([ANY_PTR], INT),
    "strlen": ([PtrT(CHAR)], INT),
    "atoi": ([PtrT(CHAR)], INT),
    "print_int": ([INT], INT),
    "print_str": ([PtrT(CHAR)], INT),
    "assert": ([INT], INT),
}

PUNCT = [
    "->", "&&", "||", "==", "!=", "<=", ">=",
    "{", "}", "(", ")", "[", "]", ";", ",", ".",
    "+", "-", "*", "/", "%", "<", ">", "=", "!", "&",
]

_ESCAPES = {"n": 10, "t": 9, "r": 13, "0": 0, "\\": 92, "'": 39, '"': 34}


@dataclass
class Token:
    kind: str  # 'ident' 'kw' 'int' 'float' 'char' 'str' 'punct' 'eof'
    text: str
    value: object
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(source)

    def err(msg):
        raise ParseError(msg, line, col)

    while i < n:
        c = source[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        if source.startswith("/*", i):
            end = source.find("*/", i + 2)
            if end < 0:
                err("unterminated block comment")
            skipped = source[i:end + 2]
            line += skipped.count("\n")
            col = len(skipped) - skipped.rfind("\n") if "\n" in skipped else col + len(skipped)
            i = end + 2
            continue
        start_line, start_col = line, col
        if c.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            if j < n and source[j] == "." and j + 1 < n and source[j + 1].isdigit():
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
                text = source[i:j]
                toks.append(Token("float", text, float(text), start_line, start_col))
            else:
                text = source[i:j]
                toks.append(Token("int", text, int(text), start_line, start_col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            kind = "kw" if text in KEYWORDS else "ident"
            toks.append(Token(kind, text, text, start_line, start_col))
            col += j - i
            i = j
            continue
        if c == "'":
            j = i + 1
            if j < n and source[j] == "\\":
                if j + 1 >= n or source[j + 1] not in _ESCAPES:
                    err("bad escape in char literal")
                val = _ESCAPES[source[j + 1]]
                j += 2
            elif j < n and source[j] != "'":
                val = ord(source[j])
                if val > 255:
                    err("char literal outside byte range")
                j += 1
            else:
                err("empty char literal")
            if j >= n or source[j] != "'":
                err("unterminated char literal")
            toks.append(Token("char", source[i:j + 1], val, start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        if c == '"':
            j = i + 1
            out = bytearray()
            while j < n and source[j] != '"':
                if source[j] == "\n":
                    err("newline in string literal")
                if source[j] == "\\":
                    if j + 1 >= n or source[j + 1] not in _ESCAPES:
                        err("bad escape in string literal")
                    out.append(_ESCAPES[source[j + 1]])
                    j += 2
                else:
                    b = ord(source[j])
                    if b > 255:
                        err("non-byte character in string literal")
                    out.append(b)
                    j += 1
            if j >= n:
                err("unterminated string literal")
            toks.append(Token("str", source[i:j + 1], bytes(out), start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        for p in PUNCT:
            if source.startswith(p, i):
                toks.append(Token("punct", p, p, start_line, start_col))
                i += len(p)
                col += len(p)
                break
        else:
            err(f"unexpected character {c!r}")
    toks.append(Token("eof", "", None, line, col))
    return toks


class _Parser:
    def __init__(self, tokens: list[Token], record_names: set[str]):
        self.toks = tokens
        self.pos = 0
        self.record_names = record_names
        self.expr_depth = 0

    # -- token helpers ------------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.peek()
        return t.kind == kind and (text is None or t.text == text)

    def expect(self, kind: str, text: str | None = None) -> Token:
        t = self.peek()
        if not self.at(kind, text):
            want = text or kind
            self.fail(f"expected {want!r}, found {t.text!r}" if t.kind != "eof" else f"expected {want!r}, found end of input")
        return self.next()

    def fail(self, msg: str):
        t = self.peek()
        raise ParseError(msg, t.line, t.col)

    # -- types --------------------------------------------------------------

    def at_type(self) -> bool:
        t = self.peek()
        if t.kind == "kw" and t.text in ("int", "double", "char"):
            return True
        return t.kind == "ident" and t.text in self.record_names

    def parse_base_type(self) -> MiniType:
        t = self.next()
        if t.kind == "kw" and t.text == "int":
            base: MiniType = INT
        elif t.kind == "kw" and t.text == "double":
            base = DOUBLE
        elif t.kind == "kw" and t.text == "char":
            base = CHAR
        elif t.kind == "ident" and t.text in self.record_names:
            base = RecT(t.text)
        else:
            raise ParseError(f"expected a type, found {t.text!r}", t.line, t.col)
        while self.at("punct", "*"):
            self.next()
            base = PtrT(base)
        return base

    def parse_array_suffix(self, base: MiniType) -> MiniType:
        # one-dimensional suffix arrays: T name[N]
        if self.at("punct", "["):
            tok = self.next()
            length_tok = self.expect("int")
            self.expect("punct", "]")
            length = int(length_tok.value)
            if length <= 0:
                raise ParseError("array length must be positive", tok.line, tok.col)
            return ArrT(base, length)
        return base

    # -- program structure ---------------------------------------------------

    def parse_program_items(self):
        records: list[RecordDef] = []
        globals_: list[GlobalDef] = []
        functions: list[FunctionDef] = []
        while not self.at("eof"):
            if self.at("kw", "record"):
                records.append(self.parse_record_def())
                continue
            if not self.at_type():
                self.fail(f"expected a definition, found {self.peek().text!r}")
            line = self.peek().line
            base = self.parse_base_type()
            name_tok = self.expect("ident")
            if self.at("punct", "("):
                functions.append(self.parse_function(base, name_tok.text, line))
            else:
                ty = self.parse_array_suffix(base)
                init = None
                if self.at("punct", "="):
                    self.next()
                    init = self.parse_literal_init()
                self.expect("punct", ";")
                globals_.append(GlobalDef(name_tok.text, ty, init, line))
        return records, globals_, functions

    def parse_record_def(self) -> RecordDef:
        kw = self.expect("kw", "record")
        name = self.expect("ident").text
        self.expect("punct", "{")
        fields: list[tuple[str, MiniType]] = []
        while not self.at("punct", "}"):
            base = self.parse_base_type()
            fname = self.expect("ident").text
            ty = self.parse_array_suffix(base)
            self.expect("punct", ";")
            fields.append((fname, ty))
        self.expect("punct", "}")
        return RecordDef(name, fields, kw.line)

    def parse_literal_init(self) -> Expr:
        # global initializers are restricted to literals
        t = self.peek()
        neg = False
        if self.at("punct", "-"):
            self.next()
            neg = True
            t = self.peek()
        if t.kind == "int":
            self.next()
            return IntLit(t.line, t.col, None, -t.value if neg else t.value)
        if t.kind == "float":
            self.next()
            return FloatLit(t.line, t.col, None, -t.value if neg else t.value)
        if neg:
            self.fail("expected a numeric literal after '-'")
        if t.kind == "char":
            self.next()
            return CharLit(t.line, t.col, None, t.value)
        if t.kind == "str":
            self.next()
            return StrLit(t.line, t.col, None, t.value)
        if t.kind == "kw" and t.text == "null":
            self.next()
            return NullLit(t.line, t.col, None)
        self.fail("global initializers must be literals")

    def parse_function(self, ret: MiniType, name: str, line: int) -> FunctionDef:
        self.expect("punct", "(")
        params: list[tuple[str, MiniType]] = []
        if not self.at("punct", ")"):
            while True:
                pty = self.parse_base_type()
                pname = self.expect("ident").text
                params.append((pname, pty))
                if self.at("punct", ","):
                    self.next()
                    continue
                break
        self.expect("punct", ")")
        body = self.parse_block()
        return FunctionDef(name, ret, params, body, line)

    # -- statements -----------------------------------------------------------

    def parse_block(self) -> list[Stmt]:
        self.expect("punct", "{")
        out: list[Stmt] = []
        while not self.at("punct", "}"):
            out.append(self.parse_stmt())
        self.expect("punct", "}")
        return out

    def parse_stmt(self) -> Stmt:
        t = self.peek()
        if self.at("kw", "if"):
            return self.parse_if()
        if self.at("kw", "while"):
            self.next()
            self.expect("punct", "(")
            cond = self.parse_expr()
            self.expect("punct", ")")
            body = self.parse_block()
            return WhileStmt(t.line, cond, body)
        if self.at("kw", "return"):
            self.next()
            value = None
            if not self.at("punct", ";"):
                value = self.parse_expr()
            self.expect("punct", ";")
            return ReturnStmt(t.line, value)
        if self.at_type():
            base = self.parse_base_type()
            name = self.expect("ident").text
            ty = self.parse_array_suffix(base)
            init = None
            if self.at("punct", "="):
                self.next()
                init = self.parse_expr()
            self.expect("punct", ";")
            return DeclStmt(t.line, name, ty, init)
        expr = self.parse_expr()
        if self.at("punct", "="):
            self.next()
            value = self.parse_expr()
            self.expect("punct", ";")
            return AssignStmt(t.line, expr, value)
        self.expect("punct", ";")
        return ExprStmt(t.line, expr)

    def parse_if(self) -> IfStmt:
        t = self.expect("kw", "if")
        self.expect("punct", "(")
        cond = self.parse_expr()
        self.expect("punct", ")")
        then_body = self.parse_block()
        else_body: list[Stmt] = []
        if self.at("kw", "else"):
            self.next()
            if self.at("kw", "if"):
                else_body = [self.parse_if()]
            else:
                else_body = self.parse_block()
        return IfStmt(t.line, cond, then_body, else_body)

    # -- expressions ----------------------------------------------------------

    def parse_expr(self) -> Expr:
        self.expr_depth += 1
        if self.expr_depth > 100:
            self.fail("expression nesting too deep")
        try:
            return self.parse_or()
        finally:
            self.expr_depth -= 1

    def _binop_chain(self, sub, ops) -> Expr:
        e = sub()
        while self.peek().kind == "punct" and self.peek().text in ops:
            op = self.next()
            rhs = sub()
            e = Binary(op.line, op.col, None, op.text, e, rhs)
        return e

    def parse_or(self) -> Expr:
        return self._binop_chain(self.parse_and, ("||",))

    def parse_and(self) -> Expr:
        return self._binop_chain(self.parse_eq, ("&&",))

    def parse_eq(self) -> Expr:
        return self._binop_chain(self.parse_rel, ("==", "!="))

    def parse_rel(self) -> Expr:
        return self._binop_chain(self.parse_add, ("<", "<=", ">", ">="))

    def parse_add(self) -> Expr:
        return self._binop_chain(self.parse_mul, ("+", "-"))

    def parse_mul(self) -> Expr:
        return self._binop_chain(self.parse_unary, ("*", "/", "%"))

    def parse_unary(self) -> Expr:
        t = self.peek()
        if t.kind == "punct" and t.text in ("!", "-", "*", "&"):
            self.next()
            operand = self.parse_unary()
            if t.text == "*":
                return Deref(t.line, t.col, None, operand)
            if t.text == "&":
                return AddrOf(t.line, t.col, None, operand)
            return Unary(t.line, t.col, None, t.text, operand)
        return self.parse_postfix()

    def parse_postfix(self) -> Expr:
        e = self.parse_primary()
        while True:
            t = self.peek()
            if self.at("punct", "["):
                self.next()
                idx = self.parse_expr()
                self.expect("punct", "]")
                e = Index(t.line, t.col, None, e, idx)
            elif self.at("punct", "."):
                self.next()
                name = self.expect("ident").text
                e = FieldAccess(t.line, t.col, None, e, name, False)
            elif self.at("punct", "->"):
                self.next()
                name = self.expect("ident").text
                e = FieldAccess(t.line, t.col, None, e, name, True)
            else:
                return e

    def parse_primary(self) -> Expr:
        t = self.peek()
        if t.kind == "int":
            self.next()
            return IntLit(t.line, t.col, None, t.value)
        if t.kind == "float":
            self.next()
            return FloatLit(t.line, t.col, None, t.value)
        if t.kind == "char":
            self.next()
            return CharLit(t.line, t.col, None, t.value)
        if t.kind == "str":
            self.next()
            return StrLit(t.line, t.col, None, t.value)
        if self.at("kw", "null"):
            self.next()
            return NullLit(t.line, t.col, None)
        if self.at("kw", "sizeof"):
            self.next()
            self.expect("punct", "(")
            base = self.parse_base_type()
            ty = self.parse_array_suffix(base)
            self.expect("punct", ")")
            return SizeofExpr(t.line, t.col, None, ty)
        if t.kind == "ident":
            self.next()
            if self.at("punct", "("):
                self.next()
                args: list[Expr] = []
                if not self.at("punct", ")"):
                    while True:
                        args.append(self.parse_expr())
                        if self.at("punct", ","):
                            self.next()
                            continue
                        break
                self.expect("punct", ")")
                return Call(t.line, t.col, None, t.text, args)
            return VarRef(t.line, t.col, None, t.text)
        if self.at("punct", "("):
            self.next()
            e = self.parse_expr()
            self.expect("punct", ")")
            return e
        self.fail(f"expected an expression, found {t.text!r}" if t.kind != "eof" else "expected an expression, found end of input")


def _prescan_record_names(tokens: list[Token]) -> set[str]:
    names = set()
    for i, t in enumerate(tokens):
        if t.kind == "kw" and t.text == "record" and tokens[i + 1].kind == "ident":
            names.add(tokens[i + 1].text)
    return names


def parse_program(source: str, source_name: str = "<minic>") -> Program:
    """Parse and validate MiniC source text into a Program.

    Raises ParseError (with line/column) or ValidationError.
    """
    tokens = tokenize(source)
    parser = _Parser(tokens, _prescan_record_names(tokens))
    records, globals_, functions = parser.parse_program_items()
    return _validate(records, globals_, functions, source_name)


# ---------------------------------------------------------------------------
# Validation and type checking
# ---------------------------------------------------------------------------

class _Checker:
    def __init__(self, program: Program):
        self.prog = program
        self.literals: list[bytes] = []
        self.literal_ids: dict[bytes, int] = {}

    def intern(self, lit: StrLit):
        if lit.value not in self.literal_ids:
            self.literal_ids[lit.value] = len(self.literals)
            self.literals.append(lit.value)
        lit.literal_index = self.literal_ids[lit.value]

    def err(self, node, msg: str):
        line = getattr(node, "line", 0)
        raise ValidationError(f"{self.prog.source_name}:{line}: {msg}")

    # -- type utilities -----------------------------------------------------

    def check_type_resolves(self, node, t: MiniType):
        if isinstance(t, RecT):
            if t.name not in self.prog.layouts:
                self.err(node, f"unknown record type {t.name!r}")
        elif isinstance(t, PtrT):
            self.check_type_resolves(node, t.pointee)
        elif isinstance(t, ArrT):
            if t.length <= 0:
                self.err(node, "array length must be positive")
            self.check_type_resolves(node, t.elem)

    @staticmethod
    def is_numeric(t: MiniType) -> bool:
        return isinstance(t, (IntT, CharT, DoubleT))

    @staticmethod
    def is_scalar(t: MiniType) -> bool:
        return isinstance(t, (IntT, CharT, DoubleT, PtrT))

    def assignable(self, dst: MiniType, src: MiniType) -> bool:
        if self.is_numeric(dst) and self.is_numeric(src):
            return True
        if isinstance(dst, PtrT) and isinstance(src, PtrT):
            return src == ANY_PTR or dst == ANY_PTR or dst.pointee == src.pointee
        return False

    @staticmethod
    def decay(t: MiniType) -> MiniType:
        return PtrT(t.elem) if isinstance(t, ArrT) else t

    # -- function checking ----------------------------------------------------

    def check_function(self, fn: FunctionDef):
        if not self.is_scalar(fn.return_type):
            self.err(fn, f"function {fn.name} must return a scalar type")
        self.check_type_resolves(fn, fn.return_type)
        scope: dict[str, MiniType] = {}
        for pname, pty in fn.params:
            self.check_type_resolves(fn, pty)
            if not self.is_scalar(pty):
                self.err(fn, f"parameter {pname} of {fn.name}: records and arrays must be passed by pointer")
            if pname in scope:
                self.err(fn, f"duplicate parameter {pname!r} in {fn.name}")
            scope[pname] = pty
        fn.frame_vars = list(fn.params)
        self._cond_counter = 0
        self._check_block(fn, fn.body, scope)
        fn.n_conditionals = self._cond_counter

    def _check_block(self, fn: FunctionDef, body: list[Stmt], scope: dict[str, MiniType]):
        for st in body:
            self._check_stmt(fn, st, scope)

    def _check_stmt(self, fn: FunctionDef, st: Stmt, scope):
        if isinstance(st, DeclStmt):
            self.check_type_resolves(st, st.decl_type)
            if st.name in scope:
                self.err(st, f"duplicate local {st.name!r} in {fn.name} (MiniC locals are function-scoped)")
            if st.name in self.prog.functions or st.name in BUILTIN_SIGS:
                self.err(st, f"local {st.name!r} shadows a function name")
            scope[st.name] = st.decl_type
            fn.frame_vars.append((st.name, st.decl_type))
            if st.init is not None:
                if not self.is_scalar(st.decl_type):
                    self.err(st, "only scalar locals can have initializers")
                ity = self.value_type(fn, st.init, scope)
                if not self.assignable(st.decl_type, ity):
                    self.err(st, f"cannot initialize {st.decl_type!r} from {ity!r}")
        elif isinstance(st, AssignStmt):
            tty = self._check_expr(fn, st.target, scope)
            if not self._is_lvalue(st.target):
                self.err(st, "assignment target is not assignable")
            if not self.is_scalar(tty):
                self.err(st, "whole records and arrays cannot be assigned; assign fields or elements")
            vty = self.value_type(fn, st.value, scope)
            if not self.assignable(tty, vty):
                self.err(st, f"cannot assign {vty!r} to {tty!r}")
            self._note_global_touch(fn, st.target)
        elif isinstance(st, ExprStmt):
            self._check_expr(fn, st.expr, scope)
        elif isinstance(st, IfStmt):
            st.cond_index = self._cond_counter
            self._cond_counter += 1
            cty = self.value_type(fn, st.cond, scope)
            if not self.is_scalar(cty):
                self.err(st, "condition must be scalar")
            self._check_block(fn, st.then_body, scope)
            self._check_block(fn, st.else_body, scope)
        elif isinstance(st, WhileStmt):
            st.cond_index = self._cond_counter
            self._cond_counter += 1
            cty = self.value_type(fn, st.cond, scope)
            if not self.is_scalar(cty):
                self.err(st, "condition must be scalar")
            self._check_block(fn, st.body, scope)
        elif isinstance(st, ReturnStmt):
            if st.value is not None:
                vty = self.value_type(fn, st.value, scope)
                if not self.assignable(fn.return_type, vty):
                    self.err(st, f"cannot return {vty!r} from function returning {fn.return_type!r}")
        else:
            raise AssertionError(st)

    def _is_lvalue(self, e: Expr) -> bool:
        return isinstance(e, (VarRef, Index, FieldAccess, Deref))

    def _note_global_touch(self, fn: FunctionDef, e: Expr):
        # attribute a store through any lvalue chain to its root variable
        while isinstance(e, (Index, FieldAccess)):
            e = e.base
        if isinstance(e, VarRef) and e.name in self.prog.globals:
            fn.globals_touched.add(e.name)

    def value_type(self, fn, e: Expr, scope) -> MiniType:
        t = self._check_expr(fn, e, scope)
        if isinstance(t, RecT):
            self.err(e, "a whole record cannot be used as a value; use a field or a pointer")
        return self.decay(t)

    def _check_expr(self, fn: FunctionDef, e: Expr, scope) -> MiniType:
        ty = self._expr_type(fn, e, scope)
        e.ty = ty
        return ty

    def _expr_type(self, fn: FunctionDef, e: Expr, scope) -> MiniType:
        if isinstance(e, IntLit):
            return INT
        if isinstance(e, FloatLit):
            return DOUBLE
        if isinstance(e, CharLit):
            return CHAR
        if isinstance(e, StrLit):
            self.intern(e)
            return PtrT(CHAR)
        if isinstance(e, NullLit):
            return ANY_PTR
        if isinstance(e, SizeofExpr):
            self.check_type_resolves(e, e.sized)
            return INT
        if isinstance(e, VarRef):
            if e.name in scope:
                ty = scope[e.name]
            elif e.name in self.prog.globals:
                fn.globals_touched.add(e.name)
                ty = self.prog.globals[e.name].decl_type
            else:
                self.err(e, f"unknown variable {e.name!r}")
            return ty
        if isinstance(e, Unary):
            oty = self.value_type(fn, e.operand, scope)
            if e.op == "!":
                if not self.is_scalar(oty):
                    self.err(e, "operand of ! must be scalar")
                return INT
            if e.op == "-":
                if isinstance(oty, DoubleT):
                    return DOUBLE
                if self.is_numeric(oty):
                    return INT
                self.err(e, "operand of unary - must be numeric")
            raise AssertionError(e.op)
        if isinstance(e, Binary):
            return self._binary_type(fn, e, scope)
        if isinstance(e, Deref):
            oty = self.value_type(fn, e.operand, scope)
            if not isinstance(oty, PtrT):
                self.err(e, "cannot dereference a non-pointer")
            if oty == ANY_PTR:
                self.err(e, "cannot dereference an untyped pointer; assign it to a typed pointer first")
            return oty.pointee
        if isinstance(e, AddrOf):
            oty = self._check_expr(fn, e.operand, scope)
            if not self._is_lvalue(e.operand):
                self.err(e, "cannot take the address of this expression")
            if isinstance(oty, ArrT):
                self.err(e, "cannot take the address of a whole array; it already decays to a pointer")
            return PtrT(oty)
        if isinstance(e, Index):
            bty = self._check_expr(fn, e.base, scope)
            ity = self.value_type(fn, e.index, scope)
            if not isinstance(ity, (IntT, CharT)):
                self.err(e, "array index must be an integer")
            if isinstance(bty, ArrT):
                return bty.elem
            bty = self.decay(bty)
            if isinstance(bty, PtrT) and bty != ANY_PTR:
                return bty.pointee
            self.err(e, "only pointers and arrays can be indexed")
        if isinstance(e, FieldAccess):
            bty = self._check_expr(fn, e.base, scope)
            if e.arrow:
                bty = self.decay(bty)
                if not (isinstance(bty, PtrT) and isinstance(bty.pointee, RecT)):
                    self.err(e, "-> requires a pointer to a record")
                rec = bty.pointee
            else:
                if not isinstance(bty, RecT):
                    self.err(e, ". requires a record value")
                if not self._is_lvalue(e.base):
                    self.err(e, "record field access requires an addressable record")
                rec = bty
            slot = self.prog.layouts.get(rec.name).field(e.field_name)
            if slot is None:
                self.err(e, f"record {rec.name} has no field {e.field_name!r}")
            return slot.type
        if isinstance(e, Call):
            return self._call_type(fn, e, scope)
        raise AssertionError(e)

    def _binary_type(self, fn, e: Binary, scope) -> MiniType:
        lty = self.value_type(fn, e.lhs, scope)
        rty = self.value_type(fn, e.rhs, scope)
        op = e.op
        if op in ("&&", "||"):
            if not (self.is_scalar(lty) and self.is_scalar(rty)):
                self.err(e, f"operands of {op} must be scalar")
            return INT
        if op in ("==", "!=", "<", "<=", ">", ">="):
            if self.is_numeric(lty) and self.is_numeric(rty):
                return INT
            if isinstance(lty, PtrT) and isinstance(rty, PtrT):
                if lty == ANY_PTR or rty == ANY_PTR or lty.pointee == rty.pointee:
                    return INT
            self.err(e, f"incomparable operand types {lty!r} and {rty!r}")
        if op == "%":
            if isinstance(lty, (IntT, CharT)) and isinstance(rty, (IntT, CharT)):
                return INT
            self.err(e, "operands of % must be integers")
        if op in ("+", "-"):
            if isinstance(lty, PtrT):
                if lty == ANY_PTR:
                    self.err(e, "pointer arithmetic on untyped pointer")
                if isinstance(rty, (IntT, CharT)):
                    return lty
                if op == "-" and isinstance(rty, PtrT) and rty.pointee == lty.pointee:
                    return INT
                self.err(e, f"bad pointer arithmetic: {lty!r} {op} {rty!r}")
            if op == "+" and isinstance(rty, PtrT):
                self.err(e, "write pointer + integer, not integer + pointer")
        if self.is_numeric(lty) and self.is_numeric(rty):
            if isinstance(lty, DoubleT) or isinstance(rty, DoubleT):
                if op == "%":
                    self.err(e, "operands of % must be integers")
                return DOUBLE
            return INT
        self.err(e, f"bad operand types for {op}: {lty!r} and {rty!r}")

    def _call_type(self, fn, e: Call, scope) -> MiniType:
        if e.name in BUILTIN_SIGS:
            param_tys, ret = BUILTIN_SIGS[e.name]
            if len(e.args) != len(param_tys):
                self.err(e, f"{e.name}() takes {len(param_tys)} argument(s), got {len(e.args)}")
            for arg, pty in zip(e.args, param_tys):
                aty = self.value_type(fn, arg, scope)
                if pty == ANY_PTR:
                    if not isinstance(aty, PtrT):
                        self.err(e, f"argument of {e.name}() must be a pointer")
                elif not self.assignable(pty, aty):
                    self.err(e, f"bad argument type {aty!r} for {e.name}()")
            return ret
        if e.name not in self.prog.functions:
            self.err(e, f"call to unknown function {e.name!r}")
        fn.callees.add(e.name)
        target = self.prog.functions[e.name]
        if len(e.args) != len(target.params):
            self.err(e, f"{e.name}() takes {len(target.params)} argument(s), got {len(e.args)}")
        for arg, (pname, pty) in zip(e.args, target.params):
            aty = self.value_type(fn, arg, scope)
            if not self.assignable(pty, aty):
                self.err(e, f"bad argument for {pname!r} of {e.name}(): {aty!r} not assignable to {pty!r}")
        return target.return_type


def _validate(records, globals_, functions, source_name: str) -> Program:
    rec_map: dict[str, RecordDef] = {}
    for r in records:
        if r.name in rec_map:
            raise ValidationError(f"{source_name}:{r.line}: duplicate record definition {r.name!r}")
        seen_fields = set()
        for fname, _ in r.fields:
            if fname in seen_fields:
                raise ValidationError(f"{source_name}:{r.line}: duplicate field {fname!r} in record {r.name}")
            seen_fields.add(fname)
        rec_map[r.name] = r

    layouts = Layouts({r.name: r.fields for r in rec_map.values()})

    fn_map: dict[str, FunctionDef] = {}
    for f in functions:
        if f.name in fn_map:
            raise ValidationError(f"{source_name}:{f.line}: duplicate function {f.name!r}")
        if f.name in BUILTIN_SIGS:
            raise ValidationError(f"{source_name}:{f.line}: function {f.name!r} shadows a builtin")
        fn_map[f.name] = f

    gl_map: dict[str, GlobalDef] = {}
    for g in globals_:
        if g.name in gl_map:
            raise ValidationError(f"{source_name}:{g.line}: duplicate global {g.name!r}")
        if g.name in fn_map or g.name in BUILTIN_SIGS:
            raise ValidationError(f"{source_name}:{g.line}: global {g.name!r} collides with a function name")
        gl_map[g.name] = g

    if "main" not in fn_map:
        raise ValidationError(f"{source_name}: no main function defined")
    main = fn_map["main"]
    if main.params or not isinstance(main.return_type, IntT):
        raise ValidationError(f"{source_name}:{main.line}: main must be declared as 'int main()'")

    prog = Program(fn_map, gl_map, rec_map, layouts, [], source_name)
    checker = _Checker(prog)

    for g in gl_map.values():
        checker.check_type_resolves(g, g.decl_type)
        if g.init is not None:
            if not checker.is_scalar(g.decl_type):
                raise ValidationError(f"{source_name}:{g.line}: only scalar globals can have initializers")
            if isinstance(g.init, StrLit):
                checker.intern(g.init)
                ity: MiniType = PtrT(CHAR)
            elif isinstance(g.init, IntLit):
                ity = INT
            elif isinstance(g.init, FloatLit):
                ity = DOUBLE
            elif isinstance(g.init, CharLit):
                ity = CHAR
            else:
                ity = ANY_PTR
            if not checker.assignable(g.decl_type, ity):
                raise ValidationError(f"{source_name}:{g.line}: cannot initialize {g.decl_type!r} global from {ity!r}")

    for f in fn_map.values():
        checker.check_function(f)

    prog.string_literals = checker.literals
    return prog

import pytest

from carvelift.minic import ParseError, ValidationError, parse_program
from carvelift.minic.syntax import ArrT, CHAR, INT, PtrT


def test_minimal_program():
    prog = parse_program("int main(){ return 0; }")
    assert len(prog.functions) == 1
    assert not prog.globals


def test_num_record_program():
    src = """
    record Num { char* digits; int len; }
    int add(Num* a, Num* b) { return a->len + b->len; }
    int main() { return 0; }
    """
    prog = parse_program(src)
    assert set(prog.functions) == {"add", "main"}
    assert set(prog.record_defs) == {"Num"}
    layout = prog.layouts.get("Num")
    assert [f.name for f in layout.fields] == ["digits", "len"]
    assert layout.fields[0].type == PtrT(CHAR)
    assert layout.fields[1].offset == 8
    assert layout.size == 16


def test_syntax_error_has_position():
    with pytest.raises(ParseError) as exc:
        parse_program("int main( {")
    assert exc.value.line == 1
    assert exc.value.col == 11


def test_missing_main():
    with pytest.raises(ValidationError, match="main"):
        parse_program("int helper() { return 0; }")


def test_duplicate_function():
    with pytest.raises(ValidationError, match="duplicate function"):
        parse_program("int f() { return 0; } int f() { return 1; } int main() { return 0; }")


def test_unresolved_call():
    with pytest.raises(ValidationError, match="unknown function"):
        parse_program("int main() { return nope(); }")


def test_unknown_variable():
    with pytest.raises(ValidationError, match="unknown variable"):
        parse_program("int main() { return x; }")


def test_record_value_cycle_rejected():
    with pytest.raises(ValidationError, match="cycle"):
        parse_program("record A { B b; } record B { A a; } int main() { return 0; }")


def test_record_pointer_cycle_ok():
    prog = parse_program("record Node { int v; Node* next; } int main() { return 0; }")
    assert prog.layouts.get("Node").size == 16


def test_array_declarations():
    prog = parse_program("int xs[4]; int main() { char buf[8]; buf[0] = 'a'; return xs[1]; }")
    assert prog.globals["xs"].decl_type == ArrT(INT, 4)


def test_zero_length_array_rejected():
    with pytest.raises((ParseError, ValidationError)):
        parse_program("int main() { int xs[0]; return 0; }")


def test_record_by_value_params_rejected():
    with pytest.raises(ValidationError, match="by pointer"):
        parse_program("record R { int x; } int f(R r) { return 0; } int main() { return 0; }")


def test_whole_record_assignment_rejected():
    src = """
    record R { int x; }
    int main() { R a; R b; a = b; return 0; }
    """
    with pytest.raises(ValidationError, match="records and arrays"):
        parse_program(src)


def test_conditionals_are_numbered_per_function():
    src = """
    int f(int x) {
      if (x > 0) { return 1; }
      while (x < 10) { x = x + 1; }
      if (x == 10) { return 2; }
      return 0;
    }
    int main() { return f(1); }
    """
    prog = parse_program(src)
    assert prog.functions["f"].n_conditionals == 3
    assert prog.branch_total("f") == 6
    assert prog.branch_total("main") == 0


def test_globals_touched_and_callees():
    src = """
    int g;
    int reader() { return g; }
    int writer(int v) { g = v; return 0; }
    int nested() { return reader(); }
    int main() { writer(1); return nested(); }
    """
    prog = parse_program(src)
    assert prog.functions["reader"].globals_touched == {"g"}
    assert prog.functions["writer"].globals_touched == {"g"}
    assert prog.functions["nested"].callees == {"reader"}
    assert prog.functions["main"].callees == {"writer", "nested"}


def test_string_literals_interned_once():
    src = 'int main() { print_str("hi"); print_str("hi"); print_str("ho"); return 0; }'
    prog = parse_program(src)
    assert prog.string_literals == [b"hi", b"ho"]


def test_comments_and_escapes():
    src = """
    // line comment
    /* block
       comment */
    int main() {
      char c;
      c = '\\n';
      print_str("a\\tb\\0");
      return c;
    }
    """
    prog = parse_program(src)
    assert prog.string_literals == [b"a\tb\x00"]

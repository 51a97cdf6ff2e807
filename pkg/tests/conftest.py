import pytest

from carvelift.carver import carve
from carvelift.examples import get_example
from carvelift.minic import SystemInput, parse_program, run_system


@pytest.fixture(scope="session")
def calc():
    return get_example("calc")


@pytest.fixture(scope="session")
def revlines():
    return get_example("revlines")


@pytest.fixture(scope="session")
def fields():
    return get_example("fields")


@pytest.fixture(scope="session")
def calc_trace(calc):
    """Traced run of calc on the canonical '1 + 2' seed."""
    result = run_system(calc.program, SystemInput.make(stdin="1 + 2"),
                        tracing=True, trace_id="calc0")
    assert result.outcome.summary() == "ok:0"
    return result


@pytest.fixture(scope="session")
def calc_units(calc, calc_trace):
    return carve(calc_trace.trace, calc.program)


def parse(src: str):
    return parse_program(src)


TINY_LOOP = """
int main() {
  int i;
  i = 0;
  while (i < 1000000) { i = i + 1; }
  return i;
}
"""

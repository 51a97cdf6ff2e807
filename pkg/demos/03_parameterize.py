"""Find which recorded values came straight from the system input.

A value whose decimal rendering (numbers) or byte content (strings)
occurs verbatim in an input source becomes a parameter, remembering the
exact byte interval it came from.  Binding the original values back must
behave exactly like the plain carved test.
"""

from carvelift import SystemInput, carve, parameterize, run_system, run_unit
from carvelift.examples import get_example

calc = get_example("calc")
seed = SystemInput.make(stdin="1 + 2")

system = run_system(calc.program, seed, tracing=True, trace_id="demo")
tests = carve(system.trace, calc.program)

print(f"input: {seed.stdin!r}")
print()
for unit in tests:
    put = parameterize(unit, seed, calc.program.layouts)
    if not put.parameters:
        continue
    print(f"{unit.id}")
    for p in put.parameters:
        print(f"  {p.slot}: {p.kind:6s} original={p.original!r:24} "
              f"span={p.span.source}[{p.span.start}:{p.span.end}] (bytes {p.render!r})")

add = next(t for t in tests if t.callee == "add")
put = parameterize(add, seed, calc.program.layouts)
print()
print("the add test is now parameterized; any int64 can go into each slot:")
for binding in ({"p1": 1, "p2": 2}, {"p1": 337747944, "p2": 352295539}, {"p1": -5, "p2": 5}):
    result = run_unit(calc.program, put, binding)
    print(f"  add({binding['p1']}, {binding['p2']}) -> {result.outcome.summary():24s} "
          f"output={result.output!r}")

# values that do not appear in the input stay fixed: the result record
# "3" is computed, not read, so num_to_str has nothing to parameterize
n2s = next(t for t in tests if t.callee == "num_to_str")
print()
print(f"num_to_str parameters: {parameterize(n2s, seed, calc.program.layouts).parameters} "
      "(its argument never occurs in the input)")

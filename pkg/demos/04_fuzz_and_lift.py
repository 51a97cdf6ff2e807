"""Fuzz a parameterized unit test, then lift the hits to system level.

The fuzzer binds fresh values (bitflips, random values, 0/max/min, byte
and ASCII noise for strings) and keeps whatever fails or covers new
branches.  Each kept candidate is replayed as a whole-system input by
splicing the new values over the recorded input spans; only runs that
reproduce the behavior count.  Everything else was a false alarm.
"""

from carvelift import SystemInput, carve, fuzz_unit, lift_input, parameterize, run_system, validate
from carvelift.examples import get_example

calc = get_example("calc")
seed = SystemInput.make(stdin="1 + 2")

system = run_system(calc.program, seed, tracing=True, trace_id="demo")
add = next(t for t in carve(system.trace, calc.program) if t.callee == "add")
put = parameterize(add, seed, calc.program.layouts)

result = fuzz_unit(calc.program, put, budget=120, covered=system.coverage, seed=7)
print(f"fuzzed {result.stats.executions} bindings of {put.id}")
print(f"  outcomes       : {result.stats.outcomes}")
print(f"  candidates     : {len(result.candidates)} "
      f"({result.stats.unit_failures} failures, {result.stats.new_coverage} new coverage)")
print()

tally = {"failure-confirmed": 0, "coverage-confirmed": 0, "false-positive": 0}
for i, cand in enumerate(result.candidates):
    lifted = lift_input(seed, cand, cand.binding)
    outcome = validate(calc.program, lifted, cand)
    tally[outcome.classification] += 1
    if i < 6:
        values = ", ".join(f"{s}={v!r}" for s, v in cand.binding.values.items())
        print(f"  [{cand.reason_kind}] {values}")
        print(f"    lifted input : {lifted.stdin!r}")
        print(f"    verdict      : {outcome.classification}"
              + (f" ({outcome.note})" if outcome.note else ""))
print(f"  ... all {len(result.candidates)} candidates validated: {tally}")

# the planted conversion-buffer overflow: operands parse fine, their sum
# needs a 13th character, and the lifted input crashes the real program
big = {"p1": 9223372036854775807, "p2": 2}
lifted = lift_input(seed, put, big)
crash = run_system(calc.program, lifted)
print()
print(f"lifted {lifted.stdin!r}")
print(f"system outcome: {crash.outcome.summary()}")

"""Carve unit tests out of a system execution and replay them.

A carved test is a setup plan (rebuild globals and heap exactly as
recorded) plus a call to the recorded function.  Replaying with the
recorded arguments must reproduce the function's recorded branch
footprint: that is the fidelity contract everything else rests on.
"""

from carvelift import SystemInput, carve, replay_matches, run_system, run_unit
from carvelift.examples import get_example
from carvelift.minic.vm import callee_footprint

calc = get_example("calc")
seed = SystemInput.make(stdin="1 + 2")

system = run_system(calc.program, seed, tracing=True, trace_id="demo")
tests = carve(system.trace, calc.program)

print(f"carved {len(tests)} unit tests from one system run:")
for t in tests[:10]:
    print(f"  {t.id:24s} variant={t.string_variant:15s} "
          f"plan={len(t.setup.instructions)} instrs")
print("  ...")
print()

add = next(t for t in tests if t.callee == "add")
print(f"replaying {add.id} with its recorded arguments:")
replay = run_unit(calc.program, add)
print(f"  outcome   : {replay.outcome.summary()}")
print(f"  footprint : {sorted(callee_footprint(replay, 'add'))}")
print(f"  recorded  : {sorted(add.recorded_footprint)}")
print(f"  faithful  : {replay_matches(calc.program, add)}")
print()

# every carved test passes the same check
bad = [t.id for t in tests if not t.setup_error and not replay_matches(calc.program, t)]
print(f"fidelity across all carved tests: {len(tests) - len(bad)}/{len(tests)} exact")

# a unit run is much cheaper than the system run it came from: the setup
# plan skips the program's expensive start-up entirely
import time

t0 = time.perf_counter()
for _ in range(20):
    run_system(calc.program, seed)
sys_ms = (time.perf_counter() - t0) / 20 * 1000
t0 = time.perf_counter()
for _ in range(20):
    run_unit(calc.program, add)
unit_ms = (time.perf_counter() - t0) / 20 * 1000
print(f"mean system run {sys_ms:.2f}ms vs add unit replay {unit_ms:.2f}ms "
      f"({sys_ms / unit_ms:.0f}x)")

"""Run a MiniC program and look inside its execution trace.

Every function entry is recorded with its arguments, the globals as of
that moment, and a snapshot of the reachable heap; every store to a
global adds an update record.  The trace is what everything else
(carving, parameterization, lifting) is built from.
"""

from carvelift import SystemInput, run_system
from carvelift.examples import get_example

calc = get_example("calc")
seed = SystemInput.make(stdin="1 + 2")

result = run_system(calc.program, seed, tracing=True, trace_id="demo")

print(f"outcome : {result.outcome.summary()}")
print(f"output  : {result.output!r}")
print(f"steps   : {result.steps}")
print(f"branches: {len(result.coverage.counts)} arms covered")
print()

print("recorded invocations:")
for ev in result.trace.events:
    args = ", ".join(
        repr(root.value) if not root.is_ref else f"<node {root.node}>" for root in ev.args
    )
    print(f"  seq {ev.seq:3d}  {ev.callee}({args})  "
          f"[{len(ev.graph.nodes)} heap nodes, footprint {sorted(ev.footprint)}]")

print()
print("global updates:")
for up in result.trace.updates:
    print(f"  seq {up.seq:3d}  {up.name} <- {up.root.value if not up.root.is_ref else 'heap ref'}")

# The add invocation carries the two operand records. Their memory graph,
# restricted to the arguments, is four nodes: two Num records and the two
# digit strings they point at.
add_event = next(e for e in result.trace.events if e.callee == "add")
print()
print(f"the add event's memory graph ({len(add_event.graph.nodes)} nodes incl. globals):")
for node in add_event.graph.nodes.values():
    print(f"  node {node.nid}: {node.size} bytes, data={node.data.hex()}, "
          f"edges={[(off, e.node) for off, e in node.edges.items()]}")

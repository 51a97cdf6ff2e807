"""The whole pipeline under one time budget.

Seeds are expanded with byte-level mutations and executed; everything is
carved and parameterized; then the scheduler repeatedly picks the least
fuzzed function, fuzzes one of its tests, and lifts whatever came up.
Confirmed system tests run immediately, so their coverage steers the
very next selection.  The report mirrors the classic evaluation tables.
"""

from carvelift import CampaignConfig, SystemInput, render_table, run_campaign
from carvelift.examples import get_example

calc = get_example("calc")

config = CampaignConfig(
    seeds=[SystemInput.make(stdin="1 + 2")],
    time_budget_s=20.0,
    fuzz_budget=60,
    rng_seed=7,
    program_name="calc",
)
report = run_campaign(calc.program, config)
print(render_table(report.data))

# focusing all effort on one function multiplies its testing throughput
focused = CampaignConfig(
    seeds=[SystemInput.make(stdin="1 + 2")],
    time_budget_s=20.0,
    fuzz_budget=60,
    rng_seed=7,
    focus={"add"},
    program_name="calc (focus add)",
)
focused_report = run_campaign(calc.program, focused)

plain = report.data["functions"]["invocations"].get("add", 0)
boosted = focused_report.data["functions"]["invocations"].get("add", 0)
print(f"add invocations: {plain} unfocused -> {boosted} focused "
      f"({boosted / max(1, plain):.0f}x)")

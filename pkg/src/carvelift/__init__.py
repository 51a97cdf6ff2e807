"""carvelift: carve parameterized unit tests from MiniC system executions,
fuzz their parameters, and lift the interesting values back to validated
system-level inputs."""

from .campaign import CampaignConfig, UnitStats, run_campaign, seed_expand, select_next
from .carver import UnitTest, carve, reachable_functions, reachable_globals, replay_matches
from .lifter import LiftOutcome, lift_and_validate, lift_input, validate
from .memgraph import (
    MemoryGraph, NodeBudget, SegmentMap, SetupPlan, plan_reconstruction,
    segment_lookup, snapshot, trim_trailing_garbage,
)
from .minic import (
    CoverageMap, Limits, Outcome, ParseError, Program, RunResult, SystemInput,
    Trap, ValidationError, parse_program, run_system, run_unit,
)
from .parameterizer import (
    InputSpan, Parameter, ParameterizedUnitTest, match_value, numeric_repr, parameterize,
)
from .report import Report, render_table
from .tracer import (
    GlobalUpdate, Trace, TraceEvent, deserialize_trace, fold_globals, serialize_trace,
)
from .unitfuzz import (
    Candidate, FuzzResult, ParamBinding, fuzz_unit, mutate_double, mutate_int, mutate_string,
)

__version__ = "0.1.0"

__all__ = [
    "CampaignConfig", "Candidate", "CoverageMap", "FuzzResult", "GlobalUpdate",
    "InputSpan", "LiftOutcome", "Limits", "MemoryGraph", "NodeBudget", "Outcome",
    "ParamBinding", "Parameter", "ParameterizedUnitTest", "ParseError", "Program",
    "Report", "RunResult", "SegmentMap", "SetupPlan", "SystemInput", "Trace",
    "TraceEvent", "Trap", "UnitStats", "UnitTest", "ValidationError", "carve",
    "deserialize_trace", "fold_globals", "fuzz_unit", "lift_and_validate",
    "lift_input", "match_value", "mutate_double", "mutate_int", "mutate_string",
    "numeric_repr", "parameterize", "parse_program", "plan_reconstruction",
    "reachable_functions", "reachable_globals", "render_table", "replay_matches",
    "run_campaign", "run_system", "run_unit", "seed_expand", "segment_lookup",
    "select_next", "serialize_trace", "snapshot", "trim_trailing_garbage",
    "validate",
]

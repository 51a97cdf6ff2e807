"""MiniC: a small C-like language with pointers, records, and a simulated heap."""

from .errors import ParseError, SetupFailure, StepLimitExceeded, Trap, ValidationError
from .parser import parse_program
from .syntax import (
    ANY_PTR, CHAR, DOUBLE, INT, ArrT, CharT, DoubleT, IntT, Layouts, MiniType,
    Program, PtrT, RecT, type_from_str, type_to_str,
)
from .values import INT64_MAX, INT64_MIN, NULL, MiniValue, Ptr, SystemInput
from .vm import (
    CoverageMap, Limits, Outcome, RunResult, branch_from_key, branch_key,
    callee_footprint, run_system, run_unit,
)

__all__ = [
    "ANY_PTR", "ArrT", "CHAR", "CharT", "CoverageMap", "DOUBLE", "DoubleT",
    "INT", "INT64_MAX", "INT64_MIN", "IntT", "Layouts", "Limits", "MiniType",
    "MiniValue", "NULL", "Outcome", "ParseError", "Program", "Ptr", "PtrT",
    "RecT", "RunResult", "SetupFailure", "StepLimitExceeded", "SystemInput",
    "Trap", "ValidationError", "branch_from_key", "branch_key",
    "callee_footprint", "parse_program", "run_system", "run_unit",
    "type_from_str", "type_to_str",
]

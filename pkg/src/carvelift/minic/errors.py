"""Errors and trap taxonomy shared across the MiniC toolchain."""

from __future__ import annotations

TRAP_KINDS = (
    "null-deref",
    "out-of-bounds",
    "use-after-free",
    "div-by-zero",
    "assert-fail",
    "stack-overflow",
)


class MiniCError(Exception):
    """Base class for all MiniC front-end errors."""


class ParseError(MiniCError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class ValidationError(MiniCError):
    """Semantic error found while checking a parsed program."""


class Trap(Exception):
    """A simulated runtime fault; becomes a trap outcome, never crashes the host."""

    def __init__(self, kind: str, function: str = "?", detail: str = ""):
        assert kind in TRAP_KINDS, kind
        super().__init__(f"{kind} in {function}: {detail}" if detail else f"{kind} in {function}")
        self.kind = kind
        self.function = function
        self.detail = detail


class StepLimitExceeded(Exception):
    """Execution budget ran out; a harness artifact, never a failure."""


class SetupFailure(Exception):
    """Unit-test setup could not be performed (truncated memory graph)."""

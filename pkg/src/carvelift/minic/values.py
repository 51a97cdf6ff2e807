"""Runtime value representation for MiniC: 64-bit ints, doubles, chars, pointers."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

INT64_MAX = (1 << 63) - 1
INT64_MIN = -(1 << 63)


def wrap64(v: int) -> int:
    """Two's-complement wrap of an arbitrary Python int into int64 range."""
    return ((v + (1 << 63)) & ((1 << 64) - 1)) - (1 << 63)


def wrap8(v: int) -> int:
    return v & 0xFF


def trunc_div(a: int, b: int) -> int:
    """C-style integer division: truncation toward zero, not floor."""
    q = abs(a) // abs(b)
    return wrap64(-q if (a < 0) != (b < 0) else q)


def trunc_mod(a: int, b: int) -> int:
    return wrap64(a - trunc_div(a, b) * b)


def double_to_int(x: float) -> int:
    """Double-to-int conversion: truncate toward zero, NaN becomes 0, wrap on overflow."""
    if x != x:
        return 0
    if x in (float("inf"), float("-inf")):
        return INT64_MAX if x > 0 else INT64_MIN
    return wrap64(int(x))


def float_bits(x: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", x))[0]


def bits_to_float(b: int) -> float:
    return struct.unpack("<d", struct.pack("<Q", b & ((1 << 64) - 1)))[0]


@dataclass(frozen=True)
class Ptr:
    """A pointer is a (segment id, byte offset) pair; segment 0 is reserved for null."""

    seg: int
    off: int

    @property
    def is_null(self) -> bool:
        return self.seg == 0

    def __repr__(self) -> str:
        return "null" if self.is_null else f"ptr({self.seg}+{self.off})"


NULL = Ptr(0, 0)

# A MiniValue is int (int64 or char8), float (float64), or Ptr.
MiniValue = int | float | Ptr


@dataclass(frozen=True)
class SystemInput:
    """The complete external input of a run: named sources with byte content.

    Conventional source names are "arg0", "arg1", ... and "stdin".
    """

    sources: tuple[tuple[str, bytes], ...] = field(default=())

    def __post_init__(self):
        names = [n for n, _ in self.sources]
        if len(names) != len(set(names)):
            raise ValueError(f"duplicate source names in system input: {names}")

    @staticmethod
    def make(stdin: bytes | str | None = None, args: list[bytes | str] | None = None) -> "SystemInput":
        src: list[tuple[str, bytes]] = []
        for i, a in enumerate(args or []):
            src.append((f"arg{i}", a.encode() if isinstance(a, str) else bytes(a)))
        if stdin is not None:
            src.append(("stdin", stdin.encode() if isinstance(stdin, str) else bytes(stdin)))
        return SystemInput(tuple(src))

    def get(self, name: str) -> bytes | None:
        for n, content in self.sources:
            if n == name:
                return content
        return None

    @property
    def stdin(self) -> bytes | None:
        return self.get("stdin")

    def arg_names(self) -> list[str]:
        return sorted(
            (n for n, _ in self.sources if n.startswith("arg") and n[3:].isdigit()),
            key=lambda n: int(n[3:]),
        )

    def replaced(self, name: str, content: bytes) -> "SystemInput":
        return SystemInput(tuple((n, content if n == name else c) for n, c in self.sources))

    def describe(self) -> str:
        return "; ".join(f"{n}={c!r}" for n, c in self.sources)

"""Byte-addressed segment memory with exact pointer tracking.

Every allocation (stack slot, malloc, global, interned literal) is its own
segment.  Pointers are (segment, offset) pairs, so the remaining length of
any derived pointer is exact by construction.  Pointer values stored into
memory live in a per-segment side table keyed by offset; their 8 bytes in
the raw data stay zero so byte dumps are deterministic.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

from .errors import Trap
from .syntax import CharT, DoubleT, IntT, MiniType, PtrT
from .values import NULL, MiniValue, Ptr, wrap64, wrap8


@dataclass
class Segment:
    sid: int
    data: bytearray
    origin: str  # 'stack' | 'heap' | 'static'
    live: bool = True
    label: str | None = None
    ptrs: dict[int, Ptr] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.data)


class Memory:
    """The allocation table of one VM instance; segment ids count up from 1."""

    def __init__(self):
        self.segments: dict[int, Segment] = {}
        self._next = 1

    def alloc(self, size: int, origin: str, label: str | None = None, content: bytes | None = None) -> int:
        assert size >= 0
        sid = self._next
        self._next += 1
        data = bytearray(content) if content is not None else bytearray(size)
        assert len(data) == size
        self.segments[sid] = Segment(sid, data, origin, True, label)
        return sid

    def kill(self, sid: int):
        self.segments[sid].live = False

    def seg(self, sid: int) -> Segment:
        return self.segments[sid]

    # -- checked access (used by the interpreter) ----------------------------

    def _check(self, ptr: Ptr, size: int, function: str) -> Segment:
        if ptr.is_null:
            raise Trap("null-deref", function)
        seg = self.segments.get(ptr.seg)
        if seg is None:
            raise Trap("use-after-free", function, f"segment {ptr.seg} was never allocated")
        if not seg.live:
            raise Trap("use-after-free", function, f"segment {ptr.seg} is freed")
        if ptr.off < 0 or ptr.off + size > seg.size:
            raise Trap("out-of-bounds", function,
                       f"access [{ptr.off}, {ptr.off + size}) of segment {ptr.seg} (length {seg.size})")
        return seg

    def read(self, ptr: Ptr, ty: MiniType, function: str = "?") -> MiniValue:
        if isinstance(ty, IntT):
            seg = self._check(ptr, 8, function)
            return struct.unpack_from("<q", seg.data, ptr.off)[0]
        if isinstance(ty, CharT):
            seg = self._check(ptr, 1, function)
            return seg.data[ptr.off]
        if isinstance(ty, DoubleT):
            seg = self._check(ptr, 8, function)
            return struct.unpack_from("<d", seg.data, ptr.off)[0]
        if isinstance(ty, PtrT):
            seg = self._check(ptr, 8, function)
            # a slot never written as a pointer reads as null
            return seg.ptrs.get(ptr.off, NULL)
        raise AssertionError(f"cannot read {ty!r} as a value")

    def write(self, ptr: Ptr, ty: MiniType, value: MiniValue, function: str = "?"):
        if isinstance(ty, IntT):
            seg = self._check(ptr, 8, function)
            self._clear_ptr_slots(seg, ptr.off, 8)
            struct.pack_into("<q", seg.data, ptr.off, wrap64(int(value)))
        elif isinstance(ty, CharT):
            seg = self._check(ptr, 1, function)
            self._clear_ptr_slots(seg, ptr.off, 1)
            seg.data[ptr.off] = wrap8(int(value))
        elif isinstance(ty, DoubleT):
            seg = self._check(ptr, 8, function)
            self._clear_ptr_slots(seg, ptr.off, 8)
            struct.pack_into("<d", seg.data, ptr.off, float(value))
        elif isinstance(ty, PtrT):
            seg = self._check(ptr, 8, function)
            self._clear_ptr_slots(seg, ptr.off, 8)
            assert isinstance(value, Ptr)
            if value.is_null:
                seg.ptrs.pop(ptr.off, None)
            else:
                seg.ptrs[ptr.off] = value
            struct.pack_into("<q", seg.data, ptr.off, 0)
        else:
            raise AssertionError(f"cannot write {ty!r} as a value")

    @staticmethod
    def _clear_ptr_slots(seg: Segment, off: int, size: int):
        if not seg.ptrs:
            return
        for k in [k for k in seg.ptrs if k + 8 > off and k < off + size]:
            del seg.ptrs[k]

    # -- raw access (setup plans, probes; no trap semantics) -----------------

    def write_bytes_raw(self, sid: int, off: int, data: bytes):
        seg = self.segments[sid]
        if off < 0 or off + len(data) > seg.size:
            raise ValueError(f"raw write outside segment {sid}")
        self._clear_ptr_slots(seg, off, len(data))
        seg.data[off:off + len(data)] = data

    def write_ptr_raw(self, sid: int, off: int, value: Ptr):
        seg = self.segments[sid]
        if off < 0 or off + 8 > seg.size:
            raise ValueError(f"raw pointer write outside segment {sid}")
        self._clear_ptr_slots(seg, off, 8)
        seg.data[off:off + 8] = b"\x00" * 8
        if not value.is_null:
            seg.ptrs[off] = value

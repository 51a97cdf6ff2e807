"""Bundled MiniC subject programs with seed inputs and planted defects.

Each subject lives in `<name>/` with `prog.mc`, `seeds/*.txt`, and a
`defects.md` describing what was planted and how to trigger it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

from ..inputfiles import parse_input_spec
from ..minic.parser import parse_program
from ..minic.syntax import Program
from ..minic.values import SystemInput


@dataclass(frozen=True)
class PlantedDefect:
    function: str
    trigger: str
    trap_kind: str
    trigger_input: SystemInput  # one concrete system input that reaches it


@dataclass
class ExampleSubject:
    name: str
    source: str
    seeds: list[tuple[str, SystemInput]]
    defects: list[PlantedDefect]
    defects_doc: str
    _program: Program | None = field(default=None, repr=False)

    @property
    def program(self) -> Program:
        if self._program is None:
            self._program = parse_program(self.source, f"{self.name}.mc")
        return self._program

    def seed_inputs(self) -> list[SystemInput]:
        return [si for _, si in self.seeds]


_DEFECTS = {
    "calc": [PlantedDefect(
        "num_to_str",
        "sum needs 13+ characters (>= 10^12, or <= -10^11 with the sign)",
        "out-of-bounds",
        SystemInput.make(stdin="9999999999999 + 1"),
    )],
    "revlines": [PlantedDefect(
        "copy_line",
        "an input line of 33 or more characters",
        "out-of-bounds",
        SystemInput.make(stdin="x" * 40),
    )],
    "fields": [PlantedDefect(
        "select_field",
        "field index between 9 and 100",
        "out-of-bounds",
        SystemInput.make(stdin="alpha bravo", args=["10"]),
    )],
}

_NAMES = ("calc", "revlines", "fields")


def _load_subject(name: str) -> ExampleSubject:
    root = resources.files(__package__) / name
    source = (root / "prog.mc").read_text()
    seeds = []
    seed_dir = root / "seeds"
    for entry in sorted(seed_dir.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".txt"):
            seeds.append((entry.name, parse_input_spec(entry.read_bytes())))
    return ExampleSubject(name, source, seeds, _DEFECTS[name], (root / "defects.md").read_text())


def list_examples() -> list[ExampleSubject]:
    """All bundled subjects, in a fixed order."""
    return [_load_subject(name) for name in _NAMES]


def get_example(name: str) -> ExampleSubject:
    if name not in _NAMES:
        raise KeyError(f"no bundled example named {name!r}; have {', '.join(_NAMES)}")
    return _load_subject(name)

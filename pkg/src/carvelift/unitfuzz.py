"""Unit-level fuzzing: bind fresh values to parameter slots and execute.

The mutator catalog: for ints and doubles, bitflips, uniform random
values, and the constants 0, max, min; for strings, bitflips, random
byte and printable-ASCII sequences, all-0x00 and all-0xFF strings of the
original length, and repetitions of a random piece of the original.
A run becomes a candidate when it fails or covers a branch nothing has
covered before; candidates are later validated by lifting.
"""

from __future__ import annotations

import json
import random
import struct
import sys
import time
from dataclasses import dataclass, field

from .minic.syntax import Program
from .minic.values import INT64_MAX, INT64_MIN, bits_to_float, float_bits, wrap64
from .minic.vm import BranchId, CoverageMap, Limits, RunResult, branch_from_key, branch_key, run_unit
from .parameterizer import (
    Parameter, ParameterizedUnitTest, param_from_json, param_to_json,
)
from .tracer import input_from_json, input_to_json
from .minic.values import MiniValue, SystemInput

DBL_MAX = sys.float_info.max
MAX_RANDOM_STRING = 64  # keeps unit executions fast while still exercising length-dependent code

INT_STRATEGIES = ("bitflip", "random", "zero", "max", "min")
DOUBLE_STRATEGIES = ("bitflip", "random", "zero", "max", "min")
STRING_STRATEGIES = ("bitflip", "random-bytes", "random-ascii", "zeros", "ones", "repeat")


# ---------------------------------------------------------------------------
# Mutators
# ---------------------------------------------------------------------------

def int_strategy(name: str, v: int, rng: random.Random) -> int:
    if name == "bitflip":
        return wrap64(v ^ (1 << rng.randrange(64)))
    if name == "random":
        return wrap64(rng.getrandbits(64))
    if name == "zero":
        return 0
    if name == "max":
        return INT64_MAX
    if name == "min":
        return INT64_MIN
    raise ValueError(name)


def double_strategy(name: str, v: float, rng: random.Random) -> float:
    if name == "bitflip":
        return bits_to_float(float_bits(v) ^ (1 << rng.randrange(64)))
    if name == "random":
        return bits_to_float(rng.getrandbits(64))  # NaN and inf patterns are fair game
    if name == "zero":
        return 0.0
    if name == "max":
        return DBL_MAX
    if name == "min":
        return -DBL_MAX
    raise ValueError(name)


def string_strategy(name: str, v: bytes, rng: random.Random) -> bytes:
    if name == "bitflip":
        if not v:
            return bytes([rng.randrange(256)])
        out = bytearray(v)
        out[rng.randrange(len(out))] ^= 1 << rng.randrange(8)
        return bytes(out)
    if name == "random-bytes":
        return bytes(rng.randrange(256) for _ in range(rng.randint(1, MAX_RANDOM_STRING)))
    if name == "random-ascii":
        return bytes(rng.randrange(0x20, 0x7F) for _ in range(rng.randint(1, MAX_RANDOM_STRING)))
    if name == "zeros":
        return b"\x00" * max(1, len(v))
    if name == "ones":
        return b"\xff" * max(1, len(v))
    if name == "repeat":
        if not v:
            return bytes([rng.randrange(256)])
        i = rng.randrange(len(v))
        j = rng.randint(i + 1, len(v))
        return v[i:j] * rng.randint(2, 8)
    raise ValueError(name)


def mutate_int(v: int, rng: random.Random) -> int:
    """Strategy drawn uniformly from the integer catalog."""
    return int_strategy(rng.choice(INT_STRATEGIES), v, rng)


def mutate_double(v: float, rng: random.Random) -> float:
    return double_strategy(rng.choice(DOUBLE_STRATEGIES), v, rng)


def mutate_string(v: bytes, rng: random.Random) -> bytes:
    return string_strategy(rng.choice(STRING_STRATEGIES), v, rng)


def mutate_for(kind: str, value, rng: random.Random) -> tuple[MiniValue | bytes, str]:
    if kind == "string":
        name = rng.choice(STRING_STRATEGIES)
        return string_strategy(name, bytes(value), rng), name
    if kind == "float":
        name = rng.choice(DOUBLE_STRATEGIES)
        return double_strategy(name, float(value), rng), name
    name = rng.choice(INT_STRATEGIES)
    return int_strategy(name, int(value), rng), name


# ---------------------------------------------------------------------------
# Bindings and candidates
# ---------------------------------------------------------------------------

@dataclass
class ParamBinding:
    values: dict[str, MiniValue | bytes]
    mutators: dict[str, str] = field(default_factory=dict)
    seed: int = 0
    exec_index: int = 0


@dataclass
class Candidate:
    test_id: str
    callee: str
    exec_index: int
    binding: ParamBinding
    reason_kind: str  # 'unit-failure' | 'new-coverage'
    trap_kind: str | None = None
    branches: list[BranchId] = field(default_factory=list)
    trap_function: str | None = None
    # carried so candidates are self-sufficient for lifting:
    parameters: list[Parameter] = field(default_factory=list)
    input: SystemInput = field(default_factory=lambda: SystemInput(()))


@dataclass
class FuzzStats:
    executions: int = 0
    unit_failures: int = 0
    new_coverage: int = 0
    anchor_ok: bool = True
    outcomes: dict[str, int] = field(default_factory=dict)
    total_time_s: float = 0.0
    total_steps: int = 0
    calls: dict[str, int] = field(default_factory=dict)  # function entries across all runs
    func_steps: dict[str, int] = field(default_factory=dict)

    @property
    def mean_time_s(self) -> float:
        return self.total_time_s / self.executions if self.executions else 0.0


@dataclass
class FuzzResult:
    candidates: list[Candidate]
    stats: FuzzStats
    coverage_delta: CoverageMap


class FuzzSetupError(Exception):
    """The test's context cannot be reconstructed; fuzzing it is pointless."""


def make_bindings(test: ParameterizedUnitTest, budget: int, seed: int) -> list[ParamBinding]:
    """The deterministic binding schedule: originals first, then `budget - 1`
    rounds where every parameter mutates independently from its original."""
    rng = random.Random(seed)
    bindings = [ParamBinding(test.original_binding(), {p.slot: "original" for p in test.parameters},
                             seed, 0)]
    for i in range(1, budget):
        values = {}
        mutators = {}
        for p in test.parameters:
            values[p.slot], mutators[p.slot] = mutate_for(p.kind, p.original, rng)
        bindings.append(ParamBinding(values, mutators, seed, i))
    return bindings


def fuzz_unit(program: Program, test: ParameterizedUnitTest, budget: int,
              covered: CoverageMap, seed: int, limits: Limits | None = None,
              workers: int = 1, deadline: float | None = None) -> FuzzResult:
    """Run `budget` bindings of one parameterized test.

    A run is a candidate iff it fails, or covers a branch absent from
    `covered` (which accumulates over the executions of this call, so
    candidate branch sets never overlap).  The anchor run with the
    original values is never a candidate.  Deterministic given the seed;
    a `deadline` (time.monotonic value) may cut the schedule short.
    """
    if not test.parameters:
        raise ValueError(f"test {test.id} has no parameters to fuzz")
    if test.base.setup_error:
        raise FuzzSetupError(f"test {test.id}: context graph was truncated at carving time")
    bindings = make_bindings(test, budget, seed)
    runs = _execute(program, test, bindings, limits, workers, deadline)

    covered_now = covered.copy()
    delta = CoverageMap()
    stats = FuzzStats()
    candidates: list[Candidate] = []
    for binding, (result, elapsed) in zip(bindings, runs):
        if result.outcome.kind == "setup-error":
            raise FuzzSetupError(f"test {test.id}: {result.outcome.detail}")
        stats.executions += 1
        stats.total_time_s += elapsed
        stats.total_steps += result.steps
        for fn, n in result.calls.items():
            stats.calls[fn] = stats.calls.get(fn, 0) + n
        for fn, n in result.func_steps.items():
            stats.func_steps[fn] = stats.func_steps.get(fn, 0) + n
        key = result.outcome.kind if not result.outcome.is_failure else f"trap:{result.outcome.trap_kind}"
        stats.outcomes[key] = stats.outcomes.get(key, 0) + 1
        is_anchor = binding.exec_index == 0
        if result.outcome.is_failure:
            if is_anchor:
                stats.anchor_ok = False  # replay fidelity should make this impossible
            else:
                stats.unit_failures += 1
                candidates.append(Candidate(test.id, test.callee, binding.exec_index, binding,
                                            "unit-failure", result.outcome.trap_kind, [],
                                            result.outcome.trap_function,
                                            test.parameters, test.base.input))
        else:
            fresh = sorted(b for b in result.coverage.counts if not covered_now.covered(b))
            if fresh and not is_anchor:
                stats.new_coverage += 1
                candidates.append(Candidate(test.id, test.callee, binding.exec_index, binding,
                                            "new-coverage", None, fresh, None,
                                            test.parameters, test.base.input))
        covered_now.merge(result.coverage)
        delta.merge(result.coverage)
    return FuzzResult(candidates, stats, delta)


def _execute(program, test, bindings, limits, workers, deadline) -> list[tuple[RunResult, float]]:
    if workers > 1:
        return _execute_parallel(program, test, bindings, limits, workers)
    out = []
    for b in bindings:
        if deadline is not None and time.monotonic() >= deadline and b.exec_index > 0:
            break
        out.append(_one_run(program, test, b, limits))
    return out


def _one_run(program, test, binding: ParamBinding, limits) -> tuple[RunResult, float]:
    t0 = time.perf_counter()
    if binding.exec_index == 0:
        result = run_unit(program, test, None, limits)
    else:
        result = run_unit(program, test, binding.values, limits)
    return result, time.perf_counter() - t0


def _execute_parallel(program, test, bindings, limits, workers):
    # runs are independent; the candidate fold stays sequential by index,
    # so sharding cannot change the outcome
    from concurrent.futures import ProcessPoolExecutor

    chunks = [bindings[i::workers] for i in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_chunk, program, test, chunk, limits) for chunk in chunks]
        results = {}
        for fut in futures:
            results.update(fut.result())
    return [results[b.exec_index] for b in bindings]


def _run_chunk(program, test, bindings, limits):
    return {b.exec_index: _one_run(program, test, b, limits) for b in bindings}


# ---------------------------------------------------------------------------
# Serialization (*.cand.jsonl)
# ---------------------------------------------------------------------------

def _value_to_json(kind: str, v) -> dict:
    if kind == "string":
        return {"s": bytes(v).hex()}
    if kind == "float":
        return {"b": f"{float_bits(float(v)):016x}"}
    return {"v": int(v)}


def _value_from_json(d: dict):
    if "s" in d:
        return bytes.fromhex(d["s"])
    if "b" in d:
        return bits_to_float(int(d["b"], 16))
    return int(d["v"])


def candidate_to_json(c: Candidate) -> dict:
    kinds = {p.slot: p.kind for p in c.parameters}
    return {
        "test": c.test_id,
        "callee": c.callee,
        "exec": c.exec_index,
        "reason": c.reason_kind,
        "trap": c.trap_kind,
        "trap_fn": c.trap_function,
        "branches": [branch_key(b) for b in c.branches],
        "binding": {slot: _value_to_json(kinds[slot], v) for slot, v in c.binding.values.items()},
        "mutators": dict(c.binding.mutators),
        "seed": c.binding.seed,
        "params": [param_to_json(p) for p in c.parameters],
        "input": input_to_json(c.input),
    }


def candidate_from_json(d: dict) -> Candidate:
    params = [param_from_json(p) for p in d["params"]]
    binding = ParamBinding({slot: _value_from_json(v) for slot, v in d["binding"].items()},
                           dict(d["mutators"]), int(d["seed"]), int(d["exec"]))
    return Candidate(d["test"], d["callee"], int(d["exec"]), binding, d["reason"],
                     d.get("trap"), [branch_from_key(k) for k in d["branches"]],
                     d.get("trap_fn"), params, input_from_json(d["input"]))


def save_candidates(cands: list[Candidate], path):
    with open(path, "w") as fh:
        for c in cands:
            fh.write(json.dumps(candidate_to_json(c), separators=(",", ":")) + "\n")


def load_candidates(path) -> list[Candidate]:
    out = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                out.append(candidate_from_json(json.loads(line)))
    return out

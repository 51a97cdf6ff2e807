"""Lifting: replay unit-level discoveries as system-level inputs.

A candidate's new parameter values are spliced into the recorded input
spans; the whole program then runs on the edited input.  Only runs that
reproduce the same trap kind (or cover every claimed branch) are
confirmed; everything else is a false positive and stays out of reports.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from .minic.syntax import Program
from .minic.values import SystemInput
from .minic.vm import Limits, RunResult, branch_key, run_system
from .parameterizer import ParameterizedUnitTest, render_value
from .tracer import input_to_json
from .unitfuzz import Candidate, ParamBinding

FAILURE_CONFIRMED = "failure-confirmed"
COVERAGE_CONFIRMED = "coverage-confirmed"
FALSE_POSITIVE = "false-positive"


@dataclass
class LiftOutcome:
    candidate: Candidate
    lifted: SystemInput
    classification: str
    system: RunResult
    note: str = ""

    @property
    def confirmed(self) -> bool:
        return self.classification != FALSE_POSITIVE


def lift_input(inputs: SystemInput, test: ParameterizedUnitTest | Candidate,
               binding: ParamBinding | dict) -> SystemInput:
    """Derive the system input with every changed parameter value spliced
    over its span.

    Replacements are applied right-to-left within each source, so earlier
    offsets stay valid; spans of unchanged parameters are left untouched.
    """
    params = test.parameters
    values = binding.values if isinstance(binding, ParamBinding) else binding
    per_source: dict[str, list[tuple]] = {}
    for p in params:
        v = values[p.slot]
        if _same_value(p.kind, v, p.original):
            continue
        per_source.setdefault(p.span.source, []).append((p.span.start, p.span.end, render_value(p, v)))
    out = inputs
    for source, edits in per_source.items():
        content = out.get(source)
        for start, end, data in sorted(edits, reverse=True):
            content = content[:start] + data + content[end:]
        out = out.replaced(source, content)
    return out


def _same_value(kind: str, a, b) -> bool:
    if kind == "string":
        return bytes(a) == bytes(b)
    if kind == "float":
        import struct
        return struct.pack("<d", float(a)) == struct.pack("<d", float(b))
    return int(a) == int(b)


def validate(program: Program, lifted: SystemInput, candidate: Candidate,
             limits: Limits | None = None, match_location: bool = False) -> LiftOutcome:
    """Run the system on the lifted input and classify the outcome.

    failure-confirmed requires the same trap kind as the unit failure
    (same trapping function too, under match_location); coverage-confirmed
    requires every branch of the candidate's new-coverage set; anything
    else, including an exhausted step budget, is a false positive.
    """
    result = run_system(program, lifted, limits)
    if candidate.reason_kind == "unit-failure":
        if result.outcome.is_failure and result.outcome.trap_kind == candidate.trap_kind:
            if match_location and candidate.trap_function is not None \
                    and result.outcome.trap_function != candidate.trap_function:
                return LiftOutcome(candidate, lifted, FALSE_POSITIVE, result,
                                   note=f"same trap kind in {result.outcome.trap_function}, "
                                        f"not {candidate.trap_function}")
            return LiftOutcome(candidate, lifted, FAILURE_CONFIRMED, result)
        if result.outcome.is_failure:
            # a different defect surfaced; logged distinctly, still suppressed
            return LiftOutcome(candidate, lifted, FALSE_POSITIVE, result,
                               note=f"different-trap:{result.outcome.trap_kind}")
        return LiftOutcome(candidate, lifted, FALSE_POSITIVE, result)
    covered = all(result.coverage.covered(b) for b in candidate.branches)
    if covered and result.outcome.kind == "ok":
        return LiftOutcome(candidate, lifted, COVERAGE_CONFIRMED, result)
    if covered and result.outcome.is_failure:
        # covering run that also crashes: still a usable system test, but
        # classify by what it demonstrates
        return LiftOutcome(candidate, lifted, COVERAGE_CONFIRMED, result, note="system run trapped")
    return LiftOutcome(candidate, lifted, FALSE_POSITIVE, result)


def lift_and_validate(program: Program, candidate: Candidate,
                      limits: Limits | None = None, match_location: bool = False) -> LiftOutcome:
    lifted = lift_input(candidate.input, candidate, candidate.binding)
    return validate(program, lifted, candidate, limits, match_location)


def validate_many(program: Program, candidates: list[Candidate],
                  limits: Limits | None = None, match_location: bool = False,
                  workers: int = 1) -> list[LiftOutcome]:
    """Lift and validate a batch; validations are independent system runs,
    so sharding cannot change the outcomes (results keep input order)."""
    if workers <= 1 or len(candidates) < 2:
        return [lift_and_validate(program, c, limits, match_location) for c in candidates]
    from concurrent.futures import ProcessPoolExecutor

    chunks = [candidates[i::workers] for i in range(workers)]
    outcomes: dict[int, LiftOutcome] = {}
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_validate_chunk, program, chunk,
                               [i for i in range(k, len(candidates), workers)],
                               limits, match_location)
                   for k, chunk in enumerate(chunks)]
        for fut in futures:
            outcomes.update(fut.result())
    return [outcomes[i] for i in range(len(candidates))]


def _validate_chunk(program, chunk, indices, limits, match_location):
    return {i: lift_and_validate(program, c, limits, match_location)
            for i, c in zip(indices, chunk)}


# ---------------------------------------------------------------------------
# Confirmed system tests on disk: input files plus a manifest that names
# the unit test and binding behind each one (the debugging breadcrumb).
# ---------------------------------------------------------------------------

def write_confirmed(outcomes: list[LiftOutcome], directory: str) -> str:
    os.makedirs(directory, exist_ok=True)
    manifest = []
    for i, oc in enumerate(outcomes):
        if not oc.confirmed:
            continue
        stem = f"{i:04d}"
        sources = dict(oc.lifted.sources)
        if set(sources) == {"stdin"}:
            fname = f"{stem}.input"
            with open(os.path.join(directory, fname), "wb") as fh:
                fh.write(sources["stdin"])
        else:
            fname = f"{stem}.json"
            with open(os.path.join(directory, fname), "w") as fh:
                json.dump({"sources": input_to_json(oc.lifted)}, fh)
        manifest.append({
            "file": fname,
            "classification": oc.classification,
            "unit_test": oc.candidate.test_id,
            "callee": oc.candidate.callee,
            "binding": {slot: repr(v) for slot, v in oc.candidate.binding.values.items()},
            "mutators": dict(oc.candidate.binding.mutators),
            "rng_seed": oc.candidate.binding.seed,
            "exec_index": oc.candidate.exec_index,
            "trap": oc.system.outcome.trap_kind if oc.system.outcome.is_failure else None,
            "new_branches": [branch_key(b) for b in oc.candidate.branches],
        })
    path = os.path.join(directory, "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2)
    return path

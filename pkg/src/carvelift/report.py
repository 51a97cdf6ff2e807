"""Campaign reports: a JSON document plus plain-text tables.

The tables mirror the classic evaluation layout: execution times and
speedup, lifted-test counts, branch coverage, functions reached, and the
focus-function accounting (invocations and interpreter steps).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field


@dataclass
class Report:
    data: dict = field(default_factory=dict)

    @staticmethod
    def build(state, started_at: float, wall_s: float) -> "Report":
        cfg = state.config
        prog = state.program
        total_branches = prog.branch_total()
        sys_br = len(state.system_coverage.counts)
        mean_unit_ms = 1000.0 * state.unit_time_s / state.unit_execs if state.unit_execs else 0.0
        mean_system_ms = 1000.0 * state.system_time_s / state.system_runs if state.system_runs else 0.0
        confirmed = [oc for oc in state.lift_outcomes if oc.confirmed]
        lifted_failures = sum(1 for oc in state.lift_outcomes if oc.classification == "failure-confirmed")
        lifted_coverage = sum(1 for oc in state.lift_outcomes if oc.classification == "coverage-confirmed")
        false_pos = sum(1 for oc in state.lift_outcomes if not oc.confirmed)
        per_fn_unit = {
            fn: {
                "executions": state.unit_execs_by_fn.get(fn, 0),
                "mean_ms": 1000.0 * state.unit_time_by_fn.get(fn, 0.0) / max(1, state.unit_execs_by_fn.get(fn, 0)),
            }
            for fn in sorted(state.unit_execs_by_fn)
        }
        data = {
            "meta": {
                "program": cfg.program_name,
                "generated_at": time.strftime("%Y-%m-%dT%H:%M:%S", time.localtime(started_at)),
                "wall_s": round(wall_s, 3),
                "iterations_completed": sum(1 for r in state.iterations if r.complete),
                "iterations_total": len(state.iterations),
                "config": {
                    "seeds": [[name, content.hex()] for si in cfg.seeds for name, content in si.sources],
                    "n_seeds": len(cfg.seeds),
                    "time_budget_s": cfg.time_budget_s,
                    "fuzz_budget": cfg.fuzz_budget,
                    "rng_seed": cfg.rng_seed,
                    "focus": sorted(cfg.focus) if cfg.focus else None,
                    "seed_expand_n": cfg.seed_expand_n,
                    "workers": cfg.workers,
                    "max_iterations": cfg.max_iterations,
                    "match_location": cfg.match_location,
                    "node_budget": [cfg.node_budget.max_nodes, cfg.node_budget.max_bytes],
                    "step_budgets": [cfg.system_limits.step_budget, cfg.unit_limits.step_budget],
                },
                "notes": list(state.notes),
            },
            "seed_runs": list(state.seed_runs),
            "units": {
                "carved": len(state.units),
                "parameterized": sum(1 for p in state.puts if p.parameters),
                "eligible": len(state.eligible),
                "setup_errors": sum(1 for u in state.units if u.setup_error),
                "tests": [
                    {"id": p.id, "callee": p.callee, "parameters": len(p.parameters),
                     "variant": p.base.string_variant,
                     "spans": [[q.span.source, q.span.start, q.span.end] for q in p.parameters]}
                    for p in state.puts
                ],
            },
            "fuzzing": {
                "unit_executions": state.unit_execs,
                "failure_candidates": sum(r.failure_candidates for r in state.iterations),
                "coverage_candidates": sum(r.coverage_candidates for r in state.iterations),
            },
            "lifting": {
                "attempted": len(state.lift_outcomes),
                "failure_confirmed": lifted_failures,
                "coverage_confirmed": lifted_coverage,
                "false_positives": false_pos,
                "different_trap": sum(1 for oc in state.lift_outcomes
                                      if oc.note.startswith("different-trap:")),
                "lifted_total": len(confirmed),
                "percent_lifted": round(100.0 * len(confirmed) / state.unit_execs, 4)
                if state.unit_execs else 0.0,
            },
            "coverage": {
                "system_tests": state.system_runs,
                "system_branches": sys_br,
                "cumulative_branches": len(state.cumulative.counts),
                "total_branches": total_branches,
                "system_percent": round(100.0 * sys_br / total_branches, 2) if total_branches else 0.0,
            },
            "times": {
                "mean_unit_ms": round(mean_unit_ms, 4),
                "mean_system_ms": round(mean_system_ms, 4),
                "speedup": round(mean_system_ms / mean_unit_ms, 2) if mean_unit_ms else None,
                "per_function_unit": per_fn_unit,
            },
            "functions": {
                "reached": sorted(state.functions_reached),
                "reached_count": len(state.functions_reached),
                "invocations": dict(sorted(state.invocations_all.items())),
                "steps": dict(sorted(state.func_steps_all.items())),
            },
            "focus": {
                "functions": sorted(cfg.focus) if cfg.focus else [],
                "invocations": {fn: state.invocations_all.get(fn, 0) for fn in sorted(cfg.focus)}
                if cfg.focus else {},
                "steps": {fn: state.func_steps_all.get(fn, 0) for fn in sorted(cfg.focus)}
                if cfg.focus else {},
            },
            "failures": [f.to_dict() for f in state.failures],
            "iterations": [r.to_dict() for r in state.iterations],
        }
        return Report(data)

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.data, indent=indent, sort_keys=False)

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json() + "\n")

    @staticmethod
    def load(path) -> "Report":
        with open(path) as fh:
            return Report(json.load(fh))

    def render_table(self) -> str:
        return render_table(self.data)


def comparable_view(data: dict, upto_iterations: int | None = None) -> dict:
    """The wall-clock-independent projection of a report, cut at a completed
    iteration count; two runs with the same config and seed agree on it."""
    k = upto_iterations
    if k is None:
        k = sum(1 for r in data["iterations"] if r["complete"])
    iters = [r for r in data["iterations"] if r["index"] < k and r["complete"]]
    failures = [f for f in data["failures"] if f["iteration"] < k]
    meta = data["meta"]["config"]
    return {
        "config": meta,
        "seed_runs": data["seed_runs"],
        "units": data["units"],
        "iterations": iters,
        "failures": failures,
    }


def _table(rows: list[list[str]], header: list[str]) -> str:
    widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
    def fmt(row):
        return "  ".join(str(c).ljust(w) for c, w in zip(row, widths)).rstrip()
    lines = [fmt(header), fmt(["-" * w for w in widths])]
    lines += [fmt(r) for r in rows]
    return "\n".join(lines)


def render_table(data: dict) -> str:
    out = []
    meta = data["meta"]
    out.append(f"campaign report: {meta['program']}")
    out.append(f"  generated {meta['generated_at']}  wall {meta['wall_s']}s  "
               f"iterations {meta['iterations_completed']} completed / {meta['iterations_total']} total")
    if meta["notes"]:
        for n in meta["notes"]:
            out.append(f"  note: {n}")
    out.append("")

    t = data["times"]
    out.append("Execution times")
    out.append(_table([[meta["program"], f"{t['mean_unit_ms']:.3f}", f"{t['mean_system_ms']:.3f}",
                        f"{t['speedup']}x" if t["speedup"] else "n/a"]],
                      ["subject", "unit ms", "system ms", "speedup"]))
    out.append("")

    lf = data["lifting"]
    fz = data["fuzzing"]
    out.append("Lifted unit tests")
    out.append(_table([[meta["program"], fz["unit_executions"], lf["lifted_total"],
                        f"{lf['percent_lifted']}%"]],
                      ["subject", "#unit tests", "#lifted tests", "% lifted"]))
    out.append("")

    cv = data["coverage"]
    out.append("Branch coverage")
    out.append(_table([[meta["program"], cv["system_tests"],
                        f"{cv['system_branches']}/{cv['total_branches']}",
                        f"{cv['system_percent']}%"]],
                      ["subject", "#system tests", "branches", "coverage"]))
    out.append("")

    fns = data["functions"]
    out.append(f"Functions reached: {fns['reached_count']}")
    out.append("  " + ", ".join(fns["reached"]))
    out.append("")

    if data["focus"]["functions"]:
        out.append("Focus functions")
        rows = [[fn, data["focus"]["invocations"].get(fn, 0), data["focus"]["steps"].get(fn, 0)]
                for fn in data["focus"]["functions"]]
        out.append(_table(rows, ["function", "invocations", "steps"]))
        out.append("")

    out.append(f"Confirmed failures: {len(data['failures'])}")
    for f in data["failures"]:
        src = f.get("input_preview", "")
        out.append(f"  [{f['origin']}] trap {f['trap_kind']} in {f['trap_function']}"
                   + (f" via {f['unit_test']}" if f.get("unit_test") else "")
                   + f"  input: {src}")
    out.append("")
    out.append("Lifting outcomes: "
               f"{lf['failure_confirmed']} failure-confirmed, "
               f"{lf['coverage_confirmed']} coverage-confirmed, "
               f"{lf['false_positives']} false positives "
               f"({lf['different_trap']} with a different trap kind)")
    return "\n".join(out) + "\n"

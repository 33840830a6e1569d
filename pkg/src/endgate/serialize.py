"""Schedule files, trajectory tables and summary records.

Trajectory CSV header is fixed: ``k,time,p,c_abs,d_abs,gate_applied``.
Floats in CSV use 17 significant digits; JSON floats use Python's shortest
round-trip repr, so both reload bit-for-bit.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from .protocol import EndGate, ProtocolTrace, StepRecord, replay_schedule
from .sector import ChainSpec, DisorderSpec, build_hamiltonian
from .switched import Segment, SegmentPlan, SwitchMode, replay_plan

SCHEMA_VERSION = 1
TRAJECTORY_FIELDS = ("k", "time", "p", "c_abs", "d_abs", "gate_applied")


class ScheduleFileError(OSError):
    pass


@dataclass(frozen=True)
class TrajectoryRow:
    k: int
    time: float
    p: float
    c_abs: Optional[float]
    d_abs: Optional[float]
    gate_applied: bool


def trace_rows(trace: ProtocolTrace) -> List[TrajectoryRow]:
    rows, elapsed = [], 0.0
    for k, step in enumerate(trace.steps, start=1):
        elapsed += step.time
        c_abs = abs(step.gate.c) if step.gate is not None else None
        d_abs = abs(step.gate.d) if step.gate is not None else None
        rows.append(TrajectoryRow(k, elapsed, step.cumulative_probability, c_abs, d_abs, step.applied))
    return rows


def plan_rows(plan: SegmentPlan) -> List[TrajectoryRow]:
    """One row per greedy cycle; ``c_abs``/``d_abs`` describe the amplitudes offered to the gate."""
    rows, elapsed, k = [], 0.0, 0
    segments = plan.segments
    for i, seg in enumerate(segments):
        if seg.is_gate:
            continue
        elapsed += seg.duration
        gated = i + 1 < len(segments) and segments[i + 1].is_gate
        if gated:
            elapsed += segments[i + 1].duration
        k += 1
        a_n, a_t = seg.end_amplitudes if seg.end_amplitudes is not None else (0.0, 0.0)
        weight = np.hypot(abs(a_n), abs(a_t))
        c_abs = abs(a_n) / weight if weight > 0 else None
        d_abs = abs(a_t) / weight if weight > 0 else None
        p = segments[i + 1].target_probability if gated else seg.target_probability
        rows.append(TrajectoryRow(k, elapsed, p, c_abs, d_abs, gated))
    return rows


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.17g" % value


def rows_to_csv(rows, fields=TRAJECTORY_FIELDS) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        record = row if isinstance(row, dict) else row.__dict__
        writer.writerow([_fmt(record[f]) for f in fields])
    return buf.getvalue()


def read_trajectory_csv(path) -> List[TrajectoryRow]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != TRAJECTORY_FIELDS:
            raise ScheduleFileError(f"{path}: unexpected trajectory header {reader.fieldnames}")
        return [
            TrajectoryRow(
                int(r["k"]), float(r["time"]), float(r["p"]),
                float(r["c_abs"]) if r["c_abs"] else None,
                float(r["d_abs"]) if r["d_abs"] else None,
                r["gate_applied"] == "1",
            )
            for r in reader
        ]


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_text(path, text: str) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise ScheduleFileError(f"cannot write {path}: {exc}") from exc


def write_trajectory(rows, path, fmt: str = "csv") -> Path:
    path = Path(path).with_suffix("." + fmt)
    if fmt == "csv":
        write_text(path, rows_to_csv(rows))
    else:
        write_text(path, dumps({
            "schema": SCHEMA_VERSION,
            "fields": list(TRAJECTORY_FIELDS),
            "rows": [r.__dict__ for r in rows],
        }))
    return path


def chain_to_dict(spec: ChainSpec) -> dict:
    return {
        "n_sites": spec.n_sites,
        "coupling_model": spec.coupling_model,
        "base_coupling": spec.base_coupling,
        "disorder": None if spec.disorder is None else {
            "relative_amplitude": spec.disorder.relative_amplitude,
            "seed": int(spec.disorder.seed),
        },
        "field_strength": spec.field_strength,
    }


def chain_from_dict(data: dict) -> ChainSpec:
    disorder = data.get("disorder")
    return ChainSpec(
        n_sites=int(data["n_sites"]),
        coupling_model=data["coupling_model"],
        base_coupling=float(data["base_coupling"]),
        disorder=None if disorder is None
        else DisorderSpec(float(disorder["relative_amplitude"]), int(disorder["seed"])),
        field_strength=data.get("field_strength"),
    )


def schedule_to_dict(schedule: Union[ProtocolTrace, SegmentPlan]) -> dict:
    if isinstance(schedule, ProtocolTrace):
        if schedule.spec is None:
            raise ValueError("only traces built from a ChainSpec can be exported")
        steps = []
        for step in schedule.steps:
            gate = step.gate
            steps.append({
                "t": step.time,
                "c_re": None if gate is None else complex(gate.c).real,
                "c_im": None if gate is None else complex(gate.c).imag,
                "d_re": None if gate is None else complex(gate.d).real,
                "d_im": None if gate is None else complex(gate.d).imag,
                "applied": step.applied,
                "p": step.cumulative_probability,
            })
        return {
            "schema": SCHEMA_VERSION,
            "kind": "endgate",
            "chain": chain_to_dict(schedule.spec),
            "steps": steps,
            "final_p": schedule.success_probability,
        }
    mode = schedule.mode
    return {
        "schema": SCHEMA_VERSION,
        "kind": "switched",
        "chain": chain_to_dict(schedule.spec),
        "switch": {
            "mode": mode.kind,
            "field_strength": mode.field_strength,
            "bond_scale": mode.bond_scale,
        },
        "segments": [
            {"duration": s.duration, "delta_on": s.delta_on, "gate": s.is_gate, "p": s.target_probability}
            for s in schedule.segments
        ],
        "final_p": schedule.success_probability,
    }


def export_schedule(schedule: Union[ProtocolTrace, SegmentPlan], path) -> Path:
    """Write a self-contained, replayable schedule file."""
    path = Path(path)
    write_text(path, dumps(schedule_to_dict(schedule)))
    return path


@dataclass
class LoadedSchedule:
    kind: str
    chain: ChainSpec
    steps: Optional[List[StepRecord]] = None
    mode: Optional[SwitchMode] = None
    segments: Optional[List[Segment]] = None
    final_p: float = 0.0

    @property
    def recorded_probabilities(self) -> np.ndarray:
        items = self.steps if self.kind == "endgate" else self.segments
        attr = "cumulative_probability" if self.kind == "endgate" else "target_probability"
        return np.array([getattr(s, attr) for s in items])

    def replay(self):
        """Re-run the schedule from ``|1>``; returns ``(final_state, probabilities)``."""
        if self.kind == "endgate":
            return replay_schedule(build_hamiltonian(self.chain), self.steps)
        return replay_plan(
            self.chain, self.mode,
            [s.duration for s in self.segments], [s.delta_on for s in self.segments],
        )


def schedule_from_dict(data: dict) -> LoadedSchedule:
    if data.get("schema") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schedule schema {data.get('schema')!r}")
    chain = chain_from_dict(data["chain"])
    if data["kind"] == "endgate":
        steps = []
        for s in data["steps"]:
            gate = None
            if s["applied"]:
                gate = EndGate(complex(s["c_re"], s["c_im"]), complex(s["d_re"], s["d_im"]))
            steps.append(StepRecord(float(s["t"]), gate, float(s.get("p", 0.0))))
        return LoadedSchedule("endgate", chain, steps=steps, final_p=float(data["final_p"]))
    if data["kind"] == "switched":
        sw = data["switch"]
        mode = SwitchMode(sw["mode"], sw.get("field_strength"), float(sw.get("bond_scale", 1.0)))
        segments = [
            Segment(float(s["duration"]), bool(s["delta_on"]), bool(s["gate"]), float(s["p"]))
            for s in data["segments"]
        ]
        return LoadedSchedule("switched", chain, mode=mode, segments=segments,
                              final_p=float(data["final_p"]))
    raise ValueError(f"unknown schedule kind {data['kind']!r}")


def load_schedule(path) -> LoadedSchedule:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ScheduleFileError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON ({exc})") from None
    try:
        return schedule_from_dict(data)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path}: malformed schedule ({exc})") from None

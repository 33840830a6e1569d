"""Drive the library from an :class:`ExperimentConfig` and collect summaries."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from . import __version__
from .config import ConfigError, ExperimentConfig
from .propagator import NumericalError
from .protocol import (
    ProtocolTrace,
    average_fidelity,
    equidistant_curve,
    equidistant_schedule,
    first_peak,
    run_protocol,
    single_shot_max,
)
from .sector import build_hamiltonian
from .serialize import (
    SCHEMA_VERSION,
    chain_to_dict,
    dumps,
    export_schedule,
    plan_rows,
    rows_to_csv,
    trace_rows,
    write_text,
    write_trajectory,
)
from .switched import SegmentPlan, greedy_run

SWEEP_FIELDS = (
    "value", "final_p", "peak_p", "peak_time", "average_fidelity", "gates_applied", "steps",
)


@dataclass
class ExperimentResult:
    summary: dict
    rows: list
    schedule: Union[ProtocolTrace, SegmentPlan, None] = None
    curve: Optional[np.ndarray] = field(default=None, repr=False)


def _versions() -> dict:
    return {"endgate": __version__, "numpy": np.__version__}


def _base_summary(config: ExperimentConfig, kind: str) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "experiment": kind,
        "chain": chain_to_dict(config.chain),
        "seed": config.seed,
        "versions": _versions(),
    }


def _check_probability(p: float) -> float:
    if not -1e-9 <= p <= 1 + 1e-9:
        raise NumericalError(f"probability {p!r} outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def resolve_intervals(config: ExperimentConfig, h) -> tuple:
    """Turn ``[schedule]`` into concrete intervals; also returns the total time used."""
    s = config.schedule
    ss = config.single_shot
    if s.intervals is not None:
        return list(s.intervals), float(sum(s.intervals))
    if s.total_time is not None:
        total = s.total_time
        if total == "optimum":
            total = single_shot_max(h, ss.window, ss.resolution)[0]
        return equidistant_schedule(total, s.gate_count), float(total)
    interval = s.interval
    if interval == "first_peak":
        interval = first_peak(h, ss.window, ss.resolution)[0]
    return [float(interval)] * s.gate_count, float(interval) * s.gate_count


def run_single_shot(config: ExperimentConfig) -> ExperimentResult:
    h = build_hamiltonian(config.chain)
    window, resolution = config.single_shot.window, config.single_shot.resolution
    t, p = single_shot_max(h, window, resolution)
    peak_t, peak_p = first_peak(h, window, resolution)
    trace = run_protocol(h, [t])
    p = _check_probability(p)
    summary = _base_summary(config, "single_shot")
    summary.update({
        "window": window,
        "resolution": resolution,
        "final_p": p,
        "peak_p": p,
        "peak_time": t,
        "first_peak_p": peak_p,
        "first_peak_time": peak_t,
        "average_fidelity": average_fidelity(p),
        "gates_applied": 1,
        "steps": 1,
    })
    return ExperimentResult(summary, trace_rows(trace), trace)


def run_endgate(config: ExperimentConfig) -> ExperimentResult:
    h = build_hamiltonian(config.chain)
    intervals, total = resolve_intervals(config, h)
    trace = run_protocol(h, intervals, tol=config.schedule.tolerance)
    p = _check_probability(trace.success_probability)
    peak_p, peak_time, curve = p, float(sum(trace.intervals)), None
    if config.schedule.scan_points and config.schedule.total_time is not None:
        k = config.schedule.scan_points
        times = total * np.arange(1, k + 1) / k
        probs = equidistant_curve(h, len(intervals), times)
        curve = np.column_stack([times, probs])
        i = int(np.argmax(probs))
        peak_p, peak_time = _check_probability(float(probs[i])), float(times[i])
    summary = _base_summary(config, "endgate")
    summary.update({
        "total_time": total,
        "gate_count": len(intervals),
        "final_p": p,
        "residual": trace.residual,
        "peak_p": peak_p,
        "peak_time": peak_time,
        "average_fidelity": average_fidelity(p),
        "gates_applied": sum(step.applied for step in trace.steps),
        "steps": len(trace.steps),
    })
    return ExperimentResult(summary, trace_rows(trace), trace, curve)


def run_switched(config: ExperimentConfig) -> ExperimentResult:
    plan = greedy_run(config.chain, config.switch, config.greedy)
    norm = float(np.linalg.norm(plan.final_state))
    if abs(norm - 1.0) > 1e-9:
        raise NumericalError(f"norm drifted to {norm!r} during the switched run")
    p = _check_probability(plan.success_probability)
    rows = plan_rows(plan)
    summary = _base_summary(config, "switched")
    summary.update({
        "switch": {
            "mode": config.switch.kind,
            "field_strength": config.switch.field_strength,
            "bond_scale": config.switch.bond_scale,
        },
        "final_p": p,
        "peak_p": max([p] + [r.p for r in rows]),
        "peak_time": plan.total_time,
        "average_fidelity": average_fidelity(p),
        "gates_applied": len(plan.gate_segments),
        "steps": plan.cycles,
    })
    return ExperimentResult(summary, rows, plan)


_RUNNERS = {
    "single_shot": run_single_shot,
    "endgate": run_endgate,
    "switched": run_switched,
}


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    if config.kind == "sweep":
        raise ConfigError("use run_sweep for sweep configurations")
    return _RUNNERS[config.kind](config)


def sweep_variant(config: ExperimentConfig, value) -> ExperimentConfig:
    axis = config.sweep.axis
    base = replace(config, kind=config.sweep.base, sweep=None)
    if axis == "gate_count":
        return replace(base, schedule=replace(base.schedule, gate_count=int(value)))
    if axis == "seed":
        return base.with_seed(int(value))
    return replace(base, switch=replace(base.switch, field_strength=float(value)))


def default_threads() -> int:
    return int(os.environ.get("ENDGATE_THREADS", "1"))


def run_sweep(config: ExperimentConfig, threads: Optional[int] = None) -> List[dict]:
    """One summary row per axis value, in axis order regardless of ``threads``."""
    if config.sweep is None:
        raise ConfigError("configuration has no [sweep] section")
    threads = threads or default_threads()
    variants = [sweep_variant(config, v) for v in config.sweep.values]

    def one(args):
        value, variant = args
        s = run_experiment(variant).summary
        return {"value": value, **{f: s[f] for f in SWEEP_FIELDS[1:]}}

    pairs = list(zip(config.sweep.values, variants))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, pairs))
    return [one(pair) for pair in pairs]


def write_result(result: ExperimentResult, out_dir, fmt: str = "csv") -> List[Path]:
    out_dir = Path(out_dir)
    written = [write_trajectory(result.rows, out_dir / "trajectory", fmt)]
    summary_path = out_dir / "summary.json"
    write_text(summary_path, dumps(result.summary))
    written.append(summary_path)
    if result.schedule is not None:
        written.append(export_schedule(result.schedule, out_dir / "schedule.json"))
    if result.curve is not None:
        curve_path = out_dir / "curve.csv"
        rows = [{"time": t, "p": p} for t, p in result.curve]
        write_text(curve_path, rows_to_csv(rows, ("time", "p")))
        written.append(curve_path)
    return written


def write_sweep(config: ExperimentConfig, rows: List[dict], out_dir) -> List[Path]:
    out_dir = Path(out_dir)
    csv_path, json_path = out_dir / "sweep.csv", out_dir / "sweep.json"
    write_text(csv_path, rows_to_csv(rows, SWEEP_FIELDS))
    write_text(json_path, dumps({
        "schema": SCHEMA_VERSION,
        "axis": config.sweep.axis,
        "base": config.sweep.base,
        "chain": chain_to_dict(config.chain),
        "versions": _versions(),
        "rows": rows,
    }))
    return [csv_path, json_path]

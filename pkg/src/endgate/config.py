"""Experiment configuration: INI-style sections, or the same layout as JSON.

Example::

    [chain]
    n_sites = 23
    coupling_model = heisenberg

    [experiment]
    kind = endgate

    [schedule]
    total_time = optimum
    gate_count = 10
    scan_points = 4000

    [output]
    path = out/fig3
    format = csv
"""
from __future__ import annotations

import configparser
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Union

from .sector import ChainSpec, DisorderSpec
from .switched import GreedyParams, SwitchMode

EXPERIMENT_KINDS = ("single_shot", "endgate", "switched", "sweep")
SWEEP_AXES = ("gate_count", "seed", "field_strength")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScheduleConfig:
    """Gate timing for ``endgate`` runs.

    Exactly one of: ``intervals``; ``total_time`` with ``gate_count``
    (equidistant; ``total_time = "optimum"`` uses the single-shot optimum
    time); ``interval`` with ``gate_count`` (a fixed interval repeated;
    ``interval = "first_peak"`` uses the first single-shot peak time).
    """

    total_time: Union[float, str, None] = None
    gate_count: Optional[int] = None
    intervals: Optional[List[float]] = None
    interval: Union[float, str, None] = None
    tolerance: Optional[float] = None
    scan_points: int = 0


@dataclass(frozen=True)
class SingleShotConfig:
    window: float = 2000.0
    resolution: float = 0.01


@dataclass(frozen=True)
class SweepConfig:
    axis: str
    values: List
    base: str = "endgate"


@dataclass(frozen=True)
class OutputConfig:
    path: str = "out"
    format: str = "csv"


@dataclass(frozen=True)
class ExperimentConfig:
    chain: ChainSpec
    kind: str
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    single_shot: SingleShotConfig = field(default_factory=SingleShotConfig)
    switch: Optional[SwitchMode] = None
    greedy: GreedyParams = field(default_factory=GreedyParams)
    sweep: Optional[SweepConfig] = None
    output: OutputConfig = field(default_factory=OutputConfig)
    seed: int = 0
    disorder_amplitude: float = 0.0

    def with_seed(self, seed: int) -> "ExperimentConfig":
        """Copy with a new RNG seed; the chain disorder is redrawn from it."""
        chain = self.chain
        if self.disorder_amplitude > 0:
            chain = replace(chain, disorder=DisorderSpec(self.disorder_amplitude, int(seed)))
        return replace(self, seed=int(seed), chain=chain)


def _number(value, name, cast=float):
    try:
        return cast(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: expected {cast.__name__}, got {value!r}") from None


def _list(value, name, cast=float):
    if isinstance(value, str):
        value = [v for v in value.replace(",", " ").split() if v]
    if not isinstance(value, (list, tuple)):
        raise ConfigError(f"{name}: expected a list, got {value!r}")
    return [_number(v, name, cast) for v in value]


def _number_or_keyword(value, name, keyword):
    if isinstance(value, str) and value.strip().lower() == keyword:
        return keyword
    return _number(value, name)


def _read_sections(path: Path) -> dict:
    text = path.read_text()
    if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
        return {k: dict(v) if isinstance(v, dict) else v for k, v in data.items()}
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return {name: dict(parser[name]) for name in parser.sections()}


def parse_config(sections: dict) -> ExperimentConfig:
    known = {"chain", "experiment", "schedule", "single_shot", "switch", "sweep", "output"}
    unknown = set(sections) - known
    if unknown:
        raise ConfigError(f"unknown sections: {sorted(unknown)}")
    if "chain" not in sections:
        raise ConfigError("missing [chain] section")

    experiment = sections.get("experiment", {})
    kind = str(experiment.get("kind", "")).strip().lower()
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(f"experiment.kind must be one of {EXPERIMENT_KINDS}, got {kind!r}")
    seed = _number(experiment.get("seed", 0), "experiment.seed", int)
    if not 0 <= seed < 2**64:
        raise ConfigError("experiment.seed must be an unsigned 64-bit integer")

    c = sections["chain"]
    sigma = _number(c.get("disorder", 0.0), "chain.disorder")
    field_strength = c.get("field_strength")
    try:
        chain = ChainSpec(
            n_sites=_number(c.get("n_sites"), "chain.n_sites", int),
            coupling_model=str(c.get("coupling_model", "xy")),
            base_coupling=_number(c.get("base_coupling", 1.0), "chain.base_coupling"),
            disorder=DisorderSpec(sigma, seed) if sigma > 0 else None,
            field_strength=None if field_strength is None
            else _number(field_strength, "chain.field_strength"),
        )
    except ValueError as exc:
        raise ConfigError(f"[chain]: {exc}") from None

    s = sections.get("schedule", {})
    schedule = ScheduleConfig(
        total_time=None if s.get("total_time") is None
        else _number_or_keyword(s["total_time"], "schedule.total_time", "optimum"),
        gate_count=None if s.get("gate_count") is None
        else _number(s["gate_count"], "schedule.gate_count", int),
        intervals=None if s.get("intervals") is None else _list(s["intervals"], "schedule.intervals"),
        interval=None if s.get("interval") is None
        else _number_or_keyword(s["interval"], "schedule.interval", "first_peak"),
        tolerance=None if s.get("tolerance") is None else _number(s["tolerance"], "schedule.tolerance"),
        scan_points=_number(s.get("scan_points", 0), "schedule.scan_points", int),
    )

    ss = sections.get("single_shot", {})
    single_shot = SingleShotConfig(
        window=_number(ss.get("window", 2000.0), "single_shot.window"),
        resolution=_number(ss.get("resolution", 0.01), "single_shot.resolution"),
    )
    if not (single_shot.window > 0 and single_shot.resolution > 0):
        raise ConfigError("single_shot window and resolution must be positive")

    switch, greedy = None, GreedyParams()
    if "switch" in sections:
        sw = dict(sections["switch"])
        strength = sw.pop("field_strength", None)
        try:
            switch = SwitchMode(
                kind=str(sw.pop("mode", "coupling")),
                field_strength=None if strength is None
                else _number(strength, "switch.field_strength"),
                bond_scale=_number(sw.pop("bond_scale", 1.0), "switch.bond_scale"),
            )
            ints = {"grid_points", "step_budget", "patience", "phase_samples"}
            floats = {"search_window", "refine_tolerance", "gain_threshold", "gate_window"}
            extra = set(sw) - ints - floats
            if extra:
                raise ConfigError(f"unknown [switch] keys: {sorted(extra)}")
            greedy = GreedyParams(**{
                k: _number(v, f"switch.{k}", int if k in ints else float) for k, v in sw.items()
            })
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"[switch]: {exc}") from None

    sweep = None
    if "sweep" in sections:
        sw = sections["sweep"]
        axis = str(sw.get("axis", "")).strip().lower()
        if axis not in SWEEP_AXES:
            raise ConfigError(f"sweep.axis must be one of {SWEEP_AXES}, got {axis!r}")
        cast = float if axis == "field_strength" else int
        values = _list(sw.get("values", []), "sweep.values", cast)
        if not values:
            raise ConfigError("sweep.values must be nonempty")
        base = str(sw.get("base", "endgate")).strip().lower()
        if base not in EXPERIMENT_KINDS or base == "sweep":
            raise ConfigError(f"sweep.base must be an experiment kind other than sweep, got {base!r}")
        sweep = SweepConfig(axis, values, base)
    if (kind == "sweep") != (sweep is not None):
        raise ConfigError("a [sweep] section is required iff experiment.kind = sweep")

    out = sections.get("output", {})
    output = OutputConfig(path=str(out.get("path", "out")), format=str(out.get("format", "csv")).lower())
    if output.format not in ("csv", "json"):
        raise ConfigError(f"output.format must be csv or json, got {output.format!r}")

    config = ExperimentConfig(
        chain=chain, kind=kind, schedule=schedule, single_shot=single_shot,
        switch=switch, greedy=greedy, sweep=sweep, output=output, seed=seed,
        disorder_amplitude=sigma,
    )
    validate(config)
    return config


def validate(config: ExperimentConfig) -> None:
    kinds = [config.kind] if config.kind != "sweep" else [config.sweep.base]
    for kind in kinds:
        if kind == "endgate":
            _validate_schedule(config.schedule)
        if kind == "switched":
            if config.switch is None:
                raise ConfigError("switched experiments need a [switch] section")
            if config.chain.coupling_model != "xy":
                raise ConfigError("switched experiments need an xy chain")
    if config.sweep is not None:
        axis = config.sweep.axis
        if axis == "gate_count" and config.sweep.base != "endgate":
            raise ConfigError("a gate_count sweep needs base = endgate")
        if axis == "field_strength" and (config.switch is None or config.switch.kind != "field"):
            raise ConfigError("a field_strength sweep needs [switch] mode = field")


def _validate_schedule(s: ScheduleConfig) -> None:
    forms = [s.intervals is not None, s.total_time is not None, s.interval is not None]
    if sum(forms) != 1:
        raise ConfigError("[schedule] needs exactly one of intervals, total_time, interval")
    if s.intervals is not None:
        if not s.intervals or any(t < 0 for t in s.intervals):
            raise ConfigError("schedule.intervals must be nonempty and nonnegative")
    elif s.gate_count is None or s.gate_count < 1:
        raise ConfigError("schedule.gate_count must be a positive integer")
    if isinstance(s.total_time, float) and not s.total_time > 0:
        raise ConfigError("schedule.total_time must be positive")
    if isinstance(s.interval, float) and not s.interval > 0:
        raise ConfigError("schedule.interval must be positive")
    if s.scan_points < 0:
        raise ConfigError("schedule.scan_points must be >= 0")
    if s.scan_points and s.total_time is None:
        raise ConfigError("schedule.scan_points needs total_time")


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        sections = _read_sections(path)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(sections)

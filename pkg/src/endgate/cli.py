"""Command line entry point: ``endgate {run,sweep,export,replay,validate}``.

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .config import ConfigError, load_config
from .experiments import (
    default_threads,
    run_experiment,
    run_sweep,
    write_result,
    write_sweep,
)
from .propagator import NumericalError
from .serialize import (
    ScheduleFileError,
    dumps,
    export_schedule,
    load_schedule,
    write_text,
    write_trajectory,
    TrajectoryRow,
)
from .switched import NoTransportError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2
REPLAY_ATOL = 1e-9

log = logging.getLogger("endgate")


def _load(args):
    config = load_config(args.config)
    if args.seed is not None:
        config = config.with_seed(args.seed)
    return config


def _out_dir(args, config) -> Path:
    return Path(args.out) if args.out else Path(config.output.path)


def _timing(out_dir: Path, started: float) -> None:
    # wall time lives apart from summary.json so that outputs stay byte-identical
    write_text(out_dir / "timing.json", dumps({"wall_time_s": time.perf_counter() - started}))


def cmd_run(args) -> int:
    started = time.perf_counter()
    config = _load(args)
    out_dir = _out_dir(args, config)
    if config.kind == "sweep":
        return _sweep(args, config, out_dir, started)
    result = run_experiment(config)
    for path in write_result(result, out_dir, config.output.format):
        log.info("wrote %s", path)
    _timing(out_dir, started)
    s = result.summary
    print(f"{config.kind}: final_p={s['final_p']:.6f} peak_p={s['peak_p']:.6f} "
          f"average_fidelity={s['average_fidelity']:.6f}")
    return EXIT_OK


def _sweep(args, config, out_dir, started) -> int:
    rows = run_sweep(config, threads=args.threads or default_threads())
    for path in write_sweep(config, rows, out_dir):
        log.info("wrote %s", path)
    _timing(out_dir, started)
    for row in rows:
        print(f"{config.sweep.axis}={row['value']}: final_p={row['final_p']:.6f} "
              f"peak_p={row['peak_p']:.6f} steps={row['steps']}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    started = time.perf_counter()
    config = _load(args)
    if config.kind != "sweep":
        raise ConfigError("the sweep command needs experiment.kind = sweep")
    return _sweep(args, config, _out_dir(args, config), started)


def cmd_export(args) -> int:
    config = _load(args)
    if config.kind == "sweep":
        raise ConfigError("sweeps have no single schedule to export")
    result = run_experiment(config)
    target = Path(args.out) if args.out else Path(config.output.path) / "schedule.json"
    if target.suffix != ".json":
        target = target / "schedule.json"
    export_schedule(result.schedule, target)
    print(target)
    return EXIT_OK


def cmd_replay(args) -> int:
    try:
        schedule = load_schedule(args.schedule)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    state, probs = schedule.replay()
    recorded = schedule.recorded_probabilities
    deviation = float(np.max(np.abs(probs - recorded))) if probs.size else 0.0
    if args.out:
        out_dir = Path(args.out)
        elapsed, rows = 0.0, []
        items = schedule.steps if schedule.kind == "endgate" else schedule.segments
        for k, (item, p) in enumerate(zip(items, probs), start=1):
            if schedule.kind == "endgate":
                elapsed += item.time
                gate = item.gate
                rows.append(TrajectoryRow(k, elapsed, float(p),
                                          None if gate is None else abs(gate.c),
                                          None if gate is None else abs(gate.d),
                                          gate is not None))
            else:
                elapsed += item.duration
                rows.append(TrajectoryRow(k, elapsed, float(p), None, None, item.is_gate))
        write_trajectory(rows, out_dir / "replay", "csv")
    print(json.dumps({"final_p": float(probs[-1]) if probs.size else 0.0,
                      "max_deviation": deviation}))
    if deviation > REPLAY_ATOL:
        log.error("replay deviates from the recorded probabilities by %.3e", deviation)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_validate(args) -> int:
    config = _load(args)
    print(f"ok: {config.kind} on {config.chain.coupling_model} chain, N={config.chain.n_sites}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="endgate", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_help="output directory (overrides [output] path)"):
        p.add_argument("--config", required=True, help="INI or JSON experiment file")
        p.add_argument("--out", help=out_help)
        p.add_argument("--threads", type=int, default=None,
                       help="sweep worker threads (default: $ENDGATE_THREADS or 1)")
        p.add_argument("--seed", type=int, default=None, help="override [experiment] seed")

    common(sub.add_parser("run", help="run one experiment (or a sweep)"))
    common(sub.add_parser("sweep", help="run a parameter sweep"))
    common(sub.add_parser("export", help="run and write only the schedule"),
           out_help="schedule file or directory")
    common(sub.add_parser("validate", help="check a configuration file"))
    replay = sub.add_parser("replay", help="replay a schedule file and check it")
    replay.add_argument("schedule")
    replay.add_argument("--out", help="directory for the replayed trajectory")

    for name, fn in (("run", cmd_run), ("sweep", cmd_sweep), ("export", cmd_export),
                     ("replay", cmd_replay), ("validate", cmd_validate)):
        sub.choices[name].set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except (NumericalError, NoTransportError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    except (ScheduleFileError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

import json
import subprocess
import sys
from pathlib import Path

import pytest

from endgate.cli import main
from endgate.config import ConfigError, load_config, parse_config
from endgate.experiments import run_experiment, run_sweep

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write(tmp_path, text, name="c.ini"):
    path = tmp_path / name
    path.write_text(text)
    return path


ENDGATE = """
[chain]
n_sites = 8
coupling_model = xy

[experiment]
kind = endgate
seed = 3

[schedule]
total_time = 40
gate_count = 12
scan_points = 50
"""


def test_example_configs_validate():
    paths = sorted(CONFIGS.glob("*.ini"))
    assert len(paths) >= 5
    for path in paths:
        load_config(path)


def test_json_equivalent(tmp_path):
    ini = load_config(write(tmp_path, ENDGATE))
    js = load_config(write(tmp_path, json.dumps({
        "chain": {"n_sites": 8, "coupling_model": "xy"},
        "experiment": {"kind": "endgate", "seed": 3},
        "schedule": {"total_time": 40, "gate_count": 12, "scan_points": 50},
    }), "c.json"))
    assert ini == js


@pytest.mark.parametrize("sections", [
    {},
    {"chain": {"n_sites": 4}, "experiment": {"kind": "nope"}},
    {"chain": {"n_sites": 0}, "experiment": {"kind": "single_shot"}},
    {"chain": {"n_sites": "x"}, "experiment": {"kind": "single_shot"}},
    {"chain": {"n_sites": 4}, "experiment": {"kind": "endgate"}},
    {"chain": {"n_sites": 4}, "experiment": {"kind": "endgate"},
     "schedule": {"total_time": 4, "interval": 1, "gate_count": 2}},
    {"chain": {"n_sites": 4}, "experiment": {"kind": "switched"}},
    {"chain": {"n_sites": 4, "coupling_model": "heisenberg"}, "experiment": {"kind": "switched"},
     "switch": {"mode": "coupling"}},
    {"chain": {"n_sites": 4}, "experiment": {"kind": "switched"}, "switch": {"mode": "field"}},
    {"chain": {"n_sites": 4}, "experiment": {"kind": "switched"}, "switch": {"bogus": 1}},
    {"chain": {"n_sites": 4}, "experiment": {"kind": "sweep"}},
    {"chain": {"n_sites": 4}, "experiment": {"kind": "single_shot"},
     "sweep": {"axis": "seed", "values": "1 2"}},
    {"chain": {"n_sites": 4}, "experiment": {"kind": "sweep"},
     "sweep": {"axis": "seed", "values": ""}, "schedule": {"interval": 1, "gate_count": 1}},
    {"chain": {"n_sites": 4}, "experiment": {"kind": "single_shot", "seed": -1}},
    {"chain": {"n_sites": 4}, "experiment": {"kind": "single_shot"}, "output": {"format": "xml"}},
    {"chain": {"n_sites": 4}, "experiment": {"kind": "single_shot"}, "extra": {}},
    {"chain": {"n_sites": 4, "disorder": 1.5}, "experiment": {"kind": "single_shot"}},
])
def test_invalid_configs(sections):
    with pytest.raises(ConfigError):
        parse_config(sections)


def test_seed_override_redraws_disorder(tmp_path):
    cfg = load_config(CONFIGS / "disorder_sweep.ini")
    a, b = cfg.with_seed(4), cfg.with_seed(5)
    assert a.chain.disorder.seed == 4 and b.chain.disorder.seed == 5


def test_run_writes_outputs(tmp_path):
    cfg = write(tmp_path, ENDGATE)
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    names = {p.name for p in out.iterdir()}
    assert names == {"trajectory.csv", "summary.json", "schedule.json", "curve.csv", "timing.json"}
    summary = json.loads((out / "summary.json").read_text())
    assert summary["schema"] == 1 and summary["gate_count"] == 12
    assert set(summary["versions"]) == {"endgate", "numpy"}
    assert summary["peak_p"] >= summary["final_p"] - 1e-12
    assert "wall_time_s" in json.loads((out / "timing.json").read_text())


def test_run_is_deterministic(tmp_path):
    cfg = write(tmp_path, ENDGATE)
    outs = [tmp_path / "a", tmp_path / "b"]
    for out in outs:
        assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    for name in ("trajectory.csv", "summary.json", "schedule.json", "curve.csv"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_sweep_thread_independent(tmp_path):
    cfg = CONFIGS / "disorder_sweep.ini"
    for threads, out in ((1, "a"), (4, "b")):
        assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / out),
                     "--threads", str(threads)]) == 0
    for name in ("sweep.csv", "sweep.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_sweep_env_threads(monkeypatch):
    monkeypatch.setenv("ENDGATE_THREADS", "3")
    cfg = load_config(CONFIGS / "heisenberg23_family.ini")
    assert [r["value"] for r in run_sweep(cfg)] == [1, 10, 23]


def test_heisenberg_family_rows():
    rows = run_sweep(load_config(CONFIGS / "heisenberg23_family.ini"))
    peaks = [r["peak_p"] for r in rows]
    assert peaks == sorted(peaks)
    assert peaks[1] >= 1.4 * peaks[0]


def test_field_sweep_non_decreasing():
    rows = run_sweep(load_config(CONFIGS / "switched_field_sweep.ini"), threads=2)
    assert rows[1]["final_p"] >= rows[0]["final_p"]


def test_disorder_ensemble_converges():
    rows = run_sweep(load_config(CONFIGS / "disorder_sweep.ini"))
    assert len(rows) == 20 and all(r["final_p"] >= 0.99 for r in rows)


def test_single_shot_summary():
    s = run_experiment(load_config(CONFIGS / "single_shot_xy20.ini")).summary
    assert s["window"] == 2000.0
    assert s["final_p"] == pytest.approx(0.63, abs=0.05)
    assert s["first_peak_time"] < s["peak_time"]


def test_export_and_replay(tmp_path, capsys):
    cfg = write(tmp_path, ENDGATE)
    target = tmp_path / "sched.json"
    assert main(["export", "--config", str(cfg), "--out", str(target)]) == 0
    assert main(["replay", str(target), "--out", str(tmp_path / "r")]) == 0
    report = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert report["max_deviation"] <= 1e-9
    assert (tmp_path / "r" / "replay.csv").exists()


def test_replay_detects_tampering(tmp_path):
    cfg = write(tmp_path, ENDGATE)
    target = tmp_path / "sched.json"
    main(["export", "--config", str(cfg), "--out", str(target)])
    data = json.loads(target.read_text())
    data["steps"][3]["t"] += 0.5
    target.write_text(json.dumps(data))
    assert main(["replay", str(target)]) == 2


def test_switched_export_replay(tmp_path):
    cfg = write(tmp_path, """
[chain]
n_sites = 6
[experiment]
kind = switched
[switch]
mode = field
field_strength = 10
""")
    target = tmp_path / "s.json"
    assert main(["export", "--config", str(cfg), "--out", str(target)]) == 0
    assert main(["replay", str(target), "--out", str(tmp_path / "r")]) == 0


def test_exit_codes(tmp_path):
    assert main(["validate", "--config", str(tmp_path / "nope.ini")]) == 1
    bad = write(tmp_path, "[chain]\nn_sites = -2\n[experiment]\nkind = single_shot\n")
    assert main(["run", "--config", str(bad)]) == 1
    assert main(["replay", str(write(tmp_path, "{oops", "x.json"))]) == 1
    # an empty chain end never receives amplitude: numerical failure
    stuck = write(tmp_path, """
[chain]
n_sites = 30
[experiment]
kind = switched
[switch]
mode = coupling
search_window = 2
grid_points = 100
refine_tolerance = 1e-3
""", "stuck.ini")
    assert main(["run", "--config", str(stuck), "--out", str(tmp_path / "o")]) == 2
    sweep_cfg = write(tmp_path, ENDGATE, "e.ini")
    assert main(["sweep", "--config", str(sweep_cfg)]) == 1


def test_console_script(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "endgate.cli", "validate", "--config",
         str(CONFIGS / "switched_coupling.ini")],
        capture_output=True, text=True, check=True,
    )
    assert out.stdout.startswith("ok: switched")

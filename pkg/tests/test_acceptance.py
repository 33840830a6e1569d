"""Acceptance criteria 1-8, one test each, one PASS/FAIL line each."""
import math

import numpy as np
import pytest

from endgate import (
    ChainSpec,
    DisorderSpec,
    GreedyParams,
    SwitchMode,
    adjoint_replay,
    apply_gate,
    basis_state,
    build_hamiltonian,
    compute_gate,
    diagonalize,
    equidistant_curve,
    evolve,
    first_peak,
    greedy_run,
    residual_probability,
    run_protocol,
    single_shot_max,
    transfer_amplitude,
    transfer_qubit,
)
from conftest import random_state, record
from fullspace import chain_operator, full_endgate_run, restrict

pytestmark = pytest.mark.acceptance

WINDOW = 2000.0  # units of 1/J


@pytest.fixture(scope="module")
def heisenberg23():
    h = build_hamiltonian(ChainSpec(23, "heisenberg"))
    t_opt, p_opt = single_shot_max(h, WINDOW, 0.01)
    times = np.arange(1, int(t_opt / 0.05) + 1) * 0.05
    times = np.append(times, t_opt)
    curves = {l: equidistant_curve(h, l, times) for l in (1, 10, 23)}
    return h, t_opt, p_opt, times, curves


def test_criterion_1_single_shot_baseline():
    h = build_hamiltonian(ChainSpec(20, "xy"))
    t, p = single_shot_max(h, WINDOW, resolution=0.01)
    ok = abs(p - 0.63) <= 0.05
    record(1, "single-shot baseline N=20 XY", ok,
           f"max p = {p:.5f} at t = {t:.4f}/J over [0, {WINDOW:g}/J], target 0.63 +- 0.05")
    assert ok


def test_criterion_2_endgate_convergence():
    h = build_hamiltonian(ChainSpec(20, "xy"))
    tau, _ = first_peak(h, 100.0)
    trace = run_protocol(h, [tau] * 500, tol=0.01)
    p = trace.probabilities
    monotone = bool(np.all(np.diff(p) >= -1e-12))
    hits = np.flatnonzero(p >= 0.99)
    ok = monotone and hits.size > 0
    reached = f"l = {hits[0] + 1}" if hits.size else "not within l <= 500"
    record(2, "end-gate convergence N=20 XY, tau = first peak", ok,
           f"tau = {tau:.6f}/J, monotone = {monotone}, p_500 = {p[-1]:.5f}, "
           f"p >= 0.99 reached: {reached}")
    assert monotone
    assert hits.size > 0, f"p_l after 500 gates is {p[-1]:.5f} < 0.99"


def test_criterion_3_heisenberg_family(heisenberg23):
    _, t_opt, p_opt, _, curves = heisenberg23
    peak = {l: float(c.max()) for l, c in curves.items()}
    ratio = peak[10] / peak[1]
    ok = ratio >= 1.4 and peak[23] >= 0.9
    record(3, "N=23 Heisenberg family", ok,
           f"window [0, {t_opt:.4f}/J] (l=1 optimum, p = {p_opt:.5f}); peaks l=1 {peak[1]:.5f}, "
           f"l=10 {peak[10]:.5f} (x{ratio:.3f}), l=23 {peak[23]:.5f}")
    assert ratio >= 1.4
    assert peak[23] >= 0.9


def test_criterion_4_zeno(heisenberg23):
    h, _, _, times, curves = heisenberg23
    single = np.abs(transfer_amplitude(h, times)) ** 2
    np.testing.assert_allclose(curves[1], single, atol=1e-10)
    t_first, _ = first_peak(h, 50.0)
    early = times <= 2 * t_first
    below = early & (curves[23] < single - 1e-9)
    ok = bool(below.any())
    detail = "none"
    if ok:
        i = int(np.argmax(np.where(below, single - curves[23], -np.inf)))
        detail = f"t = {times[i]:.2f}/J: p_23 = {curves[23][i]:.5f} < p_1 = {single[i]:.5f}"
    record(4, "Zeno effect", ok, f"early region t <= {2 * t_first:.2f}/J, largest dip at {detail}")
    assert ok


def test_criterion_5_switched():
    spec = ChainSpec(20)
    params = GreedyParams(step_budget=200)
    coupling = greedy_run(spec, SwitchMode("coupling"), params).success_probability
    field20 = greedy_run(spec, SwitchMode("field", 20.0), params).success_probability
    field100 = greedy_run(spec, SwitchMode("field", 100.0), params).success_probability
    ok = coupling >= 0.95 and field20 < coupling and field100 >= field20
    record(5, "switched dynamics N=20", ok,
           f"coupling {coupling:.5f}, field B/J=20 {field20:.5f}, field B/J=100 {field100:.5f}")
    assert coupling >= 0.95
    assert field20 < coupling
    assert field100 >= field20


def test_criterion_6_oracle_equivalence():
    worst_h = 0.0
    for model in ("xy", "heisenberg", "engineered"):
        for n in range(2 if model == "engineered" else 1, 7):
            for couple in (False, True):
                h = build_hamiltonian(ChainSpec(n, model), couple_target=couple)
                full = chain_operator(list(h.couplings), model, h.target_coupling)
                worst_h = max(worst_h, float(np.max(np.abs(h.matrix - restrict(full, n)))))
    worst_p = 0.0
    rng = np.random.default_rng(6)
    for model in ("xy", "heisenberg", "engineered"):
        for n in range(2 if model == "engineered" else 1, 5):
            h = build_hamiltonian(ChainSpec(n, model))
            intervals = list(rng.uniform(0.1, 3.0, size=8))
            want = full_endgate_run(chain_operator(list(h.couplings), model), n, intervals)
            worst_p = max(worst_p, float(np.max(np.abs(run_protocol(h, intervals).probabilities - want))))
    ok = worst_h <= 1e-12 and worst_p <= 1e-10
    record(6, "full-space oracle", ok,
           f"max |H - restriction| = {worst_h:.1e} (N <= 6), max |dp_k| = {worst_p:.1e} (N <= 4)")
    assert worst_h <= 1e-12
    assert worst_p <= 1e-10


def test_criterion_7_identities():
    rng = np.random.default_rng(7)
    dual = post = norm = lin = adj = 0.0
    models = ("xy", "heisenberg", "engineered")
    for case in range(100):
        n = int(rng.integers(2, 13))
        h = build_hamiltonian(ChainSpec(n, models[case % 3]))
        intervals = rng.uniform(0.05, 3 * n, size=int(rng.integers(1, 25)))
        trace = run_protocol(h, intervals)
        dual = max(dual, abs(trace.success_probability - residual_probability(h, intervals)))
        adj = max(adj, float(np.max(np.abs(adjoint_replay(trace) - basis_state(n, 1)))))
        psi = basis_state(n, 1)
        for t in intervals:
            psi = evolve(psi, h, t)
            norm = max(norm, abs(np.linalg.norm(psi) - 1))
            psi = apply_gate(psi, compute_gate(psi[-2], psi[-1])[0])
            post = max(post, abs(psi[-2]))
        u = diagonalize(h).unitary(float(intervals[0]))
        norm = max(norm, float(np.max(np.abs(u.conj().T @ u - np.eye(n + 2)))))
        q = random_state(rng, 2)
        out = transfer_qubit(q[0], q[1], h, intervals)
        lin = max(lin, float(np.max(np.abs(out - (q[0] * basis_state(n, 0) + q[1] * trace.final_state)))))
    pst = 1 - run_protocol(build_hamiltonian(ChainSpec(8, "engineered")), [math.pi / 2]).success_probability
    checks = {
        "dual": (dual, 1e-10), "post-gate a_N": (post, 1e-10), "unitarity/norm": (norm, 1e-10),
        "linearity": (lin, 1e-10), "adjoint": (adj, 1e-9), "engineered 1-p": (pst, 1e-9),
    }
    ok = all(v <= tol for v, tol in checks.values())
    record(7, "identity suite (100 random cases)", ok,
           ", ".join(f"{k} {v:.1e}" for k, (v, _) in checks.items()))
    for name, (value, tol) in checks.items():
        assert value <= tol, name


def test_criterion_8_disorder():
    budget, tau = 500, 1.0
    used = []
    for seed in range(20):
        h = build_hamiltonian(ChainSpec(12, disorder=DisorderSpec(0.05, seed)))
        trace = run_protocol(h, [tau] * budget, tol=0.01)
        used.append(len(trace.steps) if trace.success_probability >= 0.99 else None)
    ok = all(u is not None for u in used)
    counts = np.array([u for u in used if u is not None])
    stats = (f"min {counts.min()}, median {int(np.median(counts))}, max {counts.max()}"
             if counts.size else "none")
    record(8, "disorder robustness N=12, sigma=0.05, 20 seeds", ok,
           f"tau = {tau}/J, budget {budget}; gates to p >= 0.99: {stats}; per seed {used}")
    assert ok

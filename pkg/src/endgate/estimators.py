"""scikit-learn style front end.

``fit`` takes a chain (a :class:`ChainSpec` or a prebuilt
:class:`SectorHamiltonian`) and works out the transfer schedule for it.
``transform`` sends a batch of qubit states ``alpha|0> + beta|1>``, given as
rows ``(alpha, beta)``, through that schedule and returns the final sector
states.  ``score`` is the mean fidelity of the qubit that arrives on the
target with the one that was sent.

>>> from endgate import ChainSpec, EndGateTransfer
>>> est = EndGateTransfer(gate_count=1).fit(ChainSpec(12))
>>> round(est.success_probability_, 2)
0.86
>>> round(est.score([[1, 0], [0, 1]]), 2)
0.93
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .protocol import (
    average_fidelity,
    equidistant_schedule,
    replay_schedule,
    run_protocol,
    single_shot_max,
)
from .sector import ChainSpec, SectorHamiltonian, build_hamiltonian, qubit_state
from .switched import GreedyParams, SwitchMode, greedy_run, replay_plan


def check_chain(X) -> SectorHamiltonian:
    """Accept a ChainSpec or a decoupled-target SectorHamiltonian."""
    if isinstance(X, SectorHamiltonian):
        return X
    if isinstance(X, ChainSpec):
        return build_hamiltonian(X)
    raise TypeError(f"expected ChainSpec or SectorHamiltonian, got {type(X).__name__}")


def check_qubits(X, atol: float = 1e-10) -> np.ndarray:
    """Validate qubit amplitudes: shape ``(n, 2)`` complex, every row normalized."""
    X = np.asarray(X, dtype=complex)
    if X.ndim == 1 and X.shape[0] == 2:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != 2:
        raise ValueError(f"expected qubit amplitudes of shape (n, 2), got {X.shape}")
    if X.shape[0] == 0:
        raise ValueError("expected at least one qubit state")
    norms = np.sum(np.abs(X) ** 2, axis=1)
    bad = np.flatnonzero(np.abs(norms - 1.0) > atol)
    if bad.size:
        raise ValueError(f"rows {bad.tolist()[:5]} are not normalized")
    return X


def qubit_fidelity(sent: np.ndarray, states: np.ndarray) -> np.ndarray:
    """Fidelity of the target qubit's reduced state with each sent qubit."""
    alpha, beta = sent[:, 0], sent[:, 1]
    vacuum, target = states[:, 0], states[:, -1]
    rest = 1.0 - np.abs(vacuum) ** 2 - np.abs(target) ** 2
    # target qubit reduced state is |v><v| + rest |0><0| with v = (vacuum, target)
    coherent = np.abs(np.conj(alpha) * vacuum + np.conj(beta) * target) ** 2
    return coherent + np.abs(alpha) ** 2 * rest


class EndGateTransfer(TransformerMixin, BaseEstimator):
    """Instantaneous end-gate protocol.

    Parameters
    ----------
    gate_count : int
        Number of equidistant gates.
    total_time : float or "optimum"
        Time over which the gates are spread; ``"optimum"`` uses the time of
        the best single-shot transfer within ``window``.
    intervals : sequence of float, optional
        Explicit free-evolution intervals; overrides the two above.
    tol : float, optional
        Stop as soon as ``1 - p`` falls to ``tol``.
    """

    def __init__(self, gate_count=1, total_time="optimum", intervals=None, tol=None,
                 window=2000.0, resolution=0.01):
        self.gate_count = gate_count
        self.total_time = total_time
        self.intervals = intervals
        self.tol = tol
        self.window = window
        self.resolution = resolution

    def fit(self, X, y=None):
        h = check_chain(X)
        if self.intervals is not None:
            intervals = [float(t) for t in self.intervals]
        else:
            total = self.total_time
            if total == "optimum":
                total = single_shot_max(h, self.window, self.resolution)[0]
            intervals = equidistant_schedule(float(total), self.gate_count)
        self.hamiltonian_ = h
        self.trace_ = run_protocol(h, intervals, tol=self.tol)
        self.success_probability_ = self.trace_.success_probability
        self.average_fidelity_ = average_fidelity(min(self.success_probability_, 1.0))
        self.n_gates_ = len(self.trace_.steps)
        return self

    def transform(self, X):
        check_is_fitted(self, "trace_")
        X = check_qubits(X)
        n = self.hamiltonian_.n_sites
        return np.array([
            replay_schedule(self.hamiltonian_, self.trace_.steps, qubit_state(a, b, n))[0]
            for a, b in X
        ])

    def score(self, X, y=None):
        X = check_qubits(X)
        return float(np.mean(qubit_fidelity(X, self.transform(X))))


class GreedySwitchTransfer(TransformerMixin, BaseEstimator):
    """Finite-duration gates from a switched bond or field, timed greedily."""

    def __init__(self, mode="coupling", field_strength=None, bond_scale=1.0,
                 search_window=None, grid_points=2048, refine_tolerance=1e-4,
                 gain_threshold=1e-4, step_budget=200, gate_window=None,
                 patience=20, phase_samples=8):
        self.mode = mode
        self.field_strength = field_strength
        self.bond_scale = bond_scale
        self.search_window = search_window
        self.grid_points = grid_points
        self.refine_tolerance = refine_tolerance
        self.gain_threshold = gain_threshold
        self.step_budget = step_budget
        self.gate_window = gate_window
        self.patience = patience
        self.phase_samples = phase_samples

    def fit(self, X, y=None):
        if not isinstance(X, ChainSpec):
            raise TypeError("GreedySwitchTransfer.fit expects a ChainSpec")
        self.mode_ = SwitchMode(self.mode, self.field_strength, self.bond_scale)
        params = GreedyParams(
            search_window=self.search_window,
            grid_points=self.grid_points,
            refine_tolerance=self.refine_tolerance,
            gain_threshold=self.gain_threshold,
            step_budget=self.step_budget,
            gate_window=self.gate_window,
            patience=self.patience,
            phase_samples=self.phase_samples,
        )
        self.spec_ = X
        self.plan_ = greedy_run(X, self.mode_, params)
        self.success_probability_ = self.plan_.success_probability
        self.average_fidelity_ = average_fidelity(min(self.success_probability_, 1.0))
        return self

    def transform(self, X):
        check_is_fitted(self, "plan_")
        X = check_qubits(X)
        segments = self.plan_.segments
        durations = [s.duration for s in segments]
        deltas = [s.delta_on for s in segments]
        n = self.spec_.n_sites
        return np.array([
            replay_plan(self.spec_, self.mode_, durations, deltas, qubit_state(a, b, n))[0]
            for a, b in X
        ])

    def score(self, X, y=None):
        X = check_qubits(X)
        return float(np.mean(qubit_fidelity(X, self.transform(X))))

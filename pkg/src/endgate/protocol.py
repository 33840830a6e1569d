"""End-gate extraction protocol with instantaneous two-qubit gates.

Between gates the chain evolves freely while the target qubit is decoupled.
At each gate time the amplitudes ``a_N`` (last chain site) and ``a_T``
(target) are rotated so that everything sitting on the last site moves onto
the target.  The cumulative success probability ``p_k = |a_T|^2`` can only
grow, and for generic interval sequences it tends to 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .propagator import NumericalError, diagonalize, evolve, transfer_amplitude
from .search import golden_section_max
from .sector import ChainSpec, SectorHamiltonian, basis_state, qubit_state

GATE_EPS = 1e-14


@dataclass(frozen=True)
class EndGate:
    """The two-qubit rotation ``W(c, d)`` on the last chain site and the target.

    On ``(a_N, a_T)`` it acts as ``[[d, -c], [conj(c), conj(d)]]`` and as the
    identity on every other basis state.
    """

    c: complex
    d: complex

    def __post_init__(self):
        norm = abs(self.c) ** 2 + abs(self.d) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"|c|^2 + |d|^2 = {norm!r}, expected 1")

    def matrix(self) -> np.ndarray:
        c, d = complex(self.c), complex(self.d)
        return np.array([[d, -c], [c.conjugate(), d.conjugate()]])


@dataclass(frozen=True)
class StepRecord:
    time: float
    gate: Optional[EndGate]
    cumulative_probability: float

    @property
    def applied(self) -> bool:
        return self.gate is not None


@dataclass(frozen=True)
class ProtocolTrace:
    hamiltonian: SectorHamiltonian
    steps: List[StepRecord]
    final_state: np.ndarray = field(repr=False)

    @property
    def spec(self) -> Optional[ChainSpec]:
        return self.hamiltonian.spec

    @property
    def success_probability(self) -> float:
        return self.steps[-1].cumulative_probability if self.steps else 0.0

    @property
    def residual(self) -> float:
        return 1.0 - self.success_probability

    @property
    def intervals(self) -> List[float]:
        return [s.time for s in self.steps]

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([s.cumulative_probability for s in self.steps])


def compute_gate(a_n: complex, a_t: complex):
    """Gate that moves ``a_N`` onto the target, and the probability it collects.

    Returns ``(gate, p)`` with ``p = |a_N|^2 + |a_T|^2``.  When ``sqrt(p)`` is
    below ``GATE_EPS`` the gate is undefined and ``None`` (skip) is returned.
    The cut sits on the amplitude rather than on ``p``: whatever a skip leaves
    on site N keeps interfering later, at order ``sqrt(p)``.
    """
    p = abs(a_n) ** 2 + abs(a_t) ** 2
    if math.sqrt(p) <= GATE_EPS:
        return None, p
    root = math.sqrt(p)
    c, d = complex(a_n) / root, complex(a_t) / root
    # renormalize away rounding so the EndGate invariant holds exactly
    scale = math.sqrt(abs(c) ** 2 + abs(d) ** 2)
    return EndGate(c / scale, d / scale), p


def apply_gate(state, gate: Optional[EndGate]) -> np.ndarray:
    psi = np.array(state, dtype=complex)
    if gate is None:
        return psi
    a_n, a_t = psi[-2], psi[-1]
    c, d = gate.c, gate.d
    psi[-2] = d * a_n - c * a_t
    psi[-1] = np.conj(c) * a_n + np.conj(d) * a_t
    return psi


def apply_gate_adjoint(state, gate: Optional[EndGate]) -> np.ndarray:
    psi = np.array(state, dtype=complex)
    if gate is None:
        return psi
    a_n, a_t = psi[-2], psi[-1]
    c, d = gate.c, gate.d
    psi[-2] = np.conj(d) * a_n + c * a_t
    psi[-1] = -np.conj(c) * a_n + d * a_t
    return psi


def equidistant_schedule(total_time: float, gates: int) -> List[float]:
    """``gates`` equal intervals covering ``total_time``; gate ``k`` fires at ``k T / gates``."""
    if int(gates) != gates or gates < 1:
        raise ValueError(f"gate count must be a positive integer, got {gates}")
    if not total_time > 0:
        raise ValueError(f"total time must be positive, got {total_time}")
    return [total_time / gates] * int(gates)


def _check_frozen(h: SectorHamiltonian):
    if h.couples_target:
        raise ValueError("the target qubit must be decoupled from the chain between gates")


def run_protocol(
    h: SectorHamiltonian,
    intervals: Sequence[float],
    tol: Optional[float] = None,
) -> ProtocolTrace:
    """Evolve ``|1>`` over each interval and apply the matching end gate.

    Stops early once the residual ``1 - p_k`` drops to ``tol`` or below.
    """
    _check_frozen(h)
    intervals = list(intervals)
    if not intervals:
        raise ValueError("at least one interval is required")
    prop = diagonalize(h)
    psi = basis_state(h.n_sites, 1)
    steps = []
    for t in intervals:
        psi = evolve(psi, prop, t)
        gate, _ = compute_gate(psi[-2], psi[-1])
        psi = apply_gate(psi, gate)
        p = float(abs(psi[-1]) ** 2)
        steps.append(StepRecord(float(t), gate, p))
        if tol is not None and 1.0 - p <= tol:
            break
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-9:
        raise NumericalError(f"norm drifted to {norm!r} during the protocol")
    return ProtocolTrace(h, steps, psi)


def run_until(
    h: SectorHamiltonian,
    interval: float,
    target: float,
    budget: int,
) -> ProtocolTrace:
    """Repeat a fixed interval until ``p >= target`` or ``budget`` gates are used."""
    return run_protocol(h, [interval] * int(budget), tol=1.0 - target)


def residual_probability(h: SectorHamiltonian, intervals: Sequence[float]) -> float:
    """``p_l = 1 - || prod_k P U_k |1> ||^2`` without building a single gate.

    ``P`` removes ``|0>``, ``|N>`` and ``|N+1>``.
    """
    _check_frozen(h)
    prop = diagonalize(h)
    psi = basis_state(h.n_sites, 1)
    for t in intervals:
        psi = evolve(psi, prop, t)
        psi[0] = psi[-2] = psi[-1] = 0.0
    return float(1.0 - np.vdot(psi, psi).real)


def equidistant_curve(h: SectorHamiltonian, gates: int, times) -> np.ndarray:
    """Success probability after ``gates`` equidistant gates ending at each total time."""
    _check_frozen(h)
    prop = diagonalize(h)
    times = np.asarray(times, dtype=float)
    v, lam = prop.eigenvectors, prop.eigenvalues
    phases = np.exp(-1j * np.outer(lam, times / gates))
    psi = np.zeros((h.dimension, times.size), dtype=complex)
    psi[1, :] = 1.0
    for _ in range(int(gates)):
        psi = v @ (phases * (v.conj().T @ psi))
        psi[[0, -2, -1], :] = 0.0
    return 1.0 - np.sum(np.abs(psi) ** 2, axis=0)


def replay_schedule(h: SectorHamiltonian, steps: Sequence[StepRecord], state=None):
    """Apply a fixed schedule of intervals and gates.

    Returns the final state and the target probability after every step.
    ``state`` defaults to ``|1>``.
    """
    prop = diagonalize(h)
    psi = basis_state(h.n_sites, 1) if state is None else np.array(state, dtype=complex)
    probs = []
    for step in steps:
        psi = apply_gate(evolve(psi, prop, step.time), step.gate)
        probs.append(float(abs(psi[-1]) ** 2))
    return psi, np.array(probs)


def transfer_qubit(alpha: complex, beta: complex, h: SectorHamiltonian, intervals) -> np.ndarray:
    """Send ``alpha|0> + beta|1>`` through the gate sequence computed for ``|1>``."""
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1.0) > 1e-10:
        raise ValueError("qubit amplitudes must satisfy |alpha|^2 + |beta|^2 = 1")
    trace = run_protocol(h, intervals)
    psi, _ = replay_schedule(h, trace.steps, qubit_state(alpha, beta, h.n_sites))
    return psi


def adjoint_replay(trace: ProtocolTrace, state=None) -> np.ndarray:
    """Undo a protocol run: ``U_k^dagger W_k^dagger`` in reverse order.

    Starting from ``trace.final_state`` (the default) this returns ``|1>``.
    Starting from ``|N+1>`` it prepares a state whose overlap with ``|1>`` is
    ``sqrt(p_l)``.
    """
    prop = diagonalize(trace.hamiltonian)
    psi = np.array(trace.final_state if state is None else state, dtype=complex)
    for step in reversed(trace.steps):
        psi = evolve(apply_gate_adjoint(psi, step.gate), prop, -step.time)
    return psi


def _scan(h: SectorHamiltonian, window: float, resolution: float, chunk: int = 16384):
    prop = diagonalize(h)
    count = max(int(math.ceil(window / resolution)), 2)
    step = window / count
    times = step * np.arange(count + 1)
    probs = np.concatenate([
        np.abs(transfer_amplitude(prop, times[i:i + chunk])) ** 2
        for i in range(0, times.size, chunk)
    ])
    return prop, times, probs, step


def _refine(prop, a: float, b: float, tol: float):
    def f(t):
        return float(abs(transfer_amplitude(prop, t)) ** 2)

    return golden_section_max(f, max(a, 0.0), b, tol=tol)


def single_shot_max(h: SectorHamiltonian, window: float = 2000.0, resolution: float = 0.01,
                    tol: float = 1e-10):
    """Best direct transfer: ``max |<N|U(t)|1>|^2`` over ``t`` in ``[0, window]``.

    Dense grid at ``resolution`` followed by golden-section refinement around
    the best sample.  Returns ``(t, p)``.
    """
    prop, times, probs, step = _scan(h, window, resolution)
    i = int(np.argmax(probs))
    t, p = _refine(prop, times[i] - step, min(times[i] + step, window), tol)
    if p < probs[i]:
        t, p = times[i], probs[i]
    return float(t), float(p)


def first_peak(h: SectorHamiltonian, window: float = 2000.0, resolution: float = 0.01,
               tol: float = 1e-10):
    """First local maximum of ``|<N|U(t)|1>|^2`` after ``t = 0``.  Returns ``(t, p)``."""
    prop, times, probs, step = _scan(h, window, resolution)
    inner = probs[1:-1]
    # round-off wiggles sit near 1e-32 before the wavefront arrives
    peaks = np.flatnonzero((inner > probs[:-2]) & (inner >= probs[2:]) & (inner > GATE_EPS)) + 1
    if peaks.size == 0:
        raise ValueError("no transfer peak inside the window")
    i = int(peaks[0])
    t, p = _refine(prop, times[i] - step, times[i] + step, tol)
    return float(t), float(p)


def average_fidelity(p: float) -> float:
    """Average fidelity ``1/2 + sqrt(p)/3 + p/6`` of the phase-corrected transfer channel."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    return (3.0 + 2.0 * math.sqrt(p) + p) / 6.0

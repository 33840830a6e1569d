"""Finite-duration end gates realized by switching a bond or a local field.

The Hamiltonian is piecewise constant (sudden switching).  In ``coupling``
mode the bond between site N and the target is switched on for a gate and
off in between.  In ``field`` mode the target stays coupled, and a strong
field on it (detuning ``2B``) is switched on between gates to suppress the
bond, and off for a gate.

:func:`greedy_run` picks the switching times greedily: let the chain evolve
to the next amplitude maximum on site N, then switch the gate phase on for the
duration that maximizes the target population.  If that would not raise the
target population, the gate is skipped and the chain evolves on.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from .propagator import diagonalize, evolve
from .protocol import GATE_EPS
from .search import grid_refine_max
from .sector import ChainSpec, SectorHamiltonian, _assemble, basis_state, build_xy

SWITCH_KINDS = ("coupling", "field")


class NoTransportError(RuntimeError):
    """No amplitude reaches the last chain site within the search window."""


@dataclass(frozen=True)
class SwitchMode:
    """How the gate is realized.

    ``bond_scale`` multiplies the switchable bond (coupling mode) relative to
    the chain coupling; values far above 1 approach instantaneous gates.
    """

    kind: str = "coupling"
    field_strength: Optional[float] = None
    bond_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", self.kind.lower())
        if self.kind not in SWITCH_KINDS:
            raise ValueError(f"switch kind must be one of {SWITCH_KINDS}, got {self.kind!r}")
        if self.kind == "field" and not (self.field_strength and self.field_strength > 0):
            raise ValueError("field mode requires a positive field_strength")
        if not self.bond_scale > 0:
            raise ValueError("bond_scale must be positive")

    @property
    def frozen_delta(self) -> bool:
        """Value of the switch while the target should hold its amplitude."""
        return self.kind == "field"


@dataclass(frozen=True)
class GreedyParams:
    search_window: Optional[float] = None  # default 4N/J
    grid_points: int = 2048
    refine_tolerance: float = 1e-4
    gain_threshold: float = 1e-4
    step_budget: int = 200
    gate_window: Optional[float] = None  # default: search_window
    patience: int = 20
    phase_samples: int = 8  # field mode only; 0 stops exactly at the peak

    def __post_init__(self):
        for name in ("grid_points", "refine_tolerance", "gain_threshold", "step_budget", "patience"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("search_window", "gate_window"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValueError(f"{name} must be positive")
        if self.phase_samples < 0:
            raise ValueError("phase_samples must be >= 0")

    def resolved(self, spec: ChainSpec) -> "GreedyParams":
        window = self.search_window or 4.0 * spec.n_sites / spec.base_coupling
        out = replace(self, search_window=window, gate_window=self.gate_window or window)
        if not out.refine_tolerance < min(out.search_window, out.gate_window) / out.grid_points:
            raise ValueError("refine_tolerance must be finer than the grid spacing")
        return out


@dataclass(frozen=True)
class Segment:
    duration: float
    delta_on: bool
    is_gate: bool
    target_probability: float
    end_amplitudes: Optional[tuple] = field(default=None, compare=False)


@dataclass
class SegmentPlan:
    spec: ChainSpec
    mode: SwitchMode
    segments: List[Segment] = field(default_factory=list)
    final_state: Optional[np.ndarray] = field(default=None, repr=False)
    cycles: int = 0

    @property
    def success_probability(self) -> float:
        return self.segments[-1].target_probability if self.segments else 0.0

    @property
    def gate_segments(self) -> List[Segment]:
        return [s for s in self.segments if s.is_gate]

    @property
    def cycle_probabilities(self) -> np.ndarray:
        """Target population at the end of every cycle (free segment plus optional gate)."""
        out = []
        for seg in self.segments:
            if seg.is_gate:
                out[-1] = seg.target_probability
            else:
                out.append(seg.target_probability)
        return np.array(out)

    @property
    def total_time(self) -> float:
        return float(sum(s.duration for s in self.segments))


def build_switched(spec: ChainSpec, mode: SwitchMode, delta_on: bool) -> SectorHamiltonian:
    """Piecewise-constant Hamiltonian for one value of the switch."""
    if spec.coupling_model != "xy":
        raise ValueError("switched protocols are defined for XY chains")
    chain = build_xy(spec, couple_target=False)
    j = spec.base_coupling
    if mode.kind == "coupling":
        if not delta_on:
            return chain
        return _assemble("xy", chain.couplings, j * mode.bond_scale, spec)
    h = _assemble("xy", chain.couplings, j, spec)
    if not delta_on:
        return h
    matrix = np.array(h.matrix)
    matrix[-1, -1] = 2.0 * mode.field_strength
    return SectorHamiltonian(matrix, "xy", h.couplings, h.target_coupling, spec)


def find_next_peak(state, h_frozen: SectorHamiltonian, params: GreedyParams):
    """Evolve to the largest amplitude maximum on site N inside the search window.

    Only genuine local maxima after ``t = 0`` count, unless the amplitude never
    has one.  Returns ``(t, amplitude)``.
    """
    prop = diagonalize(h_frozen)
    n = h_frozen.n_sites
    psi = np.asarray(state, dtype=complex)

    def f_vec(ts):
        return np.abs(prop.amplitudes(psi, n, ts))

    def f(t):
        return float(f_vec([t])[0])

    args = (f_vec, f, 0.0, params.search_window, params.grid_points, params.refine_tolerance)
    found = grid_refine_max(*args, interior=True)
    if found is None:
        # flat amplitude (e.g. a one-site chain): every time is a maximum
        found = grid_refine_max(*args)
    if found is None or found[1] ** 2 <= GATE_EPS:
        raise NoTransportError("no amplitude maximum on site N inside the search window")
    t = found[0]
    return t, complex(prop.amplitudes(psi, n, [t])[0])


def optimize_switch_interval(state, h_gate: SectorHamiltonian, params: GreedyParams):
    """Gate-phase duration maximizing the target population, and the gain it brings."""
    prop = diagonalize(h_gate)
    target = h_gate.n_sites + 1
    psi = np.asarray(state, dtype=complex)

    def f_vec(ts):
        return np.abs(prop.amplitudes(psi, target, ts)) ** 2

    def f(t):
        return float(f_vec([t])[0])

    window = params.gate_window or params.search_window
    duration, best = grid_refine_max(
        f_vec, f, 0.0, window, params.grid_points, params.refine_tolerance
    )
    return duration, best - float(abs(psi[target]) ** 2)


def _alignment_times(peak: float, mode: SwitchMode, params: GreedyParams):
    # detuned target phase winds at 2B; sample one period of it around the peak
    if mode.kind != "field" or params.phase_samples == 0:
        return [peak]
    period = np.pi / mode.field_strength
    offsets = period * (np.arange(params.phase_samples) / params.phase_samples - 0.5)
    return [t for t in peak + offsets if t > 0]


def greedy_run(spec: ChainSpec, mode: SwitchMode, params: GreedyParams = GreedyParams()) -> SegmentPlan:
    """Greedy switching schedule starting from ``|1>``.

    Each cycle is a free segment to the next site-N peak followed by a trial
    gate segment, kept only if it raises the target population by more than
    ``gain_threshold``.  In field mode the free segment may end up to half a
    target-phase period (``pi / 2B``) away from the peak, whichever of
    ``phase_samples`` offsets gives the largest gate gain.  Stops after
    ``step_budget`` cycles, or once ``patience`` consecutive cycles have
    failed to raise the target population by more than ``gain_threshold``.
    """
    params = params.resolved(spec)
    h_frozen = build_switched(spec, mode, mode.frozen_delta)
    h_gate = build_switched(spec, mode, not mode.frozen_delta)
    prop_frozen, prop_gate = diagonalize(h_frozen), diagonalize(h_gate)

    psi = basis_state(spec.n_sites, 1)
    plan = SegmentPlan(spec, mode)
    best = 0.0
    stale = 0
    for _ in range(params.step_budget):
        plan.cycles += 1
        peak, _ = find_next_peak(psi, h_frozen, params)
        trials = []
        for t in _alignment_times(peak, mode, params):
            trial = evolve(psi, prop_frozen, t)
            trials.append((t, trial, *optimize_switch_interval(trial, h_gate, params)))
        t, psi, duration, gain = max(trials, key=lambda item: item[3])
        plan.segments.append(Segment(
            t, mode.frozen_delta, False, float(abs(psi[-1]) ** 2),
            end_amplitudes=(complex(psi[-2]), complex(psi[-1])),
        ))

        if gain > params.gain_threshold:
            psi = evolve(psi, prop_gate, duration)
            plan.segments.append(
                Segment(duration, not mode.frozen_delta, True, float(abs(psi[-1]) ** 2))
            )

        p = float(abs(psi[-1]) ** 2)
        if p > best + params.gain_threshold:
            best, stale = p, 0
        else:
            stale += 1
            if stale >= params.patience:
                break
    plan.final_state = psi
    return plan


def replay_plan(spec: ChainSpec, mode: SwitchMode, durations, deltas, state=None):
    """Re-run a switching waveform; returns the final state and target populations."""
    hams = {
        False: diagonalize(build_switched(spec, mode, False)),
        True: diagonalize(build_switched(spec, mode, True)),
    }
    psi = basis_state(spec.n_sites, 1) if state is None else np.array(state, dtype=complex)
    probs = []
    for duration, delta in zip(durations, deltas):
        psi = evolve(psi, hams[bool(delta)], duration)
        probs.append(float(abs(psi[-1]) ** 2))
    return psi, np.array(probs)

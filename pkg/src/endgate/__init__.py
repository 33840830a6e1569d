"""State transfer through spin chains with gates applied at the receiving end."""

__version__ = "0.1.0"

from .sector import (
    ChainSpec,
    DisorderSpec,
    SectorHamiltonian,
    apply_disorder,
    basis_state,
    build_engineered,
    build_hamiltonian,
    build_heisenberg,
    build_xy,
    qubit_state,
)
from .propagator import NumericalError, SpectralPropagator, diagonalize, evolve, transfer_amplitude
from .protocol import (
    EndGate,
    ProtocolTrace,
    StepRecord,
    adjoint_replay,
    apply_gate,
    average_fidelity,
    compute_gate,
    equidistant_curve,
    equidistant_schedule,
    first_peak,
    residual_probability,
    run_protocol,
    single_shot_max,
    transfer_qubit,
)
from .switched import (
    GreedyParams,
    NoTransportError,
    SegmentPlan,
    SwitchMode,
    build_switched,
    find_next_peak,
    greedy_run,
    optimize_switch_interval,
)
from .estimators import EndGateTransfer, GreedySwitchTransfer

__all__ = [name for name in dir() if not name.startswith("_")]

"""Single-excitation sector of a spin chain plus one target qubit.

States and Hamiltonians live on the ``N + 2`` dimensional space spanned by
``|0>`` (no excitation), ``|1>, ..., |N>`` (excitation on chain site ``n``) and
``|N+1>`` (excitation on the target qubit).  Index ``k`` of every array is the
basis state ``|k>``.  Units: hbar = 1, energies in units of J, times in 1/J.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

COUPLING_MODELS = ("xy", "heisenberg", "engineered")


@dataclass(frozen=True)
class DisorderSpec:
    """Multiplicative, uniform, i.i.d. disorder on the chain bonds."""

    relative_amplitude: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.relative_amplitude < 1.0:
            raise ValueError(
                f"relative_amplitude must lie in [0, 1), got {self.relative_amplitude}"
            )
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


@dataclass(frozen=True)
class ChainSpec:
    n_sites: int
    coupling_model: str = "xy"
    base_coupling: float = 1.0
    disorder: Optional[DisorderSpec] = None
    field_strength: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "coupling_model", self.coupling_model.lower())
        if int(self.n_sites) != self.n_sites or self.n_sites < 1:
            raise ValueError(f"n_sites must be a positive integer, got {self.n_sites}")
        if self.coupling_model not in COUPLING_MODELS:
            raise ValueError(
                f"coupling_model must be one of {COUPLING_MODELS}, got {self.coupling_model!r}"
            )
        if not self.base_coupling > 0:
            raise ValueError(f"base_coupling must be positive, got {self.base_coupling}")
        if self.field_strength is not None and self.field_strength < 0:
            raise ValueError(f"field_strength must be >= 0, got {self.field_strength}")

    @property
    def dimension(self) -> int:
        return self.n_sites + 2


@dataclass(frozen=True, eq=False)
class SectorHamiltonian:
    """Dense Hermitian sector matrix together with the bonds that produced it.

    ``couplings[n - 1]`` is the strength of the chain bond between sites ``n``
    and ``n + 1``.  ``target_coupling`` is the strength of the bond between
    site ``N`` and the target, or 0 when the target is decoupled.  Instances
    hash by identity, which is what the propagator cache keys on.
    """

    matrix: np.ndarray
    model: str
    couplings: np.ndarray
    target_coupling: float = 0.0
    spec: Optional[ChainSpec] = field(default=None, repr=False)

    def __post_init__(self):
        self.matrix.setflags(write=False)
        self.couplings.setflags(write=False)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_sites(self) -> int:
        return self.dimension - 2

    @property
    def couples_target(self) -> bool:
        n = self.n_sites
        return bool(np.any(self.matrix[n + 1, :] != 0) or np.any(self.matrix[:, n + 1] != 0))


def basis_state(n_sites: int, index: int) -> np.ndarray:
    """Return ``|index>`` as a complex vector of length ``n_sites + 2``."""
    if not 0 <= index <= n_sites + 1:
        raise ValueError(f"index {index} outside 0..{n_sites + 1}")
    psi = np.zeros(n_sites + 2, dtype=complex)
    psi[index] = 1.0
    return psi


def qubit_state(alpha: complex, beta: complex, n_sites: int) -> np.ndarray:
    """``alpha|0> + beta|1>``: the logical qubit loaded on the first chain site."""
    psi = np.zeros(n_sites + 2, dtype=complex)
    psi[0] = alpha
    psi[1] = beta
    return psi


def check_state(state, dimension: Optional[int] = None, atol: float = 1e-10) -> np.ndarray:
    psi = np.asarray(state, dtype=complex)
    if psi.ndim != 1:
        raise ValueError(f"state must be a vector, got shape {psi.shape}")
    if dimension is not None and psi.shape[0] != dimension:
        raise ValueError(f"state has dimension {psi.shape[0]}, expected {dimension}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > atol:
        raise ValueError(f"state is not normalized (norm {norm!r})")
    return psi


def _assemble(model, couplings, target_coupling, spec=None) -> SectorHamiltonian:
    couplings = np.array(couplings, dtype=float)
    n = couplings.size + 1
    h = np.zeros((n + 2, n + 2), dtype=complex)
    bonds = [(site, site + 1, j) for site, j in enumerate(couplings, start=1)]
    if target_coupling:
        bonds.append((n, n + 1, target_coupling))
    for a, b, j in bonds:
        if model == "heisenberg":
            # J s_a.s_b minus its |00> energy J: hop 2J, diagonal -2J per bond
            h[a, b] = h[b, a] = 2.0 * j
            h[a, a] -= 2.0 * j
            h[b, b] -= 2.0 * j
        else:
            h[a, b] = h[b, a] = j
    return SectorHamiltonian(
        matrix=h,
        model=model,
        couplings=couplings,
        target_coupling=float(target_coupling),
        spec=spec,
    )


def _require_model(spec: ChainSpec, model: str):
    if spec.coupling_model != model:
        raise ValueError(f"expected a {model} chain, got {spec.coupling_model}")


def _finish(h: SectorHamiltonian, spec: ChainSpec) -> SectorHamiltonian:
    if spec.disorder is not None:
        return apply_disorder(h, spec.disorder)
    return h


def build_xy(spec: ChainSpec, couple_target: bool = False) -> SectorHamiltonian:
    """XY chain ``J sum s-_n s+_{n+1} + h.c.``; pure hopping in the sector."""
    _require_model(spec, "xy")
    j = spec.base_coupling
    h = _assemble("xy", np.full(spec.n_sites - 1, j), j if couple_target else 0.0, spec)
    return _finish(h, spec)


def build_heisenberg(spec: ChainSpec, couple_target: bool = False) -> SectorHamiltonian:
    """Isotropic chain ``J sum s_n . s_{n+1}`` shifted so that ``H|0> = 0``.

    In the sector this is a hopping of ``2J`` plus the diagonal ``-2J deg(n)``,
    with ``deg(n)`` the number of bonds touching site ``n``.
    """
    _require_model(spec, "heisenberg")
    j = spec.base_coupling
    h = _assemble("heisenberg", np.full(spec.n_sites - 1, j), j if couple_target else 0.0, spec)
    return _finish(h, spec)


def build_engineered(spec: ChainSpec, couple_target: bool = False) -> SectorHamiltonian:
    """Mirror-symmetric profile ``J_n = J sqrt(n (N - n))``.

    Transfers ``|1>`` to ``|N>`` perfectly at ``t = pi / (2J)``.
    """
    _require_model(spec, "engineered")
    if spec.n_sites < 2:
        raise ValueError("an engineered chain needs at least 2 sites")
    n = spec.n_sites
    sites = np.arange(1, n)
    couplings = spec.base_coupling * np.sqrt(sites * (n - sites))
    h = _assemble("engineered", couplings, spec.base_coupling if couple_target else 0.0, spec)
    return _finish(h, spec)


_BUILDERS = {
    "xy": build_xy,
    "heisenberg": build_heisenberg,
    "engineered": build_engineered,
}


def build_hamiltonian(spec: ChainSpec, couple_target: bool = False) -> SectorHamiltonian:
    """Dispatch on ``spec.coupling_model``; applies ``spec.disorder`` if set."""
    return _BUILDERS[spec.coupling_model](spec, couple_target)


def disorder_factors(n_bonds: int, disorder: DisorderSpec) -> np.ndarray:
    rng = np.random.default_rng(int(disorder.seed))
    sigma = disorder.relative_amplitude
    return 1.0 + rng.uniform(-sigma, sigma, size=n_bonds)


def apply_disorder(h: SectorHamiltonian, disorder: DisorderSpec) -> SectorHamiltonian:
    """Rescale every chain bond ``J_n -> J_n (1 + delta_n)``.

    ``delta_n`` is uniform on ``[-sigma, sigma]``, drawn from a generator seeded
    with ``disorder.seed``.  The bond to the target is left alone.  For the
    Heisenberg model the bond's diagonal contribution is rescaled together with
    its hopping, so the result is still a Heisenberg chain.
    """
    if not 0.0 <= disorder.relative_amplitude < 1.0:
        raise ValueError("disorder amplitude must lie in [0, 1)")
    if disorder.relative_amplitude == 0.0:
        return h
    couplings = h.couplings * disorder_factors(h.couplings.size, disorder)
    return _assemble(h.model, couplings, h.target_coupling, h.spec)

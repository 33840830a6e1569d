"""Exact time evolution in the sector by diagonalizing the Hamiltonian once."""
from __future__ import annotations

import threading
import weakref
from dataclasses import dataclass
from typing import Union

import numpy as np

from .sector import SectorHamiltonian

HERMITIAN_ATOL = 1e-10


class NumericalError(ArithmeticError):
    """A numerical invariant (Hermiticity, normalization) was violated."""


@dataclass(frozen=True, eq=False)
class SpectralPropagator:
    """``H = V diag(lambda) V^dagger`` with ``U(t) = V diag(exp(-i lambda t)) V^dagger``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    source: object = None

    @property
    def dimension(self) -> int:
        return self.eigenvalues.shape[0]

    def unitary(self, t: float) -> np.ndarray:
        v = self.eigenvectors
        return (v * np.exp(-1j * self.eigenvalues * t)) @ v.conj().T

    def amplitudes(self, state, index: int, times) -> np.ndarray:
        """``<index|U(t)|state>`` for every ``t`` in ``times``."""
        v = self.eigenvectors
        weights = v[index, :] * (v.conj().T @ np.asarray(state, dtype=complex))
        phases = np.exp(-1j * np.outer(np.atleast_1d(times), self.eigenvalues))
        return phases @ weights


_cache: "weakref.WeakKeyDictionary[SectorHamiltonian, SpectralPropagator]" = (
    weakref.WeakKeyDictionary()
)
_cache_lock = threading.Lock()


def _phase_fix(vectors: np.ndarray) -> np.ndarray:
    # largest-magnitude component of each column made real positive
    pivots = np.argmax(np.abs(vectors) > np.abs(vectors).max(axis=0) - 1e-12, axis=0)
    phases = vectors[pivots, np.arange(vectors.shape[1])]
    return vectors * (np.abs(phases) / phases)


def diagonalize(h: Union[SectorHamiltonian, np.ndarray]) -> SpectralPropagator:
    """Eigendecomposition with ascending eigenvalues and a fixed phase convention.

    Results for a :class:`SectorHamiltonian` are cached per instance.  A bare
    matrix is accepted as well and is never cached.
    """
    if isinstance(h, SectorHamiltonian):
        with _cache_lock:
            cached = _cache.get(h)
        if cached is not None:
            return cached
        matrix = h.matrix
    else:
        matrix = np.asarray(h, dtype=complex)

    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {matrix.shape}")
    asym = np.max(np.abs(matrix - matrix.conj().T)) if matrix.size else 0.0
    if asym > HERMITIAN_ATOL:
        raise NumericalError(f"matrix is not Hermitian (max |H - H^dagger| = {asym:.3e})")

    eigenvalues, eigenvectors = np.linalg.eigh(matrix)
    prop = SpectralPropagator(eigenvalues, _phase_fix(eigenvectors), source=h)
    if isinstance(h, SectorHamiltonian):
        with _cache_lock:
            _cache[h] = prop
    return prop


def _as_propagator(p) -> SpectralPropagator:
    return p if isinstance(p, SpectralPropagator) else diagonalize(p)


def evolve(state, p, t: float) -> np.ndarray:
    """Apply ``exp(-i t H)`` to ``state``.  Negative ``t`` runs time backwards."""
    p = _as_propagator(p)
    psi = np.asarray(state, dtype=complex)
    if psi.shape[0] != p.dimension:
        raise ValueError(f"state has dimension {psi.shape[0]}, propagator {p.dimension}")
    v = p.eigenvectors
    return v @ (np.exp(-1j * p.eigenvalues * t) * (v.conj().T @ psi))


def transfer_amplitude(p, t):
    """``<N|U(t)|1>``; ``t`` may be a scalar or an array of times."""
    p = _as_propagator(p)
    v = p.eigenvectors
    n = p.dimension - 2
    weights = v[n, :] * v[1, :].conj()
    out = np.exp(-1j * np.outer(np.atleast_1d(t), p.eigenvalues)) @ weights
    return out[0] if np.ndim(t) == 0 else out

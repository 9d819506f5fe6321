"""Pure and mixed states on the (g, r, e) (x) Fock product space."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..operators import G, thermal_populations


@dataclass
class QuantumState:
    amplitudes: np.ndarray
    n_max: int

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (3 * (self.n_max + 1),):
            raise ValueError("amplitude vector does not match 3 * (n_max + 1)")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "QuantumState":
        return QuantumState(self.amplitudes / self.norm, self.n_max)

    @classmethod
    def basis(cls, level: int, n: int, n_max: int) -> "QuantumState":
        psi = np.zeros(3 * (n_max + 1), dtype=complex)
        psi[level * (n_max + 1) + n] = 1.0
        return cls(psi, n_max)

    def density(self) -> "DensityOperator":
        return DensityOperator(np.outer(self.amplitudes, self.amplitudes.conj()), self.n_max)


@dataclass
class DensityOperator:
    matrix: np.ndarray
    n_max: int

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        d = 3 * (self.n_max + 1)
        if self.matrix.shape != (d, d):
            raise ValueError(f"density matrix must be {d}x{d}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def hermiticity_error(self) -> float:
        return float(np.abs(self.matrix - self.matrix.conj().T).max())

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T)).min())

    def check(self, herm_tol=1e-10, trace_tol=1e-8, pos_tol=1e-8) -> None:
        if self.hermiticity_error() > herm_tol:
            raise ValueError("density matrix is not Hermitian")
        if abs(self.trace - 1.0) > trace_tol:
            raise ValueError(f"trace {self.trace} != 1")
        if self.min_eigenvalue() < -pos_tol:
            raise ValueError("density matrix has negative eigenvalues")

    def populations(self) -> np.ndarray:
        """Diagonal reshaped to (internal level, n)."""
        return np.real(np.diagonal(self.matrix)).reshape(3, self.n_max + 1)

    def fock_populations(self) -> np.ndarray:
        return self.populations().sum(axis=0)

    def internal_populations(self) -> np.ndarray:
        return self.populations().sum(axis=1)

    def mean_n(self) -> float:
        return float(np.arange(self.n_max + 1) @ self.fock_populations())

    @classmethod
    def thermal(cls, n_mean: float, n_max: int, level: int = G) -> "DensityOperator":
        """Internal state ``level`` times a thermal (truncated, renormalised) motional state."""
        internal = np.zeros((3, 3))
        internal[level, level] = 1.0
        return cls(np.kron(internal, np.diag(thermal_populations(n_mean, n_max))), n_max)

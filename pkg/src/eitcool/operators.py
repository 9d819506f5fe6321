"""Basis conventions and small operator builders shared by the solvers.

Internal states are ordered (g, r, e).  Product-space operators act on
``|internal> (x) |n>`` so a product index is ``3 * 0 + n`` for ``|g, n>``,
``(n_max + 1) + n`` for ``|r, n>`` and so on (``np.kron(internal, fock)``).
Density matrices are vectorised row-major: ``vec(A rho B) = kron(A, B.T) vec(rho)``.
"""
from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.linalg import expm

G, R, E = 0, 1, 2
LEVELS = ("g", "r", "e")


def sigma(i: int, j: int) -> np.ndarray:
    """Internal transition operator ``|i><j|``."""
    m = np.zeros((3, 3), dtype=complex)
    m[i, j] = 1.0
    return m


def internal_hamiltonian(omega_g, omega_r, delta_g, delta_r) -> np.ndarray:
    """Rotating-frame Hamiltonian of the bare Lambda system (no motion)."""
    h = -delta_g * sigma(E, E) - (delta_g - delta_r) * sigma(R, R)
    h = h + 0.5 * omega_g * sigma(E, G) + 0.5 * omega_r * sigma(E, R)
    h = h + 0.5 * omega_g * sigma(G, E) + 0.5 * omega_r * sigma(R, E)
    return h


def internal_jumps(gamma_g, gamma_r) -> list[np.ndarray]:
    ops = []
    if gamma_g > 0:
        ops.append(np.sqrt(gamma_g) * sigma(G, E))
    if gamma_r > 0:
        ops.append(np.sqrt(gamma_r) * sigma(R, E))
    return ops


def liouvillian(h, c_ops) -> np.ndarray | sparse.csr_matrix:
    """Superoperator of ``-i[H, rho] + sum_k D[L_k] rho`` (row-major vec).

    Sparse inputs give a sparse CSR result; dense inputs a dense array.
    """
    is_sparse = sparse.issparse(h)
    kron = sparse.kron if is_sparse else np.kron
    d = h.shape[0]
    eye = sparse.identity(d, dtype=complex, format="csr") if is_sparse else np.eye(d)
    sup = -1j * (kron(h, eye) - kron(eye, h.T))
    for c in c_ops:
        cdc = c.conj().T @ c
        sup = sup + kron(c, c.conj()) - 0.5 * kron(cdc, eye) - 0.5 * kron(eye, cdc.T)
    return sup.tocsr() if is_sparse else sup


def annihilation(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1).astype(complex)


def position(n_max: int) -> np.ndarray:
    """Dimensionless displacement ``a + a^dagger`` on the truncated Fock space."""
    a = annihilation(n_max)
    return a + a.conj().T


def displacement(eta: float, n_max: int, order) -> np.ndarray:
    """``exp(i eta (a + a^dagger))`` expanded to ``order`` in ``eta`` or exactly.

    ``order="exact"`` exponentiates the truncated generator, which keeps the
    result unitary on the truncated space.
    """
    x = position(n_max)
    eye = np.eye(n_max + 1, dtype=complex)
    if order == "exact":
        return expm(1j * eta * x)
    if order == 1:
        return eye + 1j * eta * x
    if order == 2:
        return eye + 1j * eta * x - 0.5 * eta**2 * (x @ x)
    raise ValueError(f"ld_order must be 1, 2 or 'exact', got {order!r}")


def thermal_populations(n_mean: float, n_max: int) -> np.ndarray:
    """Thermal occupation with mean ``n_mean``, truncated at ``n_max`` and renormalised."""
    n = np.arange(n_max + 1)
    if n_mean == 0:
        p = (n == 0).astype(float)
    else:
        q = n_mean / (n_mean + 1.0)
        p = (1.0 - q) * q**n
    return p / p.sum()

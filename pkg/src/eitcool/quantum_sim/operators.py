"""Hamiltonian and collapse operators on (g, r, e) (x) Fock(n_max)."""
from __future__ import annotations

import numpy as np

from ..model import LambdaParams
from ..operators import E, G, R, annihilation, displacement, position, sigma

RECOIL_MODELS = ("none", "lamb-dicke-2nd", "exact")


def _check_order(ld_order):
    if ld_order not in (1, 2, "exact"):
        raise ValueError(f"ld_order must be 1, 2 or 'exact', got {ld_order!r}")


def number_operator(n_max: int) -> np.ndarray:
    return np.kron(np.eye(3), np.diag(np.arange(n_max + 1, dtype=float))).astype(complex)


def internal_projector(level: int, n_max: int) -> np.ndarray:
    return np.kron(sigma(level, level), np.eye(n_max + 1))


def build_hamiltonian(params: LambdaParams, n_max: int, ld_order=2) -> np.ndarray:
    """Rotating-frame Hamiltonian of the Lambda atom coupled to one trap mode.

    The laser recoil factors ``exp(i eta_beam (a + a^dagger))`` are expanded
    to ``ld_order`` in eta or exponentiated exactly (``"exact"``).
    """
    _check_order(ld_order)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if ld_order != "exact" and n_max < ld_order:
        raise ValueError(f"n_max={n_max} too small for ld_order={ld_order}")
    a = annihilation(n_max)
    eye = np.eye(n_max + 1)
    h = params.nu * np.kron(np.eye(3), a.conj().T @ a)
    h = h - params.delta_g * np.kron(sigma(E, E), eye)
    h = h - (params.delta_g - params.delta_r) * np.kron(sigma(R, R), eye)
    drive = 0.5 * params.omega_g * np.kron(sigma(E, G), displacement(params.eta_g, n_max, ld_order))
    drive = drive + 0.5 * params.omega_r * np.kron(sigma(E, R), displacement(params.eta_r, n_max, ld_order))
    h = h + drive + drive.conj().T
    return 0.5 * (h + h.conj().T)


def build_jump_operators(
    params: LambdaParams, n_max: int, recoil_model: str = "lamb-dicke-2nd", eta_emit: float | None = None
) -> list[np.ndarray]:
    """Spontaneous-emission collapse operators for the decay channels e->g, e->r.

    With recoil, each channel splits into three emission-direction branches:
    no kick with weight ``1 - alpha`` and kicks ``exp(+/- i eta_emit x)`` with
    weight ``alpha/2`` each, which reproduces the second moment ``alpha`` of
    the dipole pattern along the trap axis.  ``"lamb-dicke-2nd"`` expands the
    kick to second order in eta, ``"exact"`` exponentiates it.
    """
    if recoil_model not in RECOIL_MODELS:
        raise ValueError(f"unknown recoil_model {recoil_model!r}; choose from {RECOIL_MODELS}")
    eta_e = params.eta if eta_emit is None else eta_emit
    eye = np.eye(n_max + 1)
    ops = []
    for level, rate in ((G, params.gamma_g), (R, params.gamma_r)):
        if rate <= 0:
            continue
        lower = sigma(level, E)
        if recoil_model == "none":
            ops.append(np.sqrt(rate) * np.kron(lower, eye))
            continue
        order = 2 if recoil_model == "lamb-dicke-2nd" else "exact"
        ops.append(np.sqrt(rate * (1.0 - params.alpha)) * np.kron(lower, eye))
        for sign in (1.0, -1.0):
            kick = displacement(sign * eta_e, n_max, order)
            ops.append(np.sqrt(0.5 * rate * params.alpha) * np.kron(lower, kick))
    return ops


def completeness_residual(params: LambdaParams, ops, n_max: int, n_levels: int | None = None) -> float:
    """Spectral norm of ``sum L^dagger L - gamma sigma_ee`` on Fock levels ``n <= n_levels``."""
    total = sum(op.conj().T @ op for op in ops)
    resid = total - params.gamma * internal_projector(E, n_max)
    if n_levels is not None:
        keep = np.concatenate([np.arange(n_levels + 1) + k * (n_max + 1) for k in range(3)])
        resid = resid[np.ix_(keep, keep)]
    return float(np.linalg.norm(resid, 2))


def effective_hamiltonian(h: np.ndarray, ops) -> np.ndarray:
    return h - 0.5j * sum(op.conj().T @ op for op in ops)


def position_operator(n_max: int) -> np.ndarray:
    return np.kron(np.eye(3), position(n_max))

"""Steady-state internal dynamics of the driven Lambda system without motion.

The scattering rate ``gamma * rho_ee`` as a function of the cooling-laser
detuning traces the Fano-like absorption profile whose zero sits at
two-photon resonance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .model import LambdaParams, ParameterError, dressed_states
from .operators import E, G, R, internal_hamiltonian, internal_jumps, liouvillian

__all__ = [
    "SpectrumPoint",
    "bloch_liouvillian",
    "bloch_steady_state",
    "spectrum_scan",
    "sideband_weights",
    "narrow_peak_maximum",
]

SPECTRUM_COLUMNS = ("delta_g", "scatter_rate", "rho_ee", "rho_gg", "rho_rr")


@dataclass(frozen=True)
class SpectrumPoint:
    delta_g: float
    scatter_rate: float
    rho_ee: float
    rho_gg: float
    rho_rr: float
    degenerate: bool = False

    def row(self) -> tuple[float, ...]:
        return tuple(getattr(self, c) for c in SPECTRUM_COLUMNS)


def bloch_liouvillian(params: LambdaParams, delta_g: float | None = None) -> np.ndarray:
    """9x9 superoperator of the three-level optical Bloch equations."""
    d_g = params.delta_g if delta_g is None else delta_g
    h = internal_hamiltonian(params.omega_g, params.omega_r, d_g, params.delta_r)
    return liouvillian(h, internal_jumps(params.gamma_g, params.gamma_r))


def _steady_density(sup: np.ndarray, tol: float = 1e-10) -> tuple[np.ndarray, bool]:
    _, s, vh = np.linalg.svd(sup)
    null_dim = int(np.sum(s <= tol * s[0]))
    if null_dim <= 1:
        rho = vh[-1].conj().reshape(3, 3)
        rho = rho / np.trace(rho)
        return 0.5 * (rho + rho.conj().T), False
    # Degenerate manifold: long-time limit reached from |g><g|, via the
    # spectral projector onto the zero eigenvalues.
    w, v = np.linalg.eig(sup)
    rho0 = np.zeros(9, dtype=complex)
    rho0[G * 3 + G] = 1.0
    coeff = np.linalg.solve(v, rho0)
    keep = np.abs(w) <= tol * s[0]
    rho = (v[:, keep] @ coeff[keep]).reshape(3, 3)
    rho = rho / np.trace(rho)
    return 0.5 * (rho + rho.conj().T), True


def bloch_steady_state(params: LambdaParams, delta_g_override: float | None = None) -> SpectrumPoint:
    """Stationary populations and scattering rate at one cooling-laser detuning.

    A non-unique stationary state (e.g. a decoupled level) is resolved by
    starting from ``|g>`` and the returned point carries ``degenerate=True``.
    """
    if params.gamma_g <= 0 and params.gamma_r <= 0:
        raise ParameterError("gamma_g", "at least one decay channel must be open")
    if params.omega_g <= 0 and params.omega_r <= 0:
        raise ParameterError("omega_g", "at least one laser must be on")
    d_g = params.delta_g if delta_g_override is None else float(delta_g_override)
    rho, degenerate = _steady_density(bloch_liouvillian(params, d_g))
    pops = np.clip(np.real(np.diag(rho)), 0.0, None)
    pops = pops / pops.sum()
    return SpectrumPoint(
        delta_g=d_g,
        scatter_rate=params.gamma * float(pops[E]),
        rho_ee=float(pops[E]),
        rho_gg=float(pops[G]),
        rho_rr=float(pops[R]),
        degenerate=degenerate,
    )


def spectrum_scan(params: LambdaParams, delta_g_range: tuple[float, float], n_points: int) -> list[SpectrumPoint]:
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    lo, hi = delta_g_range
    grid = np.linspace(lo, hi, n_points)
    return [bloch_steady_state(params, d) for d in grid]


def narrow_peak_maximum(params: LambdaParams) -> tuple[float, float]:
    """Location and height of the narrow resonance's maximum.

    The search runs on the side of the dark resonance facing the narrow
    dressed state, where the profile has a single maximum.
    """
    info = dressed_states(params)
    d_r = params.delta_r
    side = 1.0 if d_r >= 0 else -1.0
    reach = abs(info.narrow_position - d_r) + 10.0 * info.narrow_width + 10.0 * params.omega_g
    grid = d_r + side * np.linspace(0.0, reach, 801)[1:]
    rates = np.array([bloch_steady_state(params, d).scatter_rate for d in grid])
    k = int(np.argmax(rates))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, len(grid) - 1)]
    res = minimize_scalar(
        lambda d: -bloch_steady_state(params, d).scatter_rate,
        bounds=(min(lo, hi), max(lo, hi)),
        method="bounded",
        options={"xatol": 1e-10 * max(1.0, abs(d_r))},
    )
    if -res.fun >= rates[k]:
        return float(res.x), float(-res.fun)
    return float(grid[k]), float(rates[k])


def sideband_weights(params: LambdaParams) -> tuple[float, float, float]:
    """Carrier, red and blue sideband excitation weights on two-photon resonance.

    The profile is sampled at ``delta_g`` (carrier), ``delta_g + nu`` (red)
    and ``delta_g - nu`` (blue) and normalised to the narrow-peak maximum.
    """
    if not params.two_photon_resonant:
        raise ParameterError("delta_g", "sideband weights are defined for delta_g == delta_r")
    _, peak = narrow_peak_maximum(params)
    if peak <= 0 or not math.isfinite(peak):
        raise ValueError("narrow resonance has no positive maximum (omega_g = 0?)")
    d = params.delta_g
    carrier, red, blue = (bloch_steady_state(params, d + s).scatter_rate for s in (0.0, params.nu, -params.nu))
    return carrier / peak, red / peak, blue / peak

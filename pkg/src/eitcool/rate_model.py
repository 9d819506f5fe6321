"""Lamb-Dicke rate equation for the vibrational populations.

Covers the heating/cooling coefficients, the steady-state occupation and
its closed form, the cooling rate, the birth-death dynamics of ``P(n)``,
and the comparison with two-level sideband cooling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy import sparse
from scipy.integrate import solve_ivp

from .model import LambdaParams, ParameterError, dressed_states

__all__ = [
    "DivergentSteadyStateError",
    "NoCoolingError",
    "TruncationError",
    "RateCoefficients",
    "PopulationDistribution",
    "rate_coefficients",
    "steady_state_mean_n",
    "steady_state_from_coefficients",
    "cooling_rate",
    "mean_n_closed_form",
    "evolve_populations",
    "steady_state_distribution",
    "matched_sc_parameters",
    "sc_rate_coefficients",
    "eit_vs_sc_ratio",
    "SweepRow",
    "rate_sweep",
]

DEFAULT_N_MAX = 60
DEFAULT_TAIL_TOL = 1e-6
_POLE_TOL = 1e-12


class DivergentSteadyStateError(ArithmeticError):
    """Heating and cooling balance exactly (A+ == A-): no finite steady state."""


class NoCoolingError(ArithmeticError):
    """Heating exceeds cooling (A+ > A-): populations run away."""


class TruncationError(RuntimeError):
    """Population reached the top of the truncated Fock space."""


class RateCoefficients(NamedTuple):
    a_plus: float
    a_minus: float

    @property
    def cools(self) -> bool:
        return self.a_minus > self.a_plus


@dataclass(frozen=True)
class PopulationDistribution:
    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 1 or p.size < 2:
            raise ValueError("need a 1-d vector with at least two Fock levels")
        object.__setattr__(self, "p", p)

    @property
    def n_max(self) -> int:
        return self.p.size - 1

    @property
    def mean(self) -> float:
        return float(np.arange(self.p.size) @ self.p)

    @property
    def tail_mass(self) -> float:
        return float(self.p[-2] + self.p[-1])

    @property
    def total(self) -> float:
        return float(self.p.sum())

    def padded(self, n_max: int) -> "PopulationDistribution":
        if n_max < self.n_max:
            raise ValueError("can only pad to a larger n_max")
        return PopulationDistribution(np.pad(self.p, (0, n_max - self.n_max)))

    @classmethod
    def fock(cls, n: int, n_max: int) -> "PopulationDistribution":
        p = np.zeros(n_max + 1)
        p[n] = 1.0
        return cls(p)

    @classmethod
    def thermal(cls, n_mean: float, n_max: int) -> "PopulationDistribution":
        from .operators import thermal_populations

        return cls(thermal_populations(n_mean, n_max))


def _require_resonant(params: LambdaParams) -> float:
    if not params.two_photon_resonant:
        raise ParameterError(
            "delta_g", "rate coefficients are only defined on two-photon resonance (delta_g == delta_r)"
        )
    return params.delta_g


def rate_coefficients(params: LambdaParams) -> RateCoefficients:
    d = _require_resonant(params)
    g, nu, w_r, w_g = params.gamma, params.nu, params.omega_r, params.omega_g
    prefactor = w_g**2 / g
    gn2 = (g * nu) ** 2

    def coefficient(sign: float) -> float:
        bracket = w_r**2 / 4 - nu * (nu - sign * d)
        return prefactor * gn2 / (gn2 + 4 * bracket**2)

    return RateCoefficients(coefficient(+1.0), coefficient(-1.0))


def steady_state_from_coefficients(coeffs: RateCoefficients) -> float:
    a_p, a_m = coeffs
    diff = a_m - a_p
    if abs(diff) <= _POLE_TOL * max(a_p, a_m) or (a_p == 0 and a_m == 0):
        raise DivergentSteadyStateError("A+ == A-: steady state diverges")
    if diff < 0:
        raise NoCoolingError(f"A+={a_p:g} > A-={a_m:g}: heating regime")
    return a_p / diff


def steady_state_mean_n(params: LambdaParams) -> float:
    """Closed-form steady-state mean phonon number.

    Raises :class:`DivergentSteadyStateError` on the poles (zero detuning or
    ``omega_r == 2 nu``) and :class:`NoCoolingError` in the heating regime.
    """
    d = _require_resonant(params)
    g, nu, w_r = params.gamma, params.nu, params.omega_r
    rabi_term = w_r**2 - 4 * nu**2
    if d == 0 or abs(rabi_term) <= _POLE_TOL * (w_r**2 + 4 * nu**2):
        raise DivergentSteadyStateError(f"pole at delta={d:g}, omega_r={w_r:g}, nu={nu:g}")
    numerator = (g * nu) ** 2 + 4 * (w_r**2 / 4 - nu * (nu + d)) ** 2
    denominator = 4 * d * nu * rabi_term
    if denominator < 0:
        raise NoCoolingError("delta * (omega_r^2 - 4 nu^2) < 0: heating regime")
    return numerator / denominator


def cooling_rate(params: LambdaParams) -> float:
    """Net cooling rate ``eta^2 (A- - A+)``; negative values mean heating."""
    a_p, a_m = rate_coefficients(params)
    return params.eta**2 * (a_m - a_p)


def mean_n_closed_form(params: LambdaParams, n0: float, t):
    """Exponential relaxation of the mean phonon number towards the steady state."""
    w = cooling_rate(params)
    n_s = steady_state_mean_n(params)
    t = np.asarray(t, dtype=float)
    out = n_s + (n0 - n_s) * np.exp(-w * t)
    return float(out) if out.ndim == 0 else out


def _generator(params: LambdaParams, n_max: int) -> sparse.csr_matrix:
    """Birth-death generator M with dP/dt = M P and reflecting top boundary."""
    a_p, a_m = rate_coefficients(params)
    e2 = params.eta**2
    n = np.arange(n_max + 1, dtype=float)
    up = e2 * a_p * (n + 1)  # n -> n+1
    up[-1] = 0.0
    down = e2 * a_m * n  # n -> n-1
    diag = -(up + down)
    return sparse.diags([diag, up[:-1], down[1:]], [0, -1, 1], format="csr")


def evolve_populations(
    params: LambdaParams,
    p0: PopulationDistribution,
    t_grid: Sequence[float],
    tail_tol: float = DEFAULT_TAIL_TOL,
    max_doublings: int = 4,
    rtol: float = 1e-9,
    atol: float = 1e-14,
) -> list[PopulationDistribution]:
    """Integrate the birth-death equations for ``P(n)`` on ``t_grid``.

    When the top two Fock levels gather more than ``tail_tol`` the
    truncation is doubled (up to ``max_doublings`` times) before giving up
    with :class:`TruncationError`.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    if abs(p0.total - 1.0) > 1e-9:
        raise ValueError(f"p0 not normalised (sum={p0.total!r})")
    current = p0
    for _ in range(max_doublings + 1):
        m = _generator(params, current.n_max)
        sol = solve_ivp(
            lambda _t, y: m @ y,
            (t_grid[0], t_grid[-1]),
            current.p,
            method="RK45",
            t_eval=t_grid,
            rtol=rtol,
            atol=atol,
        )
        if not sol.success:
            raise RuntimeError(sol.message)
        tails = sol.y[-2] + sol.y[-1]
        if np.all(tails <= tail_tol):
            return [PopulationDistribution(col) for col in sol.y.T]
        current = current.padded(2 * current.n_max)
    raise TruncationError(
        f"tail mass {tails.max():.3g} > {tail_tol:g} even at n_max={current.n_max // 2}; "
        "increase n_max or check that the parameters cool (A- > A+)"
    )


def steady_state_distribution(params: LambdaParams, n_max: int = DEFAULT_N_MAX) -> PopulationDistribution:
    """Detailed-balance (thermal) distribution ``P(n) ~ (A+/A-)^n``."""
    a_p, a_m = rate_coefficients(params)
    if a_m <= a_p:
        raise NoCoolingError("A- <= A+: no normalisable steady state")
    q = a_p / a_m
    p = q ** np.arange(n_max + 1, dtype=float)
    return PopulationDistribution(p / p.sum())


def matched_sc_parameters(params: LambdaParams, gamma_sc: float | None = None) -> tuple[float, float]:
    """Sideband-cooling linewidth and Rabi frequency with equal saturation.

    ``gamma_sc`` defaults to the exact narrow dressed-state width; the Rabi
    frequency follows from ``(omega_sc/gamma_sc)^2 = omega_g^2/(gamma gamma')``.
    """
    narrow = dressed_states(params).narrow_width
    if gamma_sc is None:
        gamma_sc = narrow
    omega_sc = gamma_sc * params.omega_g / math.sqrt(params.gamma * narrow)
    return gamma_sc, omega_sc


def _cos2(phi: float) -> float:
    c2 = math.cos(phi) ** 2
    if c2 < 1e-300 or abs(math.cos(phi)) < 1e-15:
        raise ValueError("cos(phi) = 0: carrier recoil term diverges")
    return c2


def sc_rate_coefficients(
    params: LambdaParams, gamma_sc: float, omega_sc: float, phi: float, alpha: float | None = None
) -> RateCoefficients:
    """Two-level sideband-cooling coefficients at matched saturation."""
    alpha = params.alpha if alpha is None else alpha
    base = rate_coefficients(params)
    extra = (omega_sc**2 / gamma_sc) * (alpha / _cos2(phi)) * gamma_sc**2 / (gamma_sc**2 + 4 * params.nu**2)
    return RateCoefficients(base.a_plus + extra, base.a_minus + extra)


def eit_vs_sc_ratio(alpha: float, phi: float) -> float:
    """Ratio of EIT to sideband-cooling limits at equal cooling rate (gamma_sc << nu)."""
    return 1.0 / (1.0 + 4.0 * alpha / _cos2(phi))


class SweepRow(NamedTuple):
    sweep_var: float
    a_plus: float
    a_minus: float
    n_s: float
    w: float
    status: str


def rate_sweep(params: LambdaParams, variable: str, values: Sequence[float]) -> list[SweepRow]:
    """Evaluate coefficients, limit and rate along one parameter.

    Sweeping ``delta`` moves both detunings together.  Points on a pole or
    in the heating regime get ``n_s = nan`` and a status of ``"pole"`` or
    ``"heating"`` rather than being dropped.
    """
    rows = []
    for v in values:
        v = float(v)
        if variable == "delta":
            p = params.with_(delta_g=v, delta_r=v)
        else:
            p = params.with_(**{variable: v})
        a_p, a_m = rate_coefficients(p)
        w = p.eta**2 * (a_m - a_p)
        try:
            n_s, status = steady_state_mean_n(p), "ok"
        except DivergentSteadyStateError:
            n_s, status = math.nan, "pole"
        except NoCoolingError:
            n_s, status = math.nan, "heating"
        rows.append(SweepRow(v, a_p, a_m, n_s, w, status))
    return rows

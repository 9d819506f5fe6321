"""Parameters of the driven Lambda system and analytic dressed-state quantities.

All rates (linewidths, Rabi frequencies, detunings, trap frequency) are
expressed in units of the excited-state linewidth ``gamma``; only
:func:`lamb_dicke` works in SI units.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.constants import hbar

__all__ = [
    "ParameterError",
    "LambdaParams",
    "DressedStateInfo",
    "OptimalRabi",
    "LambDicke",
    "validate",
    "ac_stark_shift",
    "dressed_states",
    "optimal_detuning",
    "optimal_rabi",
    "lamb_dicke",
    "fig3_params",
]

_REL_TOL = 1e-12


class ParameterError(ValueError):
    """Invalid parameter value; ``field`` names the offending parameter."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class LambdaParams:
    """Laser, atom and trap parameters of the Lambda system.

    ``gamma_g``/``gamma_r`` default to an even split of ``gamma``.
    ``eta_g``/``eta_r`` default to ``eta`` and ``0`` (recoil-free coupling beam).
    """

    omega_g: float = 0.05
    omega_r: float = 1.0
    delta_g: float = 2.5
    delta_r: float = 2.5
    nu: float = 0.1
    eta: float = 0.145
    gamma: float = 1.0
    gamma_g: float | None = None
    gamma_r: float | None = None
    eta_g: float | None = None
    eta_r: float | None = None
    alpha: float = 0.4

    def __post_init__(self):
        if self.gamma_g is None and self.gamma_r is None:
            object.__setattr__(self, "gamma_g", 0.5 * self.gamma)
            object.__setattr__(self, "gamma_r", 0.5 * self.gamma)
        elif self.gamma_g is None:
            object.__setattr__(self, "gamma_g", self.gamma - self.gamma_r)
        elif self.gamma_r is None:
            object.__setattr__(self, "gamma_r", self.gamma - self.gamma_g)
        if self.eta_g is None and self.eta_r is None:
            object.__setattr__(self, "eta_g", self.eta)
            object.__setattr__(self, "eta_r", 0.0)
        elif self.eta_g is None:
            object.__setattr__(self, "eta_g", self.eta_r + self.eta)
        elif self.eta_r is None:
            object.__setattr__(self, "eta_r", self.eta_g - self.eta)
        self.check()

    def check(self) -> None:
        """Raise :class:`ParameterError` on any invariant violation."""
        for name in fields(self):
            value = getattr(self, name.name)
            if not math.isfinite(value):
                raise ParameterError(name.name, f"must be finite, got {value!r}")
        if self.gamma <= 0:
            raise ParameterError("gamma", "must be > 0")
        if self.nu <= 0:
            raise ParameterError("nu", "must be > 0")
        if self.omega_r < 0:
            raise ParameterError("omega_r", "must be >= 0")
        if self.omega_g < 0:
            raise ParameterError("omega_g", "must be >= 0")
        if self.eta < 0:
            raise ParameterError("eta", "must be >= 0")
        if not 0 < self.alpha <= 1:
            raise ParameterError("alpha", "must lie in (0, 1]")
        if self.gamma_g < 0:
            raise ParameterError("gamma_g", "must be >= 0")
        if self.gamma_r < 0:
            raise ParameterError("gamma_r", "must be >= 0")
        if abs(self.gamma_g + self.gamma_r - self.gamma) > _REL_TOL * self.gamma:
            raise ParameterError("gamma_g", "gamma_g + gamma_r must equal gamma")
        if abs(abs(self.eta_g - self.eta_r) - self.eta) > _REL_TOL * max(1.0, self.eta):
            raise ParameterError("eta_g", "|eta_g - eta_r| must equal eta")

    def with_(self, **changes) -> "LambdaParams":
        """Copy with ``changes`` applied.

        Changing ``gamma`` re-splits the partial rates and changing ``eta``
        re-derives the beam parameters unless those are given explicitly.
        """
        if "gamma" in changes and not {"gamma_g", "gamma_r"} & changes.keys():
            ratio = self.gamma_g / self.gamma
            changes["gamma_g"] = ratio * changes["gamma"]
            changes["gamma_r"] = (1.0 - ratio) * changes["gamma"]
        if "eta" in changes and not {"eta_g", "eta_r"} & changes.keys():
            changes["eta_g"] = None
            changes["eta_r"] = None
        return replace(self, **changes)

    @property
    def delta(self) -> float:
        """Common detuning; only meaningful on two-photon resonance."""
        return self.delta_g

    @property
    def two_photon_resonant(self) -> bool:
        scale = max(abs(self.delta_g), abs(self.delta_r), self.gamma)
        return abs(self.delta_g - self.delta_r) <= _REL_TOL * scale

    def to_dict(self) -> dict[str, float]:
        return {k: float(v) for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, data: dict) -> "LambdaParams":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ParameterError(sorted(unknown)[0], "unknown parameter")
        return cls(**{k: (None if v is None else float(v)) for k, v in data.items()})

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "LambdaParams":
        return cls.from_dict(json.loads(Path(path).read_text()))


def fig3_params(**changes) -> LambdaParams:
    """Operating point of the reference cooling run (Omega_r=gamma, Omega_g=gamma/20, ...)."""
    base = LambdaParams(omega_g=0.05, omega_r=1.0, delta_g=2.5, delta_r=2.5, nu=0.1, eta=0.145)
    return base.with_(**changes) if changes else base


@dataclass(frozen=True)
class DressedStateInfo:
    delta_shift: float
    narrow_position: float
    broad_position: float
    narrow_width: float
    broad_width: float
    approx_narrow_width: float  # gamma * nu / |delta_r|, valid near delta_shift = nu


class OptimalRabi(NamedTuple):
    omega_r: float
    at_pole: bool


class LambDicke(NamedTuple):
    eta: float
    eta_g: float
    eta_r: float


def ac_stark_shift(delta_r: float, omega_r: float) -> float:
    """Light shift of the dressed states induced by the coupling laser."""
    if omega_r < 0:
        raise ValueError("omega_r must be >= 0")
    # (sqrt(D^2 + W^2) - |D|)/2 rewritten to avoid cancellation at large |D|
    if omega_r == 0:
        return 0.0
    return 0.5 * omega_r**2 / (math.hypot(delta_r, omega_r) + abs(delta_r))


def dressed_states(params: LambdaParams) -> DressedStateInfo:
    """Positions and exact widths of the narrow and broad absorption resonances."""
    d_r, w_r, gamma = params.delta_r, params.omega_r, params.gamma
    if w_r <= 0:
        raise ParameterError("omega_r", "must be > 0")
    shift = ac_stark_shift(d_r, w_r)
    m = np.array([[0.0, w_r / 2], [w_r / 2, -d_r - 0.5j * gamma]])
    widths = np.sort(-2.0 * np.linalg.eigvals(m).imag)
    sign = 1.0 if d_r >= 0 else -1.0
    approx = gamma * params.nu / abs(d_r) if d_r != 0 else math.inf
    return DressedStateInfo(
        delta_shift=shift,
        narrow_position=d_r + sign * shift,
        broad_position=-sign * shift,
        narrow_width=float(widths[0]),
        broad_width=float(widths[1]),
        approx_narrow_width=approx,
    )


def optimal_detuning(omega_r: float, nu: float) -> float:
    """Detuning at which the light shift equals the trap frequency."""
    if nu <= 0:
        raise ValueError("nu must be > 0")
    if omega_r <= 2 * nu:
        raise ValueError(
            f"omega_r={omega_r} <= 2*nu={2 * nu}: no positive detuning gives a light shift of nu"
        )
    return (omega_r**2 - 4 * nu**2) / (4 * nu)


def optimal_rabi(delta: float, nu: float) -> OptimalRabi:
    """Coupling Rabi frequency that zeroes the detuning-dependent heating term."""
    if delta < 0 or nu <= 0:
        raise ValueError("need delta >= 0 and nu > 0")
    return OptimalRabi(2.0 * math.sqrt(nu * (nu + delta)), delta == 0)


def lamb_dicke(k_g_vector, k_r_vector, mass: float, nu: float, mode_axis) -> LambDicke:
    """Lamb-Dicke parameters for a mode along ``mode_axis`` (SI units, ``nu`` in rad/s).

    The per-beam values are signed projections so that ``eta_g - eta_r``
    carries the relative orientation of the beams.
    """
    if mass <= 0:
        raise ValueError("mass must be > 0")
    if nu <= 0:
        raise ValueError("nu must be > 0")
    axis = np.asarray(mode_axis, dtype=float)
    norm = np.linalg.norm(axis)
    if norm == 0:
        raise ValueError("mode_axis must be non-zero")
    axis = axis / norm
    a0 = math.sqrt(hbar / (2.0 * mass * nu))
    eta_g = float(np.dot(k_g_vector, axis)) * a0
    eta_r = float(np.dot(k_r_vector, axis)) * a0
    return LambDicke(abs(eta_g - eta_r), eta_g, eta_r)


def validate(params: LambdaParams, initial_n_mean: float = 2.0) -> list[str]:
    """Warnings for parameters outside the rate equation's validity domain.

    Invariant violations raise :class:`ParameterError`; soft conditions are
    returned as human-readable strings.
    """
    params.check()
    if initial_n_mean < 0:
        raise ParameterError("initial_n_mean", "must be >= 0")
    warnings = []
    if params.omega_g >= 0.2 * params.omega_r:
        warnings.append(
            "cooling laser not weak relative to coupling laser "
            f"(omega_g={params.omega_g:g} >= 0.2*omega_r={0.2 * params.omega_r:g})"
        )
    if params.omega_r == 0:
        warnings.append("coupling laser off: no dark resonance")
        narrow = 0.0
    else:
        narrow = dressed_states(params).narrow_width
    limit = 0.5 * math.sqrt(params.gamma * narrow)
    if params.omega_r > 0 and params.omega_g >= limit:
        warnings.append(
            "narrow dressed-state transition saturated "
            f"(omega_g={params.omega_g:g} >= 0.5*sqrt(gamma*gamma')={limit:g})"
        )
    ld = params.eta**2 * (initial_n_mean + 1)
    if ld >= 0.1:
        warnings.append(f"outside Lamb-Dicke regime (eta^2 (n+1)={ld:g} >= 0.1)")
    if not params.two_photon_resonant:
        warnings.append("delta_g != delta_r: closed-form rate coefficients do not apply")
    return warnings

"""Lindblad master equation for the Lambda atom and one trap mode.

Long cooling runs are dominated by the separation between the internal
time scales (~1/gamma) and the cooling time (~1/(eta^2 A-)).  After an
initial stretch integrated with an explicit Runge-Kutta method the
propagation therefore switches to an L-stable rational (Pade (1, 2))
approximation of ``exp(h L)`` applied through sparse LU factors, which
takes steps of hundreds of 1/gamma while damping the fast transients.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import factorial

import numpy as np
from scipy import sparse
from scipy.integrate import solve_ivp
from scipy.sparse.linalg import splu

from ..model import LambdaParams, dressed_states
from ..operators import E, liouvillian
from ..rate_model import PopulationDistribution, TruncationError
from .operators import build_hamiltonian, build_jump_operators, effective_hamiltonian
from .states import DensityOperator

log = logging.getLogger(__name__)

TAIL_TOL = 1e-6


class MultiplicityError(RuntimeError):
    """The Liouvillian has more than one stationary state."""


@dataclass
class MasterResult:
    t_grid: np.ndarray
    n_mean: np.ndarray
    pops_internal: np.ndarray  # shape (n_times, 3), columns g, r, e
    final_pn: PopulationDistribution
    tail_mass: np.ndarray
    trace: np.ndarray
    states: list[DensityOperator] | None = None
    method: str = "rk"
    info: dict = field(default_factory=dict)


class LindbladSystem:
    """Pre-built operators for repeated propagation of one parameter set."""

    def __init__(self, params: LambdaParams, n_max: int, ld_order=2, recoil_model="lamb-dicke-2nd",
                 eta_emit: float | None = None):
        self.params = params
        self.n_max = n_max
        self.dim = 3 * (n_max + 1)
        self.hamiltonian = build_hamiltonian(params, n_max, ld_order)
        self.jump_ops = build_jump_operators(params, n_max, recoil_model, eta_emit)
        self.h_eff = sparse.csr_matrix(effective_hamiltonian(self.hamiltonian, self.jump_ops))
        self._blocks = self._jump_blocks()
        self._sup = None

    def _jump_blocks(self):
        # every collapse operator maps |e> onto a lower level, so L rho L^dag
        # only needs the ee block of rho
        nb = self.n_max + 1
        blocks = []
        for op in self.jump_ops:
            mask = np.abs(op) > 0
            rows, cols = np.nonzero(mask)
            if rows.size == 0:
                continue
            src = set(cols // nb)
            dst = set(rows // nb)
            if src != {E} or len(dst) != 1:
                return None
            level = dst.pop()
            blocks.append((level, op[level * nb:(level + 1) * nb, E * nb:(E + 1) * nb].copy()))
        return blocks

    @property
    def superoperator(self) -> sparse.csc_matrix:
        if self._sup is None:
            self._sup = liouvillian(
                sparse.csr_matrix(self.hamiltonian), [sparse.csr_matrix(op) for op in self.jump_ops]
            ).tocsc()
        return self._sup

    def rhs(self, rho: np.ndarray) -> np.ndarray:
        x = self.h_eff @ rho
        out = -1j * (x - x.conj().T)
        if self._blocks is None:
            for op in self.jump_ops:
                out += op @ rho @ op.conj().T
            return out
        nb = self.n_max + 1
        ee = rho[E * nb:, E * nb:]
        for level, k in self._blocks:
            out[level * nb:(level + 1) * nb, level * nb:(level + 1) * nb] += k @ ee @ k.conj().T
        return out

    def _rk(self, rho0: np.ndarray, t_eval: np.ndarray, rtol: float, atol: float) -> np.ndarray:
        d = self.dim
        sol = solve_ivp(
            lambda _t, y: self.rhs(y.reshape(d, d)).ravel(),
            (t_eval[0], t_eval[-1]),
            rho0.ravel(),
            method="RK45",
            t_eval=t_eval,
            rtol=rtol,
            atol=atol,
        )
        if not sol.success:
            raise RuntimeError(sol.message)
        return sol.y.T.reshape(-1, d, d)

    def rational_stepper(self, h: float, order: int = 1):
        """Return ``step(vec_rho)`` applying the Pade (order, order+1) approximant of exp(h L)."""
        m, n = order, order + 1
        num = [factorial(m + n - j) * factorial(m) / (factorial(m + n) * factorial(j) * factorial(m - j))
               for j in range(m + 1)]
        den = [(-1) ** j * factorial(m + n - j) * factorial(n) / (factorial(m + n) * factorial(j) * factorial(n - j))
               for j in range(n + 1)]
        poles = np.roots(den[::-1])
        dden = np.polyder(np.array(den[::-1]))
        residues = [np.polyval(num[::-1], p) / np.polyval(dden, p) for p in poles]
        eye = sparse.identity(self.dim**2, dtype=complex, format="csc")
        lus = [splu((h * self.superoperator - p * eye).tocsc()) for p in poles]

        def step(vec):
            return sum(r * lu.solve(vec) for r, lu in zip(residues, lus))

        return step


def _transient_time(params: LambdaParams) -> float:
    """Time after which the internal dynamics has relaxed onto the slow manifold."""
    if params.omega_r > 0:
        slowest = dressed_states(params).narrow_width
    else:
        slowest = params.gamma
    return 20.0 / max(slowest, 1e-3 * params.gamma)


def _uniform(t: np.ndarray) -> bool:
    if t.size < 2:
        return False
    dt = np.diff(t)
    return bool(np.allclose(dt, dt[0], rtol=1e-9, atol=0.0))


def evolve_master(
    params: LambdaParams,
    rho0: DensityOperator,
    t_grid,
    n_max: int | None = None,
    ld_order=2,
    recoil_model: str = "lamb-dicke-2nd",
    method: str = "auto",
    max_step: float = 600.0,
    store_states: bool = True,
    tail_tol: float = TAIL_TOL,
    rtol: float = 1e-8,
    atol: float = 1e-11,
    eta_emit: float | None = None,
) -> MasterResult:
    """Integrate the master equation from ``rho0`` and sample it on ``t_grid``.

    ``method="rk"`` integrates everything with adaptive RK45;
    ``"rational"`` integrates with RK45 up to the first grid time past the
    internal transient and then uses L-stable rational steps of at most
    ``max_step``; ``"auto"`` picks ``"rational"`` for long horizons on a
    uniform grid.  Raises :class:`TruncationError` when the top two Fock
    levels hold more than ``tail_tol``.
    """
    n_max = rho0.n_max if n_max is None else n_max
    if rho0.n_max != n_max:
        raise ValueError("rho0 truncation does not match n_max")
    rho0.check()
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 1 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    system = LindbladSystem(params, n_max, ld_order, recoil_model, eta_emit)

    t_switch = t_grid[0] + _transient_time(params)
    k_switch = int(np.searchsorted(t_grid, t_switch))
    tail_grid = t_grid[k_switch:]
    if method == "auto":
        long_run = t_grid[-1] - t_switch > 20 * max_step
        method = "rational" if long_run and _uniform(tail_grid) else "rk"
    if method not in ("rk", "rational"):
        raise ValueError(f"unknown method {method!r}")

    if t_grid.size == 1:
        rhos = rho0.matrix[None].copy()
    elif method == "rk" or k_switch >= t_grid.size - 1:
        method = "rk"
        rhos = system._rk(rho0.matrix, t_grid, rtol, atol)
    else:
        k_switch = max(k_switch, 1)
        head = system._rk(rho0.matrix, t_grid[: k_switch + 1], rtol, atol)
        rhos = np.empty((t_grid.size, system.dim, system.dim), dtype=complex)
        rhos[: k_switch + 1] = head
        intervals = np.diff(t_grid[k_switch:])
        n_sub = int(np.ceil(intervals.max() / max_step - 1e-9))
        steppers = {}
        vec = head[-1].ravel()
        for k, dt in enumerate(intervals, start=k_switch + 1):
            h = round(dt / n_sub, 9)
            if h not in steppers:
                steppers[h] = system.rational_stepper(dt / n_sub)
            for _ in range(n_sub):
                vec = steppers[h](vec)
            rho = vec.reshape(system.dim, system.dim)
            rho = 0.5 * (rho + rho.conj().T)
            vec = rho.ravel()
            rhos[k] = rho
        log.debug("rational propagation: %d steppers, %d substeps/interval", len(steppers), n_sub)

    nb = n_max + 1
    diag = np.real(np.einsum("kii->ki", rhos)).reshape(-1, 3, nb)
    fock = diag.sum(axis=1)
    tail = fock[:, -2] + fock[:, -1]
    if np.any(tail > tail_tol):
        k = int(np.argmax(tail > tail_tol))
        raise TruncationError(
            f"top Fock levels hold {tail[k]:.3g} > {tail_tol:g} at t={t_grid[k]:g}; increase n_max"
        )
    trace = np.real(np.einsum("kii->k", rhos))
    n_mean = fock @ np.arange(nb)
    pops = diag.sum(axis=2)
    final = fock[-1] / fock[-1].sum()
    states = [DensityOperator(r, n_max) for r in rhos] if store_states else None
    return MasterResult(
        t_grid=t_grid,
        n_mean=n_mean,
        pops_internal=pops,
        final_pn=PopulationDistribution(np.clip(final, 0.0, None)),
        tail_mass=tail,
        trace=trace,
        states=states,
        method=method,
        info={"n_max": n_max, "ld_order": ld_order, "recoil_model": recoil_model},
    )


def steady_state_master(
    params: LambdaParams,
    n_max: int,
    ld_order=2,
    recoil_model: str = "lamb-dicke-2nd",
    tol: float = 1e-6,
    eta_emit: float | None = None,
) -> DensityOperator:
    """Stationary state from a sparse solve of the vectorised Liouvillian.

    One equation (the ``|g,0><g,0|`` row) is replaced by a normalisation
    condition.  The solve is repeated with a second, unrelated normalisation
    functional; a unique stationary state gives the same answer, otherwise
    :class:`MultiplicityError` is raised.
    """
    system = LindbladSystem(params, n_max, ld_order, recoil_model, eta_emit)
    d = system.dim
    sup = system.superoperator.tolil()
    diag_idx = np.arange(d) * (d + 1)
    rng = np.random.default_rng(0)
    solutions = []
    for weights in (np.ones(d), rng.uniform(0.5, 1.5, d)):
        a = sup.copy()
        a[0, :] = 0.0
        a[0, diag_idx] = weights
        b = np.zeros(d * d, dtype=complex)
        b[0] = 1.0
        try:
            vec = splu(a.tocsc()).solve(b)
        except RuntimeError as exc:
            raise MultiplicityError(f"singular Liouvillian: stationary state not unique ({exc})") from exc
        if not np.all(np.isfinite(vec)):
            raise MultiplicityError("singular Liouvillian: stationary state not unique")
        rho = vec.reshape(d, d)
        rho = rho / np.trace(rho)
        solutions.append(0.5 * (rho + rho.conj().T))
    spread = np.abs(solutions[0] - solutions[1]).max()
    residual = np.abs(system.superoperator @ solutions[0].ravel()).max()
    if spread > tol or residual > tol:
        raise MultiplicityError(
            f"stationary state not unique (solutions differ by {spread:.2g}, residual {residual:.2g})"
        )
    return DensityOperator(solutions[0], n_max)

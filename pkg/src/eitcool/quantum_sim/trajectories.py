"""Monte Carlo wave-function (quantum jump) unravelling of the master equation.

Between jumps the state evolves under ``H_eff = H - i/2 sum L^dag L``.  The
evolution is carried out in the eigenbasis of ``H_eff`` (a small, well
conditioned matrix here), so the unnormalised state is available at any
time in closed form.  Its squared norm decreases monotonically, which
lets a pre-drawn uniform threshold be located exactly by bisection.
"""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from ..model import LambdaParams
from ..operators import G
from ..rate_model import PopulationDistribution, TruncationError
from .operators import build_hamiltonian, build_jump_operators, effective_hamiltonian
from .states import QuantumState

log = logging.getLogger(__name__)

TAIL_TOL = 1e-6
BISECT_TOL = 1e-10


@dataclass(frozen=True)
class ThermalFock:
    """Per-trajectory initial state ``|level, n>`` with ``n`` drawn from a thermal law.

    Averaged over trajectories this reproduces ``|level><level| (x) rho_thermal``.
    """

    n_mean: float
    level: int = G


@dataclass
class EnsembleResult:
    t_grid: np.ndarray
    n_mean: np.ndarray
    n_mean_stderr: np.ndarray
    pops_internal: np.ndarray  # (n_times, 3) columns g, r, e
    final_pn: PopulationDistribution
    n_traj: int
    seed: int
    n_jumps: np.ndarray  # jumps per trajectory
    tail_mass: np.ndarray

    def rows(self):
        for k, t in enumerate(self.t_grid):
            yield (t, self.n_mean[k], self.n_mean_stderr[k], *self.pops_internal[k])


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for trajectory ``index``; depends only on ``(seed, index)``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


class _Propagator:
    """No-jump evolution ``psi(tau) = V exp(-i lam tau) V^-1 psi(0)``."""

    def __init__(self, h_eff: np.ndarray):
        lam, vec = np.linalg.eig(h_eff)
        self.exact = np.linalg.cond(vec) < 1e8
        self.h_eff = h_eff
        if self.exact:
            self.lam = lam
            self.vec = vec
            self.vec_inv = np.linalg.inv(vec)
            self.gram = vec.conj().T @ vec

    def coefficients(self, psi):
        return self.vec_inv @ psi if self.exact else psi

    def state(self, coeff, tau):
        if self.exact:
            return self.vec @ (np.exp(-1j * self.lam * tau) * coeff)
        return expm(-1j * self.h_eff * tau) @ coeff

    def norm2(self, coeff, tau):
        if self.exact:
            c = np.exp(-1j * self.lam * tau) * coeff
            return float(np.real(np.vdot(c, self.gram @ c)))
        psi = self.state(coeff, tau)
        return float(np.real(np.vdot(psi, psi)))


def _single_trajectory(prop, jump_ops, psi0, t_grid, rng, n_max):
    nb = n_max + 1
    n_times = t_grid.size
    n_levels = np.tile(np.arange(nb, dtype=float), 3)
    n_out = np.empty(n_times)
    pops_out = np.empty((n_times, 3))
    fock_final = None
    tail = np.empty(n_times)

    t_last = t_grid[0]
    coeff = prop.coefficients(psi0)
    threshold = rng.random()
    jumps = 0
    for k, t in enumerate(t_grid):
        while prop.norm2(coeff, t - t_last) < threshold:
            lo, hi = 0.0 if k == 0 else max(t_grid[k - 1] - t_last, 0.0), t - t_last
            while hi - lo > BISECT_TOL:
                mid = 0.5 * (lo + hi)
                if prop.norm2(coeff, mid) < threshold:
                    hi = mid
                else:
                    lo = mid
            psi = prop.state(coeff, hi)
            candidates = [op @ psi for op in jump_ops]
            weights = np.array([np.real(np.vdot(c, c)) for c in candidates])
            choice = rng.choice(len(candidates), p=weights / weights.sum())
            psi = candidates[choice] / np.sqrt(weights[choice])
            t_last = t_last + hi
            coeff = prop.coefficients(psi)
            threshold = rng.random()
            jumps += 1
        psi = prop.state(coeff, t - t_last)
        psi = psi / np.linalg.norm(psi)
        prob = np.abs(psi) ** 2
        n_out[k] = prob @ n_levels
        by_level = prob.reshape(3, nb)
        pops_out[k] = by_level.sum(axis=1)
        fock = by_level.sum(axis=0)
        tail[k] = fock[-2] + fock[-1]
        fock_final = fock
    return n_out, pops_out, fock_final, tail, jumps


def _initial_state(psi0, rng, n_max):
    if isinstance(psi0, ThermalFock):
        from ..operators import thermal_populations

        p = thermal_populations(psi0.n_mean, n_max)
        n = int(rng.choice(n_max + 1, p=p))
        return QuantumState.basis(psi0.level, n, n_max).amplitudes
    amps = psi0.amplitudes if isinstance(psi0, QuantumState) else np.asarray(psi0, dtype=complex)
    if amps.shape != (3 * (n_max + 1),):
        raise ValueError("initial state does not match n_max")
    return amps / np.linalg.norm(amps)


def _worker_count(n_traj: int) -> int:
    cap = os.environ.get("EITCOOL_THREADS")
    n = int(cap) if cap else 1
    return max(1, min(n, n_traj))


def run_trajectories(
    params: LambdaParams,
    psi0,
    t_grid,
    n_traj: int,
    seed: int,
    n_max: int,
    ld_order=2,
    recoil_model: str = "lamb-dicke-2nd",
    tail_tol: float = TAIL_TOL,
    eta_emit: float | None = None,
    n_jobs: int | None = None,
) -> EnsembleResult:
    """Average ``n_traj`` quantum-jump trajectories on ``t_grid``.

    ``psi0`` is a :class:`QuantumState`, an amplitude vector, or a
    :class:`ThermalFock` recipe sampled per trajectory.  Results are
    bit-reproducible for fixed ``(seed, n_traj, t_grid)``: each trajectory
    has its own generator derived from ``(seed, index)`` and the ensemble
    sums are accumulated in index order.  ``n_jobs`` (default from
    ``EITCOOL_THREADS``) runs trajectories in worker processes.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    h = build_hamiltonian(params, n_max, ld_order)
    ops = build_jump_operators(params, n_max, recoil_model, eta_emit)
    prop = _Propagator(effective_hamiltonian(h, ops))

    def one(i):
        rng = trajectory_rng(seed, i)
        psi = _initial_state(psi0, rng, n_max)
        return _single_trajectory(prop, ops, psi, t_grid, rng, n_max)

    n_jobs = _worker_count(n_traj) if n_jobs is None else n_jobs
    if n_jobs > 1:
        from joblib import Parallel, delayed

        results = Parallel(n_jobs=n_jobs)(delayed(one)(i) for i in range(n_traj))
    else:
        results = [one(i) for i in range(n_traj)]

    n_times = t_grid.size
    s1 = np.zeros(n_times)
    s2 = np.zeros(n_times)
    pops = np.zeros((n_times, 3))
    fock = np.zeros(n_max + 1)
    tail = np.zeros(n_times)
    jumps = np.empty(n_traj, dtype=int)
    for i, (n_out, pops_out, fock_final, tail_out, n_jump) in enumerate(results):
        s1 += n_out
        s2 += n_out**2
        pops += pops_out
        fock += fock_final
        tail += tail_out
        jumps[i] = n_jump
    mean = s1 / n_traj
    if n_traj > 1:
        var = np.clip(s2 / n_traj - mean**2, 0.0, None) * n_traj / (n_traj - 1)
        stderr = np.sqrt(var / n_traj)
    else:
        stderr = np.full(n_times, np.nan)
    tail /= n_traj
    if np.any(tail > tail_tol):
        k = int(np.argmax(tail > tail_tol))
        raise TruncationError(
            f"top Fock levels hold {tail[k]:.3g} > {tail_tol:g} at t={t_grid[k]:g}; increase n_max"
        )
    fock /= n_traj
    return EnsembleResult(
        t_grid=t_grid,
        n_mean=mean,
        n_mean_stderr=stderr,
        pops_internal=pops / n_traj,
        final_pn=PopulationDistribution(fock / fock.sum()),
        n_traj=n_traj,
        seed=seed,
        n_jumps=jumps,
        tail_mass=tail,
    )

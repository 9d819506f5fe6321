import numpy as np
import pytest
from scipy.linalg import expm

from conftest import fig3_master, fig3_mc
from eitcool.model import LambdaParams, fig3_params
from eitcool.operators import E, G, position, sigma, thermal_populations
from eitcool.quantum_sim.operators import internal_projector
from eitcool.quantum_sim import (
    DensityOperator,
    MultiplicityError,
    QuantumState,
    ThermalFock,
    build_hamiltonian,
    build_jump_operators,
    completeness_residual,
    evolve_master,
    fit_cooling,
    run_trajectories,
    steady_state_master,
    trajectory_rng,
)
from eitcool.rate_model import TruncationError, cooling_rate, mean_n_closed_form, steady_state_mean_n
from eitcool.spectrum import bloch_liouvillian


class TestHamiltonian:
    def test_decoupled_limit_factorises(self):
        p = fig3_params(eta=0.0, delta_g=2.3)
        n_max = 6
        h = build_hamiltonian(p, n_max)
        from eitcool.operators import internal_hamiltonian

        h_int = internal_hamiltonian(p.omega_g, p.omega_r, p.delta_g, p.delta_r)
        n_op = np.diag(np.arange(n_max + 1.0))
        expected = np.kron(h_int, np.eye(n_max + 1)) + p.nu * np.kron(np.eye(3), n_op)
        assert np.allclose(h, expected, atol=1e-14)

    @pytest.mark.parametrize("order", [1, 2, "exact"])
    def test_hermitian(self, rng, order):
        for _ in range(5):
            p = LambdaParams(
                omega_g=rng.uniform(0, 1), omega_r=rng.uniform(0.1, 2), delta_g=rng.uniform(-3, 3),
                delta_r=rng.uniform(-3, 3), nu=rng.uniform(0.05, 0.5), eta=0.2, eta_g=0.15, eta_r=-0.05,
            )
            h = build_hamiltonian(p, 8, order)
            assert np.max(np.abs(h - h.conj().T)) <= 1e-12

    def test_first_order_error_is_quadratic(self):
        # compare on low Fock levels where truncation does not enter
        ratios = []
        for eta in (0.05, 0.1, 0.145):
            p = fig3_params(eta=eta)
            d = build_hamiltonian(p, 30, 1) - build_hamiltonian(p, 30, "exact")
            keep = np.concatenate([np.arange(6) + k * 31 for k in range(3)])
            ratios.append(np.max(np.abs(d[np.ix_(keep, keep)])) / eta**2)
        assert max(ratios) < 0.5 * p.omega_g * 10
        assert max(ratios) / min(ratios) < 1.2

    def test_invalid_orders(self, fig3):
        with pytest.raises(ValueError):
            build_hamiltonian(fig3, 5, 3)
        with pytest.raises(ValueError):
            build_hamiltonian(fig3, 1, 2)
        with pytest.raises(ValueError):
            build_hamiltonian(fig3, 0, 1)


class TestJumps:
    def test_no_recoil(self, fig3):
        ops = build_jump_operators(fig3, 5, "none")
        assert len(ops) == 2
        nb = 6
        for op in ops:
            blocks = op.reshape(3, nb, 3, nb)
            for i in range(3):
                for j in range(3):
                    b = blocks[i, :, j, :]
                    assert np.allclose(b, np.diag(np.diag(b)))
        assert completeness_residual(fig3, ops, 5) < 1e-14

    def test_second_order_residual_is_quartic_term(self, fig3):
        n_max = 15
        ops = build_jump_operators(fig3, n_max, "lamb-dicke-2nd")
        x = position(n_max)
        x4 = np.linalg.matrix_power(x, 4)
        expected = fig3.gamma * fig3.alpha * fig3.eta**4 / 4 * np.kron(sigma(E, E), x4)
        total = sum(op.conj().T @ op for op in ops) - fig3.gamma * internal_projector(E, n_max)
        assert np.max(np.abs(total - expected)) < 1e-14

    def test_residual_bound_on_low_fock_levels(self, fig3):
        ops = build_jump_operators(fig3, 15, "lamb-dicke-2nd")
        assert completeness_residual(fig3, ops, 15, n_levels=1) < 1e-3 * fig3.gamma

    def test_exact_recoil_is_complete(self, fig3):
        ops = build_jump_operators(fig3, 15, "exact")
        assert completeness_residual(fig3, ops, 15) < 1e-12

    def test_alpha_zero_branches_vanish(self, fig3):
        p = fig3.with_(alpha=1e-300)
        ops = build_jump_operators(p, 4, "lamb-dicke-2nd")
        kicks = [op for k, op in enumerate(ops) if k % 3]
        assert all(np.max(np.abs(op)) < 1e-149 for op in kicks)

    def test_unknown_model(self, fig3):
        with pytest.raises(ValueError):
            build_jump_operators(fig3, 4, "dipole")


class TestStates:
    def test_thermal_density(self):
        rho = DensityOperator.thermal(1.5, 30)
        rho.check()
        assert rho.mean_n() == pytest.approx(np.dot(np.arange(31), thermal_populations(1.5, 30)))
        assert np.allclose(rho.internal_populations(), [1, 0, 0])

    def test_check_rejects_bad_trace(self):
        with pytest.raises(ValueError):
            DensityOperator(2 * DensityOperator.thermal(1.0, 5).matrix, 5).check()

    def test_normalised_state(self):
        psi = QuantumState(np.arange(12, dtype=complex), 3).normalized()
        assert psi.norm == pytest.approx(1.0, abs=1e-12)


class TestMaster:
    def test_dark_initial_state_is_stationary(self):
        p = fig3_params(omega_g=0.0)
        rho0 = QuantumState.basis(G, 3, 8).density()
        res = evolve_master(p, rho0, np.linspace(0, 500, 11), 8)
        for st in res.states:
            assert np.max(np.abs(st.matrix - rho0.matrix)) < 1e-10

    def test_internal_dynamics_match_bloch_equations(self):
        p = fig3_params(eta=0.0, omega_g=0.3, delta_g=2.2)
        n_max = 4
        nb = n_max + 1
        rho0 = QuantumState.basis(G, 2, n_max).density()
        t = np.linspace(0, 60, 13)
        res = evolve_master(p, rho0, t, n_max, method="rk", rtol=1e-11, atol=1e-13)
        sup = bloch_liouvillian(p)
        r0 = np.zeros(9, dtype=complex)
        r0[0] = 1.0
        for k, tk in enumerate(t):
            internal = (expm(sup * tk) @ r0).reshape(3, 3)
            block = res.states[k].matrix.reshape(3, nb, 3, nb)[:, 2, :, 2]
            assert np.max(np.abs(block - internal)) < 1e-8
        assert np.allclose(res.n_mean, 2.0, atol=1e-12)

    def test_trace_and_validity(self, fig3):
        rho0 = DensityOperator.thermal(0.5, 15)
        res = evolve_master(fig3, rho0, np.linspace(0, 3000, 16), 15)
        assert np.max(np.abs(res.trace - 1)) < 1e-8
        for st in res.states:
            st.check()
        assert np.allclose(res.pops_internal.sum(axis=1), 1.0, atol=1e-8)

    def test_rational_matches_rk(self, fig3):
        rho0 = DensityOperator.thermal(0.3, 15)
        t = np.linspace(0, 1.2e4, 9)
        rk = evolve_master(fig3, rho0, t, 15, method="rk", store_states=False)
        rat = evolve_master(fig3, rho0, t, 15, method="rational", store_states=False)
        assert rat.method == "rational"
        assert np.max(np.abs(rat.n_mean - rk.n_mean) / rk.n_mean) < 1e-5

    def test_truncation_error(self, fig3):
        with pytest.raises(TruncationError):
            evolve_master(fig3, DensityOperator.thermal(2.0, 8), [0.0, 1.0], 8)

    def test_fig3_reference_run(self):
        res = fig3_master()
        assert abs(res.n_mean[-1] - 0.0108) <= 0.3 * 0.0108
        assert res.final_pn.p[0] >= 0.98
        assert np.max(np.abs(res.trace - 1)) < 1e-8

    def test_truncation_invariance(self, fig3):
        t = np.linspace(0, 3e4, 11)
        a = evolve_master(fig3, DensityOperator.thermal(0.2, 14), t, 14, store_states=False)
        b = evolve_master(fig3, DensityOperator.thermal(0.2, 24), t, 24, store_states=False)
        # the initial thermal states differ by the truncated tail (~1e-10)
        assert np.max(np.abs(a.n_mean - b.n_mean)) < 2e-8
        assert np.max(np.abs(a.final_pn.p - b.final_pn.p[:15])) < 2e-8


class TestSteadyStateMaster:
    def test_fig3(self, fig3):
        rho = steady_state_master(fig3, 15)
        rho.check()
        assert abs(rho.mean_n() - 0.0108) <= 0.3 * 0.0108
        assert rho.fock_populations()[0] >= 0.98

    def test_decoupled_motion_is_degenerate(self, fig3):
        with pytest.raises(MultiplicityError):
            steady_state_master(fig3.with_(eta=0.0), 6)

    def test_agrees_with_long_time_evolution(self, fig3):
        rho = steady_state_master(fig3, 10)
        t = np.linspace(0, 2.4e5, 5)
        res = evolve_master(fig3, DensityOperator.thermal(0.02, 10), t, 10, store_states=True)
        assert np.max(np.abs(res.states[-1].matrix - rho.matrix)) < 1e-6


class TestTrajectories:
    def test_dark_state_never_jumps(self):
        p = fig3_params(omega_g=0.0)
        res = run_trajectories(p, QuantumState.basis(G, 0, 5), np.linspace(0, 1000, 11), 1, 1, 5)
        assert res.n_jumps.tolist() == [0]
        assert np.all(res.n_mean == 0.0)
        assert np.all(np.isnan(res.n_mean_stderr))

    def test_bit_identical(self, fig3):
        t = np.linspace(0, 2000, 21)
        a = run_trajectories(fig3, ThermalFock(0.5), t, 20, 99, 12)
        b = run_trajectories(fig3, ThermalFock(0.5), t, 20, 99, 12)
        assert a.n_mean.tobytes() == b.n_mean.tobytes()
        assert a.n_mean_stderr.tobytes() == b.n_mean_stderr.tobytes()
        assert a.pops_internal.tobytes() == b.pops_internal.tobytes()
        assert a.final_pn.p.tobytes() == b.final_pn.p.tobytes()

    def test_parallel_matches_serial(self, fig3):
        t = np.linspace(0, 2000, 21)
        a = run_trajectories(fig3, ThermalFock(0.5), t, 8, 5, 12, n_jobs=1)
        b = run_trajectories(fig3, ThermalFock(0.5), t, 8, 5, 12, n_jobs=2)
        assert a.n_mean.tobytes() == b.n_mean.tobytes()
        assert np.array_equal(a.n_jumps, b.n_jumps)

    def test_seeding_depends_on_index_only(self):
        assert trajectory_rng(3, 7).random() == trajectory_rng(3, 7).random()
        assert trajectory_rng(3, 7).random() != trajectory_rng(3, 8).random()

    def test_populations_normalised(self):
        res = fig3_mc()
        assert np.allclose(res.pops_internal.sum(axis=1), 1.0, atol=1e-8)
        assert np.all(res.n_mean >= 0)

    @pytest.mark.parametrize(
        "n_traj",
        [
            pytest.param(
                200,
                marks=pytest.mark.xfail(
                    strict=True,
                    reason="rare-event regime: with <n> ~ 0.01 only one or two of 200 trajectories are "
                    "excited late in the run, so the sample stderr underestimates the spread",
                ),
            ),
            500,
            1000,
        ],
    )
    def test_agrees_with_master_equation(self, n_traj):
        me = fig3_master()
        mc = fig3_mc(n_traj)
        z = np.abs(mc.n_mean - me.n_mean) / mc.n_mean_stderr
        assert np.max(z) < 3.0

    def test_stderr_scaling(self):
        s = {n: fig3_mc(n).n_mean_stderr.mean() for n in (200, 500, 1000)}
        for n in (500, 1000):
            assert s[200] / s[n] == pytest.approx(np.sqrt(n / 200), rel=0.2)

    def test_truncation_error(self, fig3):
        with pytest.raises(TruncationError):
            run_trajectories(fig3, ThermalFock(3.0), [0.0, 1.0], 30, 1, 6)


class TestFit:
    def test_recovers_synthetic(self, fig3):
        t = np.linspace(0, 1.5e5, 101)
        y = mean_n_closed_form(fig3, 2.0, t)
        fit = fit_cooling(t, y)
        assert fit.converged
        assert fit.w_fit == pytest.approx(cooling_rate(fig3), rel=1e-8)
        assert fit.n_s_fit == pytest.approx(steady_state_mean_n(fig3), rel=1e-8)
        assert fit.n0_fit == pytest.approx(2.0, rel=1e-8)

    def test_constant_data(self):
        fit = fit_cooling(np.linspace(0, 10, 6), np.full(6, 0.3))
        assert fit.w_fit == 0.0 and fit.n_s_fit == 0.3 and fit.n0_fit == 0.3

    def test_short_span_is_flagged(self, fig3):
        t = np.linspace(0, 0.5 / cooling_rate(fig3), 20)
        assert not fit_cooling(t, mean_n_closed_form(fig3, 2.0, t)).converged

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            fit_cooling([0, 1, 2], [3, 2, 1])

    def test_fig3_master_fit(self, fig3):
        res = fig3_master()
        fit = fit_cooling(res.t_grid, res.n_mean)
        assert fit.w_fit == pytest.approx(cooling_rate(fig3), rel=0.3)
        assert fit.n_s_fit == pytest.approx(steady_state_mean_n(fig3), rel=0.3)

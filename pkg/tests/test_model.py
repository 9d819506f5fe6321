import math

import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.constants import atomic_mass, pi

from eitcool.model import (
    LambdaParams,
    ParameterError,
    ac_stark_shift,
    dressed_states,
    fig3_params,
    lamb_dicke,
    optimal_detuning,
    optimal_rabi,
    validate,
)


def test_defaults_split_gamma_and_eta():
    p = LambdaParams()
    assert p.gamma_g == p.gamma_r == 0.5
    assert p.eta_g == p.eta and p.eta_r == 0.0
    assert p.alpha == 0.4


def test_with_resplits_derived_fields():
    p = LambdaParams().with_(gamma=2.0, eta=0.2)
    assert p.gamma_g == p.gamma_r == 1.0
    assert p.eta_g == 0.2


@pytest.mark.parametrize(
    "field,value",
    [("gamma", 0.0), ("nu", -1.0), ("omega_g", -0.1), ("eta", -0.1), ("alpha", 0.0), ("alpha", 1.5)],
)
def test_invariant_violations_name_field(field, value):
    with pytest.raises(ParameterError) as err:
        LambdaParams(**{field: value})
    assert err.value.field == field


def test_branching_must_sum_to_gamma():
    with pytest.raises(ParameterError) as err:
        LambdaParams(gamma_g=0.3, gamma_r=0.3)
    assert err.value.field in ("gamma_g", "gamma_r")


def test_beam_lamb_dicke_must_match_eta():
    LambdaParams(eta=0.1, eta_g=0.06, eta_r=-0.04)
    with pytest.raises(ParameterError):
        LambdaParams(eta=0.1, eta_g=0.06, eta_r=0.0)


def test_json_roundtrip(tmp_path):
    p = fig3_params(alpha=0.3)
    p.save(tmp_path / "p.json")
    assert LambdaParams.load(tmp_path / "p.json") == p


def test_from_dict_rejects_unknown():
    with pytest.raises(ParameterError):
        LambdaParams.from_dict({"omega_x": 1.0})


class TestValidate:
    def test_fig3_point_is_clean(self, fig3):
        assert validate(fig3) == []

    def test_strong_cooling_laser(self, fig3):
        w = validate(fig3.with_(omega_g=1.0))
        assert any("cooling laser not weak relative to coupling laser" in s for s in w)

    def test_gamma_zero_is_error(self):
        with pytest.raises(ParameterError) as err:
            validate(LambdaParams(gamma=0.0))
        assert err.value.field == "gamma"

    def test_outside_lamb_dicke(self, fig3):
        assert any("Lamb-Dicke" in s for s in validate(fig3, initial_n_mean=10.0))

    def test_saturation(self, fig3):
        assert any("saturated" in s for s in validate(fig3.with_(omega_g=0.15)))

    def test_does_not_mutate(self, fig3):
        before = fig3.to_dict()
        validate(fig3.with_(omega_g=2.0))
        assert fig3.to_dict() == before


class TestStarkShift:
    def test_resonant(self):
        assert ac_stark_shift(0.0, 1.0) == pytest.approx(0.5, abs=1e-15)

    def test_fig3_value(self):
        assert ac_stark_shift(2.5, 1.0) == pytest.approx((math.sqrt(7.25) - 2.5) / 2, rel=1e-14)
        assert ac_stark_shift(2.5, 1.0) == pytest.approx(0.0963, abs=5e-5)

    def test_no_coupling(self):
        assert ac_stark_shift(-3.7, 0.0) == 0.0

    def test_large_detuning_is_accurate(self):
        # leading order omega^2 / (4 |delta|)
        assert ac_stark_shift(1e8, 1.0) == pytest.approx(0.25e-8, rel=1e-12)

    @given(st.floats(-50, 50), st.floats(0.01, 20), st.floats(0.01, 20))
    def test_monotone(self, d, w1, w2):
        lo, hi = sorted((w1, w2))
        assert ac_stark_shift(d, lo) <= ac_stark_shift(d, hi) + 1e-15
        assert ac_stark_shift(d, lo) >= 0

    @given(st.floats(0, 50), st.floats(0, 50), st.floats(0.01, 20))
    def test_decreasing_in_detuning(self, d1, d2, w):
        lo, hi = sorted((d1, d2))
        assert ac_stark_shift(-hi, w) <= ac_stark_shift(lo, w) + 1e-15


class TestDressedStates:
    def test_approximation_at_light_shift_equals_nu(self):
        info = dressed_states(fig3_params(delta_g=2.4, delta_r=2.4))
        assert info.delta_shift == pytest.approx(0.1, rel=1e-12)
        assert info.approx_narrow_width == pytest.approx(0.1 / 2.4)
        assert abs(info.approx_narrow_width - info.narrow_width) <= 0.15 * info.narrow_width

    def test_positions(self, fig3):
        info = dressed_states(fig3)
        d = ac_stark_shift(2.5, 1.0)
        assert info.narrow_position == pytest.approx(2.5 + d)
        assert info.broad_position == pytest.approx(-d)

    def test_symmetric_splitting(self):
        info = dressed_states(LambdaParams(delta_g=0.0, delta_r=0.0, omega_r=2.0))
        assert info.narrow_width == pytest.approx(0.5, abs=1e-12)
        assert info.broad_width == pytest.approx(0.5, abs=1e-12)

    def test_requires_coupling(self):
        with pytest.raises(ParameterError):
            dressed_states(LambdaParams(omega_r=0.0))

    @given(st.floats(-20, 20), st.floats(0.01, 10), st.floats(0.1, 5))
    def test_widths_sum_to_gamma(self, d, w, g):
        info = dressed_states(LambdaParams(delta_g=d, delta_r=d, omega_r=w, gamma=g))
        assert info.narrow_width + info.broad_width == pytest.approx(g, abs=1e-9)
        assert info.narrow_width <= info.broad_width
        assert info.delta_shift >= 0


class TestOptima:
    def test_optimal_detuning_fig3(self):
        assert optimal_detuning(1.0, 0.1) == pytest.approx(2.4, rel=1e-14)

    def test_optimal_detuning_pole(self):
        with pytest.raises(ValueError):
            optimal_detuning(0.2, 0.1)

    def test_optimal_rabi(self):
        r = optimal_rabi(2.4, 0.1)
        assert r.omega_r == pytest.approx(1.0, rel=1e-14) and not r.at_pole
        r0 = optimal_rabi(0.0, 0.1)
        assert r0.omega_r == pytest.approx(0.2) and r0.at_pole

    @given(st.floats(0.01, 1.0), st.floats(2.05, 40.0))
    def test_roundtrips(self, nu, ratio):
        omega = ratio * nu
        d = optimal_detuning(omega, nu)
        assert ac_stark_shift(d, omega) == pytest.approx(nu, rel=1e-9)
        assert optimal_rabi(d, nu).omega_r == pytest.approx(omega, rel=1e-9)


class TestLambDicke:
    mass = 40 * atomic_mass
    nu = 2 * pi * 1e6

    def test_counter_propagating(self):
        a0 = math.sqrt(1.054571817e-34 / (2 * self.mass * self.nu))
        k = 0.145 / (2 * a0)
        res = lamb_dicke([k, 0, 0], [-k, 0, 0], self.mass, self.nu, [1, 0, 0])
        assert res.eta == pytest.approx(0.145, rel=1e-6)
        assert res.eta_g == pytest.approx(0.0725, rel=1e-6)
        assert res.eta_r == pytest.approx(-0.0725, rel=1e-6)

    def test_copropagating(self):
        assert lamb_dicke([1e7, 0, 0], [1e7, 0, 0], self.mass, self.nu, [1, 0, 0]).eta == 0.0

    def test_orthogonal(self):
        assert lamb_dicke([0, 1e7, 0], [0, 0, -1e7], self.mass, self.nu, [1, 0, 0]).eta == 0.0

    def test_zero_axis(self):
        with pytest.raises(ValueError):
            lamb_dicke([1, 0, 0], [0, 1, 0], self.mass, self.nu, [0, 0, 0])

import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfcnopa import (
    AnalysisPoint,
    NopaParams,
    SingularSystem,
    ThresholdReached,
    coupling_from_beta,
    langevin_oracle,
    nopa_only_variances,
    stand_alone_threshold,
    transfer_coefficients,
)
from cfcnopa.model import COMBINATIONS
from cfcnopa.nopa import cavity_response, drift_matrix, transfer_at_omega, transfer_deviation


def below_threshold():
    """Valid NOPA parameters with beta below the stand-alone threshold."""

    def build(g1, g2, n, frac, tau, norm):
        params = NopaParams(gamma1=g1, gamma2=g2, tau=tau, n_modes=n, beta=0.0, pump_normalization=norm)
        return replace(params, beta=frac * stand_alone_threshold(params))

    return st.builds(
        build,
        st.floats(0.01, 0.3),
        st.floats(0.0, 0.05, allow_subnormal=False),
        st.integers(2, 6),
        st.floats(0.0, 0.95),
        st.floats(1e-10, 1e-8),
        st.sampled_from(["pair", "collective"]),
    )


frequencies = st.floats(0.0, 50e6).map(AnalysisPoint)


def rel_close(a, b, tol):
    return abs(a - b) <= tol * max(abs(a), abs(b), 1e-300)


class TestCoupling:
    def test_no_pump(self):
        assert coupling_from_beta(NopaParams(beta=0.0)) == 0.0

    def test_collective_normalization_puts_threshold_at_beta_one(self):
        params = NopaParams(beta=0.5, pump_normalization="collective")
        chi = coupling_from_beta(params) / params.beta
        assert chi == pytest.approx(0.103 / 3, rel=1e-15)
        # m3 denominator at DC: -(N-1) k + g1 + g2, zero at beta = 1
        assert -(params.n_modes - 1) * chi + 0.103 == pytest.approx(0.0, abs=1e-15)
        assert stand_alone_threshold(params) == 1.0

    def test_collective_fig2_value(self):
        params = NopaParams(beta=0.15, pump_normalization="collective")
        assert coupling_from_beta(params) == pytest.approx(0.005150, rel=1e-12)

    def test_pair_normalization(self, fig2_nopa):
        assert coupling_from_beta(fig2_nopa) == pytest.approx(0.15 * 0.103, rel=1e-15)
        assert stand_alone_threshold(fig2_nopa) == pytest.approx(1 / 3)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"gamma1": 0.0},
        {"gamma1": 0.6, "gamma2": 0.4},
        {"gamma2": -0.1},
        {"tau": 0.0},
        {"n_modes": 1},
        {"n_modes": 2.5},
        {"beta": 1.0},
        {"beta": -0.01},
        {"pump_normalization": "bogus"},
    ],
)
def test_invalid_params(kwargs):
    with pytest.raises(ValueError):
        NopaParams(**kwargs)


def test_analysis_point():
    at = AnalysisPoint(1e6)
    assert at.omega == 2 * math.pi * 1e6
    with pytest.raises(ValueError):
        AnalysisPoint(-1.0)


class TestTransferCoefficients:
    def test_empty_lossless_cavity_is_identity_at_dc(self):
        ts = transfer_coefficients(NopaParams(gamma2=0.0, beta=0.0), AnalysisPoint(0.0))
        for m, n in map(ts.pair, COMBINATIONS):
            assert m == pytest.approx(1.0, abs=1e-15)
            assert n == 0.0

    def test_passive_cavity_values(self):
        ts = transfer_coefficients(NopaParams(beta=0.0), AnalysisPoint(0.0))
        assert ts.m1 == pytest.approx(0.097 / 0.103, rel=1e-14)
        assert ts.n1 == pytest.approx(2 * math.sqrt(0.1 * 0.003) / 0.103, rel=1e-14)
        assert abs(ts.m1) ** 2 + abs(ts.n1) ** 2 == pytest.approx(1.0, abs=1e-15)

    def test_matches_printed_formulas(self, fig2_nopa, fig2_at):
        # literal transcription with n = N
        k, g1, g2, n = coupling_from_beta(fig2_nopa), 0.1, 0.003, 4
        x = 1j * fig2_at.omega * 6.7e-10
        q = 2 * math.sqrt(g1 * g2)
        expected = [
            (-k + g1 - g2 - x) / (k + g1 + g2 + x),
            q / (k + g1 + g2 + x),
            (-(n - 1) * k + g1 - g2 - x) / ((n - 1) * k + g1 + g2 + x),
            q / ((n - 1) * k + g1 + g2 + x),
            ((n - 1) * k + g1 - g2 - x) / (-(n - 1) * k + g1 + g2 + x),
            q / (-(n - 1) * k + g1 + g2 + x),
            (k + g1 - g2 - x) / (-k + g1 + g2 + x),
            q / (-k + g1 + g2 + x),
        ]
        np.testing.assert_allclose(transfer_coefficients(fig2_nopa, fig2_at).as_array(), expected, rtol=1e-14)

    def test_fig2_matches_oracle(self, fig2_nopa, fig2_at):
        np.testing.assert_allclose(
            transfer_coefficients(fig2_nopa, fig2_at).as_array(),
            langevin_oracle(fig2_nopa, fig2_at).as_array(),
            rtol=1e-12,
        )

    def test_threshold_pole(self):
        params = NopaParams(n_modes=2, beta=0.5)
        # pair normalization, N=2: threshold is beta = 1, so sit exactly on the pole by hand
        params = replace(params, pump_normalization="pair")
        object.__setattr__(params, "beta", 1.0)
        with pytest.raises(ThresholdReached):
            transfer_coefficients(params, AnalysisPoint(0.0))
        # off DC the pole is regularized by i w tau
        transfer_coefficients(params, AnalysisPoint(1e6))


class TestLangevinOracle:
    def test_passive_all_pass(self):
        params = NopaParams(beta=0.0)
        for f in (0.0, 1e6, 3e7):
            ts = langevin_oracle(params, AnalysisPoint(f))
            np.testing.assert_allclose(ts.gains(), 1.0, atol=1e-13)

    def test_two_mode_reduction(self):
        params = NopaParams(n_modes=2, beta=0.4)
        ts = langevin_oracle(params, AnalysisPoint(2e6))
        assert ts.m2 == pytest.approx(ts.m1, rel=1e-13)
        assert ts.n2 == pytest.approx(ts.n1, rel=1e-13)
        assert ts.m4 == pytest.approx(ts.m3, rel=1e-13)
        assert ts.n4 == pytest.approx(ts.n3, rel=1e-13)

    def test_drift_structure(self, fig2_nopa):
        a = drift_matrix(fig2_nopa)
        assert a.shape == (8, 8)
        np.testing.assert_allclose(a, a.T)
        # amplitude block couples +k, phase block -k
        k = coupling_from_beta(fig2_nopa)
        assert a[0, 1] == pytest.approx(k)
        assert a[4, 5] == pytest.approx(-k)

    def test_singular_at_threshold(self):
        params = NopaParams(n_modes=2, beta=0.5)
        object.__setattr__(params, "beta", 1.0)
        with pytest.raises(SingularSystem):
            cavity_response(params, AnalysisPoint(0.0))

    @settings(max_examples=300, deadline=None)
    @given(below_threshold(), frequencies)
    def test_equivalence(self, params, at):
        assert transfer_deviation(transfer_coefficients(params, at), langevin_oracle(params, at)) < 1e-10


class TestNopaOnlyVariances:
    def test_vacuum_when_unpumped(self):
        report = nopa_only_variances(NopaParams(beta=0.0), AnalysisPoint(1e6))
        assert (report.v_xdiff, report.v_ysum, report.v_xsum, report.v_ydiff) == pytest.approx((2, 4, 4, 2), abs=1e-12)
        assert report.combined_squeezed == pytest.approx(6.0, abs=1e-12)

    def test_fig2_bare_level(self, fig2_nopa, fig2_at):
        report = nopa_only_variances(fig2_nopa, fig2_at)
        assert report.combined_squeezed < 6.0
        ts = transfer_coefficients(fig2_nopa, fig2_at)
        g = ts.gains()
        assert report.combined_squeezed == pytest.approx(2 * g[0] + 4 * g[1], rel=1e-15)
        assert report.stable
        # squeezing/anti-squeezing uncertainty for the difference pair
        assert (report.v_xdiff / 2) * (report.v_ydiff / 2) >= 1.0

    def test_above_collective_threshold(self, fig2_nopa, fig2_at):
        params = replace(fig2_nopa, beta=0.5)
        report = nopa_only_variances(params, fig2_at)
        assert report.unstable == ("amplitude_sum",)
        assert math.isinf(report.v_xsum)
        assert math.isfinite(report.combined_squeezed)
        with pytest.raises(ThresholdReached):
            nopa_only_variances(params, fig2_at, strict=True)

    @settings(max_examples=200, deadline=None)
    @given(
        st.floats(0.01, 0.3), st.floats(0.0, 0.05), st.integers(2, 6), st.floats(0.0, 50e6)
    )
    def test_vacuum_preservation(self, g1, g2, n, f):
        report = nopa_only_variances(NopaParams(gamma1=g1, gamma2=g2, n_modes=n, beta=0.0), AnalysisPoint(f))
        values = (report.v_xdiff, report.v_ysum, report.v_xsum, report.v_ydiff)
        assert values == pytest.approx((2, n, n, 2), abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(below_threshold(), frequencies)
def test_uncertainty_products(params, at):
    g = transfer_coefficients(params, at).gains()
    assert g[0] * g[3] >= 1 - 1e-12
    assert g[1] * g[2] >= 1 - 1e-12


@settings(max_examples=200, deadline=None)
@given(below_threshold(), st.floats(0.0, 1e9))
def test_frequency_symmetry(params, omega):
    plus = transfer_at_omega(params, omega).as_array()
    minus = transfer_at_omega(params, -omega).as_array()
    np.testing.assert_allclose(minus, np.conj(plus), rtol=1e-14, atol=1e-300)
    np.testing.assert_allclose(np.abs(minus), np.abs(plus), rtol=1e-14)


@pytest.mark.parametrize("norm", ["pair", "collective"])
def test_squeezing_monotone_in_beta(norm):
    dc = AnalysisPoint(0.0)
    betas = np.linspace(0.0, 0.999, 400)
    values = [nopa_only_variances(NopaParams(beta=b, pump_normalization=norm), dc).v_xdiff for b in betas]
    assert np.all(np.diff(values) < 0)

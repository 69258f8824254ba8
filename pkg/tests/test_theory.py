import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import ndtr

from stereomc import theory
from stereomc.errors import DegenerateCase, DomainError

C10 = 1.7520697819179629  # tabulated constant for nu = 10


class TestLatitudeApprox:
    def test_stationary_noiseless(self):
        assert theory.latitude_approx("stationary", 0.3, 0.05, 100, 0.0) == pytest.approx(
            0.3 / np.sqrt(1 + 0.05**2 * 99)
        )

    def test_general_h_shrinks_with_dimension(self):
        # fixed z, u, h: output magnitude scales like d^{-1/2}
        vals = [abs(theory.latitude_approx("general_h", 0.5, 0.3, d, 1.0)) for d in (100, 400, 1600)]
        assert vals[0] > vals[1] > vals[2]
        assert vals[0] / vals[1] == pytest.approx(2.0, rel=0.15)
        assert vals[1] / vals[2] == pytest.approx(2.0, rel=0.15)

    def test_domain(self):
        with pytest.raises(DomainError):
            theory.latitude_approx("stationary", 1.0, 0.1, 10, 0.0)
        with pytest.raises(DomainError):
            theory.latitude_approx("nope", 0.0, 0.1, 10, 0.0)

    def test_general_vs_coordinate_agreement(self):
        # at h = O(1/d) the two formulas differ at order h^2 = d*h^3, so the
        # bound is 10*d*h^3 (a plain 10*h^3 is below the exact gap
        # z(u^2-1)h^2/2 for typical draws)
        d = 10_000
        h = 1.0 / d
        rng = np.random.default_rng(0)
        for _ in range(200):
            z = rng.uniform(-0.95, 0.95)
            u = rng.standard_normal()
            a = theory.latitude_approx("general_h", z, h, d, u)
            b = theory.latitude_approx("coordinate", z, h, d, u)
            assert abs(a - b) <= 10.0 * d * h**3

    def test_transient_is_coordinate_without_noise_term(self):
        z, h, d, u = 0.98, 0.05, 100, 0.7
        coord = theory.latitude_approx("coordinate", z, h, d, u)
        trans = theory.latitude_approx("transient", z, h, d, u)
        # they differ only by the sqrt(1-z^2) h u term
        gap = np.sqrt(1 - z * z) * h * u / np.sqrt(1 + h * h * (d - 1))
        assert coord - trans == pytest.approx(gap, abs=1e-12)


class TestCltMeanVar:
    def test_lambda_one_reduction(self):
        mu, s2 = theory.clt_mean_var(1.3, 1.0, 2.2)
        assert mu == pytest.approx(0.5 * 1.3**2 * (1 - 2.2))
        assert s2 == pytest.approx(1.3**2 * (2.2 - 1))

    @settings(max_examples=100, deadline=None)
    @given(
        st.floats(min_value=0.05, max_value=5.0),
        st.floats(min_value=0.1, max_value=10.0),
        st.floats(min_value=1.0, max_value=8.0),
    )
    def test_stationarity_identity(self, ell, lam, rough):
        try:
            mu, s2 = theory.clt_mean_var(ell, lam, rough)
        except DegenerateCase:
            return
        assert mu + s2 / 2 == pytest.approx(0.0, abs=1e-12)

    def test_degenerate_case(self):
        with pytest.raises(DegenerateCase):
            theory.clt_mean_var(1.0, 1.0, 1.0)


class TestExpectedAccept:
    def test_sigma_zero(self):
        assert theory.expected_accept(0.0, 0.0) == 1.0
        assert theory.expected_accept(-1.0, 0.0) == pytest.approx(np.exp(-1.0))
        assert theory.expected_accept(3.0, 0.0) == 1.0

    def test_stationary_form(self):
        for sigma in np.linspace(0.01, 10, 40):
            got = theory.expected_accept(-sigma**2 / 2, sigma)
            assert got == pytest.approx(2 * ndtr(-sigma / 2), abs=1e-12)

    def test_optimal_acceptance_constant(self):
        # at the tuned step the stationary acceptance is ~0.234 for every roughness
        sigma = theory.ELL_CONSTANT
        assert theory.expected_accept(-sigma**2 / 2, sigma) == pytest.approx(0.234, abs=0.01)

    def test_monte_carlo_grid(self):
        gen = np.random.default_rng(77)
        z = gen.standard_normal(2_000_000)
        for mu in (-2.0, -0.5, 0.0, 0.7, 2.5):
            for sigma in (0.05, 0.4, 1.0, 2.2, 4.0):
                w = np.minimum(1.0, np.exp(np.minimum(mu + sigma * z, 0.0)))
                se = w.std() / np.sqrt(len(w))
                assert theory.expected_accept(mu, sigma) == pytest.approx(w.mean(), abs=3.5 * se + 1e-9)


class TestEsjdLimit:
    def test_zero_at_zero(self):
        assert theory.esjd_limit(0.0, 2.0) == 0.0

    def test_excludes_gaussian_product(self):
        with pytest.raises(DomainError):
            theory.esjd_limit(1.0, 1.0)

    def test_numeric_max_close_to_reference_constant(self):
        E = C10
        ell_star = theory.argmax_esjd(E)
        peak = theory.esjd_limit(ell_star, E)
        assert peak == pytest.approx(1.3 / (E - 1.0), rel=0.02)

    def test_gain_over_euclidean_walk(self):
        # peak ESJD relative to the Euclidean walk's 1.3/E is E/(E-1)
        for E in (1.3, C10, 3.0):
            peak = theory.esjd_limit(theory.argmax_esjd(E), E)
            euclid_peak = 1.3252 / E  # same functional with roughness alone
            assert peak / euclid_peak == pytest.approx(E / (E - 1.0), rel=0.01)

    def test_diffusion_speed_identity(self):
        for ell in (0.3, 1.7, 4.2):
            for E in (1.2, 2.5):
                assert theory.diffusion_speed(ell, E) == theory.esjd_limit(ell, E)


class TestReparameterization:
    @settings(max_examples=80, deadline=None)
    @given(st.floats(min_value=0.05, max_value=6.0), st.integers(min_value=20, max_value=5000))
    def test_round_trip(self, ell, d):
        if ell * ell >= 2 * d:
            return
        h = theory.h_from_ell(ell, d)
        assert theory.ell_from_h(h, d) == pytest.approx(ell, abs=1e-10)

    def test_h_scales_like_ell_over_d(self):
        # h*d -> ell as d grows; the relative gap decays like ell^2/d
        gaps = []
        for d in (100, 1000, 10_000):
            h = theory.h_from_ell(2.38, d)
            gaps.append(abs(h * d / 2.38 - 1.0))
        assert gaps[0] <= 0.03 and gaps[1] <= 0.01 and gaps[2] <= 0.001
        assert gaps[0] > gaps[1] > gaps[2]

    def test_hand_evaluated(self):
        d, ell = 100, 2.38
        want = np.sqrt((1 - ell**2 / (2 * d)) ** -2 - 1) / np.sqrt(d - 1)
        assert theory.h_from_ell(ell, d) == pytest.approx(want, abs=1e-15)

    def test_domain(self):
        with pytest.raises(DomainError):
            theory.h_from_ell(np.sqrt(2 * 100) + 0.1, 100)


class TestOptimalTuning:
    def test_reference_ell(self):
        rep = theory.optimal_tuning(C10, 100)
        assert rep.ell == pytest.approx(2.744, abs=1e-3)

    def test_h_approximation_chain(self):
        # h ~ ell/sqrt(d(d-1)): within 3% at d=100 and 1% from d ~ 400 up
        rep = theory.optimal_tuning(C10, 100)
        assert rep.h == pytest.approx(rep.ell / np.sqrt(100 * 99), rel=0.03)
        for d in (400, 2000):
            rep = theory.optimal_tuning(C10, d)
            assert rep.h == pytest.approx(rep.ell / np.sqrt(d * (d - 1)), rel=0.01)

    def test_acceptance_universal(self):
        for E in (1.05, 1.4, C10, 4.0, 8.0):
            rep = theory.optimal_tuning(E, 500)
            assert rep.predicted_acceptance == pytest.approx(0.234, abs=0.003)

    def test_numeric_argmax_matches_independent_grid_search(self):
        for E in (1.1, 1.75, 3.0, 7.0):
            d = 1000
            rep = theory.optimal_tuning(E, d)
            grid = np.linspace(1e-3, np.sqrt(2 * d) * 0.999, 400_001)
            vals = 2 * grid**2 * ndtr(-0.5 * grid * np.sqrt(E - 1))
            brute = grid[np.argmax(vals)]
            assert abs(rep.ell_numeric - brute) <= 1e-3

    def test_rejects_gaussian_roughness(self):
        with pytest.raises(DomainError):
            theory.optimal_tuning(1.0, 100)

    def test_speed_equals_esjd_prediction(self):
        rep = theory.optimal_tuning(2.0, 300)
        assert rep.diffusion_speed == rep.predicted_esjd

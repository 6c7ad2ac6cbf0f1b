import math

import numpy as np
import pytest

from psagen.bath import OmegaProvider
from psagen.dipole import DipoleModel, build_dipole, dipole_rates
from psagen.errors import ValidationError
from psagen import positivity
from psagen.positivity import (
    critical_times,
    dipole_det,
    dipole_gamma_eigenvalues,
    exact_threshold,
    exact_threshold_dipole,
    lambda_min,
    rate_matrix,
    simple_threshold_bound,
    sufficient_sinc_bound,
    sufficient_sinc_bound_dipole,
    verify_dilution,
)


def fig_model(**kw):
    base = dict(q=+1, omega0=1.0, beta=2.0, kappa0=2.0, omega_c=5.0)
    base.update(kw)
    return DipoleModel.qubit(**base)


def synthetic_provider(rng, n_gaps=3, m=1, spread=2.0):
    """Random Omega set whose Hermitian parts are PSD by construction."""
    gaps = np.sort(rng.uniform(-spread, spread, size=n_gaps))
    while np.min(np.diff(gaps)) < 0.1:
        gaps = np.sort(rng.uniform(-spread, spread, size=n_gaps))
    entries = {}
    for w in gaps:
        r = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
        c = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
        entries[float(w)] = r @ r.conj().T / 2.0 + 0.5j * (c + c.conj().T)
    return OmegaProvider(entries=entries)


class TestLambdaMin:
    def test_secular_dipole_is_diagonal_min(self):
        build = build_dipole(fig_model(delta_t=math.inf))
        r = build.rates
        assert lambda_min(build.generator.gamma) == pytest.approx(
            min(r.gamma_mm, r.gamma_pp), rel=1e-12)
        assert lambda_min(build.generator.gamma) >= 0.0

    def test_zero_at_exact_threshold(self):
        model = fig_model()
        thr = exact_threshold_dipole(model)
        gamma = build_dipole(fig_model(sinc_value=thr)).generator.gamma
        scale = np.linalg.norm(gamma, 2)
        assert abs(lambda_min(gamma)) < 1e-10 * scale
        # determinant root cross-check
        assert dipole_det(dipole_rates(fig_model(sinc_value=thr))) == pytest.approx(
            0.0, abs=1e-12)

    def test_redfield_regime_goes_negative(self):
        gamma = build_dipole(fig_model(sinc_value=1.0)).generator.gamma
        assert lambda_min(gamma) < 0.0

    def test_non_hermitian_rejected(self):
        with pytest.raises(ValidationError):
            lambda_min(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_closed_form_eigenvalues_match(self):
        rates = dipole_rates(fig_model(sinc_value=0.5))
        gamma = build_dipole(fig_model(sinc_value=0.5)).generator.gamma
        lo, hi = dipole_gamma_eigenvalues(rates)
        vals = np.linalg.eigvalsh(gamma)
        assert vals[0] == pytest.approx(lo, rel=1e-12)
        assert vals[1] == pytest.approx(hi, rel=1e-12)
        assert hi >= 0.0  # the upper eigenvalue never goes negative


class TestExactThreshold:
    def test_reference_parameters(self):
        assert exact_threshold_dipole(fig_model()) == pytest.approx(0.628, abs=0.005)

    def test_zero_temperature_forces_full_secular(self):
        assert exact_threshold_dipole(fig_model(beta=math.inf)) == 0.0

    def test_dropping_pv_term_gives_simple_bound(self):
        model = fig_model()
        bath = model.bath()
        n = bath.occupation(1.0)
        kappa = float(bath.kappa(1.0))
        assert exact_threshold(kappa, n, +1, 0.0) == pytest.approx(
            simple_threshold_bound(n, +1), rel=1e-12)

    def test_kappa0_independence(self):
        assert exact_threshold_dipole(fig_model(kappa0=0.1)) == pytest.approx(
            exact_threshold_dipole(fig_model(kappa0=2.0)), rel=1e-9)

    @pytest.mark.parametrize("q", [+1, -1])
    def test_below_simple_bound_on_temperature_grid(self, q):
        for kt in np.linspace(0.05, 10.0, 25):
            model = fig_model(q=q, beta=1.0 / kt, omega_c=10.0)
            n = model.bath().occupation(1.0)
            assert exact_threshold_dipole(model) <= simple_threshold_bound(n, q) + 1e-10


class TestSufficientBound:
    @pytest.mark.parametrize("q", [+1, -1])
    def test_never_exceeds_exact_threshold(self, q):
        for kt in np.linspace(0.05, 10.0, 25):
            model = fig_model(q=q, beta=1.0 / kt, omega_c=10.0)
            assert (sufficient_sinc_bound_dipole(model)
                    <= exact_threshold_dipole(model) + 1e-10)

    def test_reference_parameters_strictly_below(self):
        model = fig_model()
        assert sufficient_sinc_bound_dipole(model) < 0.628

    def test_vanishing_coupling_limit(self):
        assert sufficient_sinc_bound(0.0, 0.3, +1, 0.5, -0.2) == 0.0

    def test_fermionic_high_temperature_shape(self):
        # I_pm -> 0 reduces the bound to 2n / (n + (1 + q n))
        n = 0.49
        got = sufficient_sinc_bound(1.0, n, -1, 1e-9, -1e-9)
        assert got == pytest.approx(2 * n / (n + (1 - n)), rel=1e-6)


class TestCriticalTimes:
    def test_two_gap_reduction_matches_sufficient_bound(self):
        build = build_dipole(fig_model(sinc_value=0.0))
        ct = critical_times(build.omega, build.gaps)
        induced = 2.0 / (2.0 * 1.0 * ct.dtc1)
        assert induced == pytest.approx(
            sufficient_sinc_bound_dipole(build.model), rel=1e-10)
        assert ct.dtc0 == pytest.approx(ct.dtc1, rel=1e-12)

    def test_symmetric_two_gap_case_collapses_all_bounds(self):
        om = np.array([[0.4 + 0.1j]])
        provider = OmegaProvider(entries={-1.0: om, 1.0: om})
        ct = critical_times(provider)
        assert ct.dtc0 == pytest.approx(ct.dtc1, rel=1e-12)
        assert ct.dtc1 == pytest.approx(ct.dtc2, rel=1e-12)

    def test_single_gap_is_trivially_safe(self):
        provider = OmegaProvider(entries={0.0: np.array([[1.0]])})
        ct = critical_times(provider)
        assert ct.trivial_single_gap
        assert ct.dtc0 == ct.dtc1 == ct.dtc2 == 0.0

    def test_zero_block_eigenvalue_pushes_to_infinity(self):
        provider = OmegaProvider(entries={
            -1.0: np.array([[0.0 + 0.3j]]),   # Hermitian part 0
            +1.0: np.array([[1.0 + 0.1j]]),
        })
        ct = critical_times(provider)
        assert math.isinf(ct.dtc0) and math.isinf(ct.dtc1) and math.isinf(ct.dtc2)

    @pytest.mark.parametrize("seed", range(10))
    def test_sufficiency_and_ordering_randomized(self, seed):
        rng = np.random.default_rng(3000 + seed)
        provider = synthetic_provider(rng, n_gaps=int(rng.integers(2, 5)),
                                      m=int(rng.integers(1, 3)))
        ct = critical_times(provider)
        assert ct.dtc0 <= ct.dtc1 * (1 + 1e-12)
        assert ct.dtc1 <= ct.dtc2 * (1 + 1e-12)
        for dtc in (ct.dtc0, ct.dtc1, ct.dtc2):
            gamma = rate_matrix(provider, delta_t=dtc)
            assert lambda_min(gamma) >= -1e-10 * np.linalg.norm(gamma, 2)

    def test_psd_holds_on_grid_beyond_smallest_bound(self):
        rng = np.random.default_rng(77)
        provider = synthetic_provider(rng, n_gaps=3)
        ct = critical_times(provider)
        for dt in np.linspace(ct.dtc0, 3.0 * ct.dtc0, 40):
            gamma = rate_matrix(provider, delta_t=dt)
            assert lambda_min(gamma) >= -1e-10 * np.linalg.norm(gamma, 2)

    def test_dilution_probabilities_normalized(self):
        rng = np.random.default_rng(5)
        provider = synthetic_provider(rng, n_gaps=4)
        ct = critical_times(provider)
        for w, rec in ct.dilution.items():
            total = sum(rec.p_optimal.values())
            assert total == pytest.approx(1.0, abs=1e-12)
            assert all(p >= 0 for p in rec.p_optimal.values())
            # p q = K for every partner gap
            for wp, p in rec.p_optimal.items():
                assert p * rec.q_weights[wp] == pytest.approx(rec.k_constant,
                                                              rel=1e-12)


class TestVerifyDilution:
    def test_flat_distribution_at_dtc1(self):
        rng = np.random.default_rng(11)
        provider = synthetic_provider(rng, n_gaps=3)
        ws = provider.gaps
        flat = {w: {wp: 1.0 / (len(ws) - 1) for wp in ws if wp != w} for w in ws}
        ct = critical_times(provider)
        assert verify_dilution(provider, ws, flat, ct.dtc1)

    def test_optimal_distribution_at_dtc0(self):
        rng = np.random.default_rng(12)
        provider = synthetic_provider(rng, n_gaps=4)
        ct = critical_times(provider)
        probs = {w: rec.p_optimal for w, rec in ct.dilution.items()}
        assert verify_dilution(provider, provider.gaps, probs, ct.dtc0)

    def test_half_dtc0_fails_the_bound_but_can_stay_psd(self):
        rng = np.random.default_rng(13)
        provider = synthetic_provider(rng, n_gaps=3)
        ct = critical_times(provider)
        probs = {w: rec.p_optimal for w, rec in ct.dilution.items()}
        assert not verify_dilution(provider, provider.gaps, probs, ct.dtc0 / 2)
        gamma = rate_matrix(provider, delta_t=ct.dtc0 / 2)
        assert lambda_min(gamma) >= -1e-10 * np.linalg.norm(gamma, 2)

    def test_invalid_probabilities_rejected(self):
        rng = np.random.default_rng(14)
        provider = synthetic_provider(rng, n_gaps=3)
        ws = provider.gaps
        bad = {w: {wp: 0.9 / (len(ws) - 1) for wp in ws if wp != w} for w in ws}
        with pytest.raises(ValidationError, match="sum"):
            verify_dilution(provider, ws, bad, 100.0)
        neg = {w: {wp: -1.0 for wp in ws if wp != w} for w in ws}
        with pytest.raises(ValidationError, match="negative"):
            verify_dilution(provider, ws, neg, 100.0)


class TestDipoleSufficiency:
    @pytest.mark.parametrize("seed", range(6))
    def test_dipole_instances_psd_at_critical_times(self, seed):
        rng = np.random.default_rng(4000 + seed)
        model = DipoleModel.qubit(
            q=int(rng.choice([-1, 1])),
            omega0=1.0,
            beta=float(rng.uniform(0.2, 5.0)),
            kappa0=float(rng.uniform(0.1, 3.0)),
            omega_c=float(rng.uniform(2.0, 20.0)),
            delta_t=1.0,
        )
        build = build_dipole(model)
        ct = critical_times(build.omega, build.gaps)
        assert ct.dtc0 <= ct.dtc1 <= ct.dtc2 * (1 + 1e-12)
        for dtc in (ct.dtc0, ct.dtc1, ct.dtc2):
            if math.isinf(dtc):
                continue
            gamma = rate_matrix(build.omega, delta_t=dtc)
            assert lambda_min(gamma) >= -1e-10 * np.linalg.norm(gamma, 2)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import occupation_grid, pv_fixed_grid
from psagen.bath import (
    BathSpec,
    OmegaProvider,
    dipole_omega,
    dipole_pv_terms,
    occupation,
    pv_integral,
)
from psagen.errors import ValidationError


class TestOccupation:
    def test_zero_temperature_limit(self):
        assert occupation(math.inf, +1, 0.3) == 0.0
        assert occupation(math.inf, -1, 2.0) == 0.0

    def test_bose_closed_form(self):
        assert occupation(2.0, +1, 1.0) == pytest.approx(1.0 / (math.e**2 - 1.0), rel=1e-14)

    def test_infinite_temperature_fermion(self):
        assert occupation(0.0, -1, 1.0) == pytest.approx(0.5)
        assert occupation(5.0, -1, 0.0) == pytest.approx(0.5)

    def test_bose_pole_raises(self):
        with pytest.raises(ValidationError):
            occupation(1.0, +1, 0.0)

    def test_no_overflow_deep_in_the_tail(self):
        assert occupation(1e3, +1, 500.0) == 0.0

    @given(
        beta1=st.floats(1e-6, 50.0),
        dbeta=st.floats(1e-6, 50.0),
        eps=st.floats(1e-3, 10.0),
        q=st.sampled_from([+1, -1]),
    )
    @settings(max_examples=100, deadline=None)
    def test_monotone_decreasing_in_beta(self, beta1, dbeta, eps, q):
        lo, hi = occupation(beta1 + dbeta, q, eps), occupation(beta1, q, eps)
        assert lo <= hi * (1.0 + 1e-12) + 1e-15

    def test_infinite_temperature_boson_raises(self):
        with pytest.raises(ValidationError):
            occupation(0.0, +1, 1.0)


class TestPvIntegral:
    def test_constant_numerator_closed_form(self):
        c, pole, cutoff = 1.7, 0.8, 5.0
        expected = c * math.log((cutoff - pole) / pole)
        assert pv_integral(lambda e: c + 0.0 * e, pole, cutoff) == pytest.approx(
            expected, rel=1e-10)

    def test_even_numerator_on_symmetric_domain_vanishes(self):
        # g even around the pole makes the integrand odd: PV = 0
        pole = 1.2
        val = pv_integral(lambda e: np.cos(e - pole), pole, 2 * pole)
        assert abs(val) < 1e-12

    def test_pole_outside_domain_rejected(self):
        with pytest.raises(ValidationError):
            pv_integral(lambda e: e, pole=2.0, cutoff=1.0)

    @pytest.mark.parametrize("q,beta", [(+1, 2.0), (-1, 2.0), (+1, 0.5)])
    def test_against_fixed_grid_oracle(self, q, beta):
        # the two pole-carrying numerators of the dipole integrals
        bath = BathSpec.ohmic(q=q, beta=beta, kappa0=2.0, omega_c=5.0)
        w0, cutoff = 1.0, bath.integration_cutoff
        for g in (
            lambda e: bath.kappa(e) * occupation_grid(beta, q, e),
            lambda e: bath.kappa(e) * (1.0 + q * occupation_grid(beta, q, e)),
        ):
            adaptive = pv_integral(g, w0, cutoff)
            oracle = pv_fixed_grid(g, w0, cutoff)
            assert adaptive == pytest.approx(oracle, rel=1e-6)


class TestDipolePvTerms:
    @pytest.mark.parametrize("seed", range(5))
    def test_identity_between_the_three_integrals(self, seed):
        rng = np.random.default_rng(seed)
        q = int(rng.choice([-1, 1]))
        beta = float(rng.uniform(0.2, 8.0))
        bath = BathSpec.ohmic(q=q, beta=beta, kappa0=float(rng.uniform(0.1, 3.0)),
                              omega_c=float(rng.uniform(2.0, 15.0)))
        big_i, i_minus, i_plus = dipole_pv_terms(bath, w0=1.0)
        assert big_i == pytest.approx(i_minus - i_plus, rel=1e-8, abs=1e-12)

    def test_fermionic_temperature_independence(self):
        vals = []
        for beta in (1.0, 10.0):
            bath = BathSpec.ohmic(q=-1, beta=beta, kappa0=2.0, omega_c=5.0)
            vals.append(dipole_pv_terms(bath, w0=1.0)[0])
        assert vals[0] == pytest.approx(vals[1], rel=1e-8)

    def test_zero_coupling_gives_zeros(self):
        bath = BathSpec.ohmic(q=+1, beta=2.0, kappa0=0.0, omega_c=5.0)
        assert dipole_pv_terms(bath, w0=1.0) == pytest.approx((0.0, 0.0, 0.0), abs=1e-13)


class TestDipoleOmega:
    def test_real_parts_are_half_the_secular_rates(self):
        bath = BathSpec.ohmic(q=+1, beta=2.0, kappa0=2.0, omega_c=5.0)
        provider = dipole_omega(bath, w0=1.0)
        kap = bath.kappa(1.0)
        n = bath.occupation(1.0)
        assert 2 * provider.matrix(-1.0)[0, 0].real == pytest.approx(kap * n, rel=1e-12)
        assert 2 * provider.matrix(+1.0)[0, 0].real == pytest.approx(
            kap * (1 + n), rel=1e-12)

    def test_zero_temperature_absorption_vanishes(self):
        bath = BathSpec.ohmic(q=+1, beta=math.inf, kappa0=2.0, omega_c=5.0)
        provider = dipole_omega(bath, w0=1.0)
        entry = provider.matrix(-1.0)[0, 0]
        assert entry.real == pytest.approx(0.0, abs=1e-15)
        assert entry.imag != 0.0

    @pytest.mark.parametrize("seed", range(8))
    def test_hermitian_parts_psd_randomized(self, seed):
        rng = np.random.default_rng(1000 + seed)
        bath = BathSpec.ohmic(
            q=int(rng.choice([-1, 1])),
            beta=float(rng.uniform(0.1, 20.0)),
            kappa0=float(rng.uniform(0.05, 4.0)),
            omega_c=float(rng.uniform(2.0, 20.0)),
        )
        provider = dipole_omega(bath, w0=1.0)
        for w in provider.gaps:
            norm = provider.spectral_norm(w)
            assert provider.lambda_min(w) >= -1e-10 * norm


class TestOmegaProviderValidation:
    def test_negative_hermitian_part_rejected(self):
        with pytest.raises(ValidationError, match="Hermitian part"):
            OmegaProvider(entries={1.0: np.array([[-1.0 + 0.5j]])})

    def test_missing_entry_lookup(self):
        provider = OmegaProvider(entries={1.0: np.array([[1.0]])})
        with pytest.raises(ValidationError, match="no Omega entry"):
            provider.matrix(2.0)


class TestTabulatedBath:
    def test_csv_round_trip_close_to_ohmic(self, tmp_path):
        # a table can only support modest quadrature tolerances: the
        # integrand has a kink at every sample
        grid = np.linspace(0.0, 50.0, 501)
        dense = 2.0 * grid * np.exp(-grid / 5.0)
        path = tmp_path / "kappa.csv"
        np.savetxt(path, np.column_stack([grid, dense]), delimiter=",")
        tab = BathSpec.from_csv(path, q=+1, beta=2.0)
        ohm = BathSpec.ohmic(q=+1, beta=2.0, kappa0=2.0, omega_c=5.0)
        assert tab.kappa(1.0) == pytest.approx(ohm.kappa(1.0), rel=1e-4)
        # residual disagreement is table discretization (interp bias + the
        # shorter cutoff), not quadrature error
        t_terms = dipole_pv_terms(tab, w0=1.0, rel_tol=1e-6)
        o_terms = dipole_pv_terms(ohm, w0=1.0, rel_tol=1e-8)
        assert t_terms == pytest.approx(o_terms, rel=5e-3, abs=1e-3)

    def test_decreasing_energies_rejected(self):
        with pytest.raises(ValidationError, match="strictly increasing"):
            BathSpec.tabulated(q=+1, beta=1.0, eps=[0.0, 2.0, 1.0], kappa=[0, 1, 1])

    def test_negative_rates_rejected(self):
        with pytest.raises(ValidationError, match=">= 0"):
            BathSpec.tabulated(q=+1, beta=1.0, eps=[0.0, 1.0, 2.0], kappa=[0, -1, 1])

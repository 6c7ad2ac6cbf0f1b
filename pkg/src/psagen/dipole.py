"""Preset builders for the dipole-coupled two-level and oscillator models.

Both models share H = w0 * ladder^dag ladder and a single coupling channel
A = ladder + ladder^dag, giving exactly two gaps {-w0, +w0} with
eigenoperators (ladder, ladder^dag).  ``s`` selects the system statistics
(+1 harmonic oscillator, -1 qubit) and ``q`` the bath statistics (+1 bosonic,
-1 fermionic).

Basis convention: index 0 is the ground state, so the qubit Hamiltonian is
diag(0, w0) and populations/coherences are rho[0, 0] and rho[1, 0].

Closed forms for the generator entries (single channel, weight
S = sinc(w0 * dt) on the cross terms):

    gamma_mm = kappa n                      gamma_pp = kappa (1 + q n)
    gamma_mp = [((q+1) n + 1) kappa / 2 - i I] * S
    eta_mm   = I_minus                      eta_pp   = I_plus
    eta_pm   = [i (gamma_pp - gamma_mm) / 4
                + (I_minus + I_plus) / 2] * S

These are the oracle against which the generic pipeline is cross-checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .bath import BathSpec, OmegaProvider, dipole_omega, dipole_pv_terms
from .errors import ValidationError
from .generator import (
    CoarseGrainedGenerator,
    Liouvillian,
    build_generator,
    liouvillian,
)
from .spectral import GapDecomposition, SystemSpec, eigendecompose, gap_decompose

__all__ = [
    "DipoleModel",
    "DipoleRates",
    "DipoleBuild",
    "dipole_rates",
    "build_dipole",
    "invert_sinc",
    "ladder_operator",
]

QHO = +1
QUBIT = -1


def ladder_operator(n_levels: int) -> np.ndarray:
    """Annihilation operator on an n_levels-dimensional number ladder."""
    a = np.zeros((n_levels, n_levels), dtype=complex)
    for n in range(n_levels - 1):
        a[n, n + 1] = math.sqrt(n + 1)
    return a


@dataclass(frozen=True)
class DipoleModel:
    """Parameters of a dipole-coupled qubit or truncated oscillator."""

    s: int                      # +1 oscillator, -1 qubit
    q: int                      # +1 bosonic bath, -1 fermionic bath
    omega0: float
    beta: float
    kappa0: float
    omega_c: float
    n_max: int = 30             # oscillator truncation; ignored for the qubit
    delta_t: float | None = None
    sinc_value: float | None = None

    def __post_init__(self):
        if self.s not in (QHO, QUBIT):
            raise ValidationError("s must be +1 (oscillator) or -1 (qubit)")
        if self.q not in (+1, -1):
            raise ValidationError("q must be +1 (bosonic) or -1 (fermionic)")
        if self.omega0 <= 0:
            raise ValidationError("omega0 must be positive")
        if self.omega_c <= 0:
            raise ValidationError("omega_c must be positive")
        if self.s == QHO and self.n_max < 2:
            raise ValidationError("oscillator truncation needs n_max >= 2")
        if self.delta_t is not None and self.sinc_value is not None:
            raise ValidationError("give at most one of delta_t and sinc_value")

    @classmethod
    def qubit(cls, q: int, omega0: float, beta: float, kappa0: float,
              omega_c: float, **kw) -> "DipoleModel":
        return cls(s=QUBIT, q=q, omega0=omega0, beta=beta, kappa0=kappa0,
                   omega_c=omega_c, **kw)

    @classmethod
    def oscillator(cls, q: int, omega0: float, beta: float, kappa0: float,
                   omega_c: float, n_max: int = 30, **kw) -> "DipoleModel":
        return cls(s=QHO, q=q, omega0=omega0, beta=beta, kappa0=kappa0,
                   omega_c=omega_c, n_max=n_max, **kw)

    @property
    def dimension(self) -> int:
        return 2 if self.s == QUBIT else self.n_max

    def bath(self) -> BathSpec:
        return BathSpec.ohmic(q=self.q, beta=self.beta, kappa0=self.kappa0,
                              omega_c=self.omega_c)

    def resolved_sinc(self) -> float:
        """Cross-term weight sinc(w0 * dt), or the injected value."""
        if self.sinc_value is not None:
            return float(self.sinc_value)
        if self.delta_t is None:
            raise ValidationError("model has no coarse-graining parameterization")
        if math.isinf(self.delta_t):
            return 0.0
        return float(np.sinc(self.omega0 * self.delta_t / math.pi))

    def system(self) -> SystemSpec:
        d = self.dimension
        ladder = ladder_operator(d)
        h = self.omega0 * np.diag(np.arange(d)).astype(complex)
        return SystemSpec(dimension=d, hamiltonian=h,
                          couplings=(ladder + ladder.conj().T,))


def invert_sinc(value: float, omega0: float) -> float:
    """Smallest dt >= 0 with sinc(omega0 * dt) = value (principal branch).

    Only the branch omega0 * dt in [0, pi] is inverted; value = 1 maps to
    dt = 0 and value = 0 to the first sinc zero dt = pi / omega0.
    """
    if not (0.0 <= value <= 1.0):
        raise ValidationError("sinc value must lie in [0, 1]")
    if value == 1.0:
        return 0.0
    if value == 0.0:
        return math.pi / omega0
    x = brentq(lambda u: np.sinc(u / math.pi) - value, 1e-12, math.pi)
    return x / omega0


@dataclass(frozen=True)
class DipoleRates:
    """Hand-coded generator entries and derived constants of a dipole model."""

    s: int
    q: int
    omega0: float
    kappa: float            # decay-rate curve at omega0
    n: float                # thermal occupation at omega0
    big_i: float            # temperature-weighted principal-value integral
    i_minus: float
    i_plus: float
    sinc: float             # cross-term weight
    gamma_mm: float
    gamma_pp: float
    gamma_mp: complex
    eta_mm: float
    eta_pp: float
    eta_pm: complex

    @property
    def gamma_pm(self) -> complex:
        return np.conj(self.gamma_mp)

    @property
    def eta_mp(self) -> complex:
        return np.conj(self.eta_pm)

    @property
    def omega_bar(self) -> float:
        """Lamb-shifted oscillation frequency.

        The level splitting renormalizes differently for the two systems:
        w0 + eta_pp - eta_mm for the qubit (ladder^2 = 0 kills the rest),
        w0 + eta_mm + eta_pp for the oscillator.
        """
        if self.s == QUBIT:
            return self.omega0 + self.eta_pp - self.eta_mm
        return self.omega0 + self.eta_mm + self.eta_pp

    @property
    def rate_sum(self) -> float:
        return self.gamma_pp + self.gamma_mm

    @property
    def rate_gap(self) -> float:
        return self.gamma_pp - self.gamma_mm


def dipole_rates(model: DipoleModel, rel_tol: float = 1e-10) -> DipoleRates:
    """Evaluate the closed-form generator entries of the dipole model."""
    bath = model.bath()
    big_i, i_minus, i_plus = dipole_pv_terms(bath, model.omega0, rel_tol=rel_tol)
    kappa = float(bath.kappa(model.omega0))
    n = bath.occupation(model.omega0)
    s_fac = model.resolved_sinc()
    gamma_mm = kappa * n
    gamma_pp = kappa * (1.0 + model.q * n)
    gamma_mp = (((model.q + 1) * n + 1.0) * kappa / 2.0 - 1j * big_i) * s_fac
    eta_pm = (0.25j * (gamma_pp - gamma_mm) + 0.5 * (i_minus + i_plus)) * s_fac
    return DipoleRates(
        s=model.s, q=model.q, omega0=model.omega0,
        kappa=kappa, n=n, big_i=big_i, i_minus=i_minus, i_plus=i_plus,
        sinc=s_fac,
        gamma_mm=gamma_mm, gamma_pp=gamma_pp, gamma_mp=gamma_mp,
        eta_mm=i_minus, eta_pp=i_plus, eta_pm=eta_pm,
    )


@dataclass(frozen=True)
class DipoleBuild:
    """Full pipeline output for a dipole model."""

    model: DipoleModel
    system: SystemSpec
    gaps: GapDecomposition
    omega: OmegaProvider
    generator: CoarseGrainedGenerator
    liouvillian: Liouvillian
    rates: DipoleRates


def build_dipole(model: DipoleModel, rel_tol: float = 1e-10) -> DipoleBuild:
    """Run the generic pipeline on a dipole model.

    The generator entries coming out of this path must agree with the
    closed forms in :func:`dipole_rates`; the test suite pins that down.
    """
    system = model.system()
    sd = eigendecompose(system)
    gaps = gap_decompose(sd, system.couplings)
    omega = dipole_omega(model.bath(), model.omega0, rel_tol=rel_tol)
    gen = build_generator(gaps, omega, delta_t=model.delta_t,
                          sinc_value=model.sinc_value)
    liou = liouvillian(system, gen, gaps)
    return DipoleBuild(model=model, system=system, gaps=gaps, omega=omega,
                       generator=gen, liouvillian=liou,
                       rates=dipole_rates(model, rel_tol=rel_tol))

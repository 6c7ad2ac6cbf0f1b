"""Bath statistics, spectral functions and principal-value quadrature.

The environment enters the generator only through the half-range Fourier
transforms of its correlation functions, collected per energy gap w into an
M x M matrix Omega(w).  For the dipole-coupled models (single channel, gaps
{-w0, +w0}) these reduce to scalars

    Omega(-w0) = kappa(w0) n(w0) / 2            + i * I_minus
    Omega(+w0) = kappa(w0) (1 + q n(w0)) / 2    + i * I_plus

with n the Bose/Fermi occupation, kappa the continuum decay-rate curve and
I_minus / I_plus one-dimensional principal-value integrals over the bath
spectrum.  Everything here is a pure function of the bath parameters.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .errors import QuadratureError, ValidationError

__all__ = [
    "BathSpec",
    "OmegaProvider",
    "occupation",
    "pv_integral",
    "dipole_pv_terms",
    "dipole_omega",
]

BOSONIC = +1
FERMIONIC = -1

# Hermitian part of Omega(w) may dip below zero by at most this fraction of
# its spectral norm before construction fails.
_PSD_REL_TOL = 1e-10


def occupation(beta: float, q: int, eps: float) -> float:
    """Thermal occupation 1 / (exp(beta*eps) - q) at energy eps > 0.

    ``beta`` may be ``math.inf`` (zero temperature, occupation 0).  For
    fermions (q = -1) eps = 0 is allowed and gives 1/2; for bosons the
    function has a pole at eps = 0 and raising is the only safe option.
    """
    if q not in (BOSONIC, FERMIONIC):
        raise ValidationError(f"statistics q must be +1 or -1, got {q}")
    if eps < 0:
        raise ValidationError("occupation requires eps >= 0")
    if math.isinf(beta):
        return 0.0 if eps > 0 else 0.5
    x = beta * eps
    if x == 0 and q == BOSONIC:
        raise ValidationError("Bose occupation diverges at beta * eps = 0")
    # exp(-x)/(1 - q exp(-x)) is the overflow-safe form of 1/(exp(x) - q).
    e = math.exp(-x)
    return e / (1.0 - q * e)


def _occ_array(beta: float, q: int, eps: np.ndarray) -> np.ndarray:
    """Vectorized occupation for strictly positive energies."""
    if math.isinf(beta):
        return np.zeros_like(eps)
    e = np.exp(-beta * eps)
    return e / (1.0 - q * e)


@dataclass(frozen=True)
class BathSpec:
    """Thermal bath: statistics, inverse temperature and decay-rate curve.

    The decay-rate curve kappa(eps) >= 0 (the continuum rate 2*pi*rho_eps) is
    either the built-in ohmic-exponential family

        kappa(eps) = kappa0 * eps * exp(-eps / omega_c)

    or a user-supplied table, linearly interpolated (a table starting above
    eps = 0 is anchored with kappa(0) = 0).  Beyond ``integration_cutoff`` the
    curve is treated as zero and all integrals stop there.
    """

    q: int
    beta: float
    kappa0: float | None = None
    omega_c: float | None = None
    table: tuple[tuple[float, ...], tuple[float, ...]] | None = None
    integration_cutoff: float = 0.0

    def __post_init__(self):
        if self.q not in (BOSONIC, FERMIONIC):
            raise ValidationError(f"statistics q must be +1 or -1, got {self.q}")
        if self.beta < 0:
            raise ValidationError("beta must be >= 0 (or math.inf)")
        if (self.kappa0 is None) == (self.table is None):
            raise ValidationError("provide either the ohmic family or a table, not both")
        if self.integration_cutoff <= 0:
            raise ValidationError("integration_cutoff must be positive")

    @classmethod
    def ohmic(cls, q: int, beta: float, kappa0: float, omega_c: float,
              integration_cutoff: float | None = None) -> "BathSpec":
        if kappa0 < 0:
            raise ValidationError("kappa0 must be >= 0")
        if omega_c <= 0:
            raise ValidationError("omega_c must be positive")
        if integration_cutoff is None:
            # kappa0 * eps * exp(-40) < 1e-17 * scale beyond 40 cutoffs
            integration_cutoff = 40.0 * omega_c
        return cls(q=q, beta=beta, kappa0=kappa0, omega_c=omega_c,
                   integration_cutoff=integration_cutoff)

    @classmethod
    def tabulated(cls, q: int, beta: float, eps, kappa,
                  integration_cutoff: float | None = None) -> "BathSpec":
        eps = np.asarray(eps, dtype=float)
        kappa = np.asarray(kappa, dtype=float)
        if eps.ndim != 1 or eps.shape != kappa.shape or len(eps) < 2:
            raise ValidationError("table needs two equal-length 1-d columns")
        if np.any(np.diff(eps) <= 0):
            raise ValidationError("table energies must be strictly increasing")
        if np.any(kappa < 0):
            raise ValidationError("table decay rates must be >= 0")
        if eps[0] > 0:
            eps = np.concatenate([[0.0], eps])
            kappa = np.concatenate([[0.0], kappa])
        elif eps[0] < 0:
            raise ValidationError("table energies must be >= 0")
        if integration_cutoff is None:
            integration_cutoff = float(eps[-1])
        return cls(q=q, beta=beta, table=(tuple(eps), tuple(kappa)),
                   integration_cutoff=integration_cutoff)

    @classmethod
    def from_csv(cls, path, q: int, beta: float,
                 integration_cutoff: float | None = None) -> "BathSpec":
        """Load a two-column CSV (eps, kappa) decay-rate table."""
        data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
        if data.shape[1] != 2:
            raise ValidationError(f"{path}: expected two columns (eps, kappa)")
        return cls.tabulated(q, beta, data[:, 0], data[:, 1],
                             integration_cutoff=integration_cutoff)

    def kappa(self, eps):
        """Decay-rate curve, vectorized; zero beyond the integration cutoff."""
        eps = np.asarray(eps, dtype=float)
        if self.table is None:
            out = self.kappa0 * eps * np.exp(-eps / self.omega_c)
        else:
            te, tk = self.table
            out = np.interp(eps, te, tk, left=0.0, right=0.0)
        out = np.where(eps > self.integration_cutoff, 0.0, out)
        return out if out.ndim else float(out)

    def kink_energies(self):
        """Sample energies where a tabulated curve is non-smooth (else None)."""
        if self.table is None:
            return None
        return np.asarray(self.table[0])

    def occupation(self, eps: float) -> float:
        return occupation(self.beta, self.q, eps)


def pv_integral(f, pole: float, cutoff: float, rel_tol: float = 1e-10,
                window: float | None = None, breakpoints=None) -> float:
    """Cauchy principal value of integral_0^cutoff f(eps) / (eps - pole) d eps.

    ``f`` is the pole-free numerator, assumed smooth near the pole.  On a
    symmetric window (pole - w, pole + w) the singularity cancels exactly:

        PV int = int_0^w [f(pole + x) - f(pole - x)] / x dx ,

    and the remaining pieces are ordinary adaptive quadrature.  Known kinks
    of the numerator (tabulated curves) go in ``breakpoints`` so QUADPACK
    can subdivide there.
    """
    if not (0.0 < pole < cutoff):
        raise ValidationError("pole must lie strictly inside (0, cutoff)")
    w = min(pole, cutoff - pole) / 2.0 if window is None else window
    if not (0.0 < w <= min(pole, cutoff - pole)):
        raise ValidationError("window must fit inside (0, cutoff) around the pole")

    bp = np.asarray(breakpoints, dtype=float) if breakpoints is not None else None
    window_bp = None
    if bp is not None:
        offsets = np.unique(np.abs(bp - pole))
        window_bp = offsets[(offsets > 0.0) & (offsets < w)]

    pieces = [
        (lambda x: (f(pole + x) - f(pole - x)) / x, 0.0, w, window_bp),
        (lambda e: f(e) / (e - pole), 0.0, pole - w, bp),
        (lambda e: f(e) / (e - pole), pole + w, cutoff, bp),
    ]
    total = 0.0
    scale = 0.0
    residual = 0.0
    for integrand, a, b, pts in pieces:
        if b <= a:
            continue
        val, err = _quad_piece(integrand, a, b, rel_tol, breakpoints=pts)
        total += val
        scale += abs(val)
        residual += err
    # err estimates are absolute per piece; compare against the piece scale so
    # that cancellation between pieces does not trip the check.
    if residual > max(10.0 * rel_tol * scale, 1e-12):
        raise QuadratureError(
            f"principal-value quadrature residual {residual:.3e} exceeds tolerance",
            residual=residual,
        )
    return total


def _quad_piece(f, a: float, b: float, rel_tol: float, breakpoints=None):
    """Adaptive quadrature that tolerates flagged-but-converged results.

    QUADPACK warns (rather than fails) when roundoff or subdivision limits
    prevent the requested tolerance; the result is accepted as long as its
    own error estimate is still small, otherwise a QuadratureError carries
    the residual.  Interior ``breakpoints`` force subdivision at known kinks.
    """
    pts = None
    if breakpoints is not None:
        inside = np.asarray(breakpoints, dtype=float)
        inside = np.unique(inside[(inside > a) & (inside < b)])
        if len(inside):
            pts = inside
    limit = 400 if pts is None else max(400, 2 * len(pts) + 100)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IntegrationWarning)
        val, err = quad(f, a, b, epsabs=1e-14, epsrel=rel_tol, limit=limit,
                        points=pts)
    if caught and err > max(10.0 * rel_tol * abs(val), 1e-10):
        raise QuadratureError(
            f"quadrature did not converge on ({a}, {b}): "
            f"residual {err:.3e} ({caught[0].message})",
            residual=err,
        )
    return val, err


def _quad(f, a: float, b: float, rel_tol: float, breakpoints=None) -> float:
    if b <= a:
        return 0.0
    return _quad_piece(f, a, b, rel_tol, breakpoints=breakpoints)[0]


def dipole_pv_terms(bath: BathSpec, w0: float, rel_tol: float = 1e-10):
    """The three principal-value integrals of the dipole model.

    Returns (I, I_minus, I_plus) where

        I       = (w0/pi) PV int ((q+1) n + 1) kappa / (eps^2 - w0^2)
        I_minus = (1/2pi) [ PV int kappa n / (eps - w0)
                            - int kappa (1 + q n) / (eps + w0) ]
        I_plus  = (1/2pi) [ int kappa n / (eps + w0)
                            - PV int kappa (1 + q n) / (eps - w0) ]

    all over eps in (0, cutoff).  The identity I = I_minus - I_plus holds
    analytically and is a standard cross-check on the quadrature.
    """
    if not (0.0 < w0 < bath.integration_cutoff):
        raise ValidationError("w0 must lie inside (0, integration_cutoff)")
    q, beta = bath.q, bath.beta
    cutoff = bath.integration_cutoff
    kap = bath.kappa
    kinks = bath.kink_energies()

    def n(eps):
        return _occ_array(beta, q, np.asarray(eps, dtype=float))

    big_i = pv_integral(
        lambda e: (w0 / math.pi) * ((q + 1) * n(e) + 1.0) * kap(e) / (e + w0),
        pole=w0, cutoff=cutoff, rel_tol=rel_tol, breakpoints=kinks,
    )
    i_minus = (
        pv_integral(lambda e: kap(e) * n(e), pole=w0, cutoff=cutoff,
                    rel_tol=rel_tol, breakpoints=kinks)
        - _quad(lambda e: kap(e) * (1.0 + q * n(e)) / (e + w0), 0.0, cutoff,
                rel_tol, breakpoints=kinks)
    ) / (2.0 * math.pi)
    i_plus = (
        _quad(lambda e: kap(e) * n(e) / (e + w0), 0.0, cutoff, rel_tol,
              breakpoints=kinks)
        - pv_integral(lambda e: kap(e) * (1.0 + q * n(e)), pole=w0, cutoff=cutoff,
                      rel_tol=rel_tol, breakpoints=kinks)
    ) / (2.0 * math.pi)
    return big_i, i_minus, i_plus


@dataclass(frozen=True)
class OmegaProvider:
    """Map gap w -> M x M half-Fourier matrix Omega(w).

    The Hermitian part Omega + Omega^dag of every entry must be positive
    semi-definite (up to a small numerical slack); this is what makes the
    secular blocks of the rate matrix non-negative.
    """

    entries: dict[float, np.ndarray]

    def __post_init__(self):
        checked = {}
        for w, mat in self.entries.items():
            mat = np.atleast_2d(np.asarray(mat, dtype=complex))
            if mat.shape[0] != mat.shape[1]:
                raise ValidationError(f"Omega({w}) must be square, got {mat.shape}")
            herm = mat + mat.conj().T
            norm = np.linalg.norm(mat, 2)
            if norm > 0:
                lam = np.linalg.eigvalsh(herm).min()
                if lam < -_PSD_REL_TOL * norm:
                    raise ValidationError(
                        f"Hermitian part of Omega({w}) has eigenvalue {lam:.3e} < 0"
                    )
            checked[float(w)] = mat
        object.__setattr__(self, "entries", checked)

    @property
    def gaps(self) -> tuple[float, ...]:
        return tuple(sorted(self.entries))

    def matrix(self, w: float) -> np.ndarray:
        try:
            return self.entries[w]
        except KeyError:
            raise ValidationError(f"no Omega entry for gap {w}") from None

    def hermitian_part(self, w: float) -> np.ndarray:
        m = self.matrix(w)
        return m + m.conj().T

    def spectral_norm(self, w: float) -> float:
        return float(np.linalg.norm(self.matrix(w), 2))

    def lambda_min(self, w: float) -> float:
        return float(np.linalg.eigvalsh(self.hermitian_part(w)).min())


def dipole_omega(bath: BathSpec, w0: float, rel_tol: float = 1e-10) -> OmegaProvider:
    """Omega entries for the dipole model: gaps {-w0, +w0}, scalar matrices."""
    _, i_minus, i_plus = dipole_pv_terms(bath, w0, rel_tol=rel_tol)
    kap = float(bath.kappa(w0))
    n = bath.occupation(w0)
    return OmegaProvider(entries={
        -w0: np.array([[0.5 * kap * n + 1j * i_minus]]),
        +w0: np.array([[0.5 * kap * (1.0 + bath.q * n) + 1j * i_plus]]),
    })

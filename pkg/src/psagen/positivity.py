"""Complete-positivity certification of the coarse-grained rate matrix.

Three layers, from exact to cheap:

* ``lambda_min``: the minimum eigenvalue of gamma(dt); non-negative iff the
  generator is GKSL-diagonalizable.
* the two-gap dipole model admits a necessary-and-sufficient threshold on the
  cross-term weight |sinc(w0 dt)| plus a weaker closed-form sufficient bound.
* for any number of gaps, critical coarse-graining times dtc0 <= dtc1 <= dtc2
  guarantee positive semi-definiteness whenever dt >= dtc.  They follow from
  diluting each diagonal (secular) block's positive weight across the
  off-diagonal blocks with probability sets {p^(w)_{w'}}: the pair condition

      dt >= (2 / p^(w)_{w'}) (||O(w)|| + ||O(w')||) / (|w - w'| lmin(w))

  is sufficient for every ordered pair; flat probabilities give dtc1, a
  worst-case over blocks gives dtc2, and the optimal probabilities
  p^(w)_{w'} = K(w) / q^(w)_{w'} give the tightest bound dtc0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bath import OmegaProvider, dipole_pv_terms
from .dipole import DipoleModel, DipoleRates
from .errors import ValidationError
from .spectral import GapDecomposition

__all__ = [
    "PositivityReport",
    "CriticalTimes",
    "DilutionRecord",
    "lambda_min",
    "rate_matrix",
    "simple_threshold_bound",
    "exact_threshold",
    "exact_threshold_dipole",
    "sufficient_sinc_bound",
    "sufficient_sinc_bound_dipole",
    "dipole_gamma_eigenvalues",
    "dipole_det",
    "critical_times",
    "verify_dilution",
]

PSD_REL_TOL = 1e-10


def lambda_min(gamma: np.ndarray) -> float:
    """Minimum eigenvalue of a Hermitian rate matrix (dense eigensolve)."""
    gamma = np.asarray(gamma)
    scale = np.abs(gamma).max()
    if scale > 0 and np.abs(gamma - gamma.conj().T).max() > 1e-10 * scale:
        raise ValidationError("rate matrix must be Hermitian")
    return float(np.linalg.eigvalsh(gamma).min())


def rate_matrix(omega: OmegaProvider, delta_t: float | None = None,
                sinc_value: float | None = None, gaps=None) -> np.ndarray:
    """The full N x N rate matrix from the Omega blocks alone.

    Index order is gap-major, channel-minor (N = G * M).  No eigenoperators
    enter: the spectrum of this matrix is what positivity certification is
    about, so synthetic Omega sets can be screened without a system behind
    them.
    """
    from .generator import sinc_factor

    if (delta_t is None) == (sinc_value is None):
        raise ValidationError("give exactly one of delta_t and sinc_value")
    ws = sorted(_gap_values(omega, gaps))
    if sinc_value is not None and len(ws) > 2:
        raise ValidationError("sinc_value parameterization needs at most two gaps")
    m = omega.matrix(ws[0]).shape[0]
    n = len(ws) * m
    gamma = np.zeros((n, n), dtype=complex)
    for wi, w in enumerate(ws):
        for wj, wp in enumerate(ws):
            if w == wp:
                s = 1.0
            elif sinc_value is not None:
                s = float(sinc_value)
            else:
                s = sinc_factor(w, wp, delta_t)
            block = (omega.matrix(wp) + omega.matrix(w).conj().T) * s
            gamma[wi * m:(wi + 1) * m, wj * m:(wj + 1) * m] = block
    return gamma


def simple_threshold_bound(n: float, q: int) -> float:
    """Threshold upper envelope 2 sqrt(n (1 + q n)) / (n + 1 + q n).

    This is the exact two-gap threshold with the principal-value integral
    set to zero; it only depends on the occupation number.
    """
    return 2.0 * math.sqrt(n * (1.0 + q * n)) / (n + 1.0 + q * n)


def exact_threshold(kappa: float, n: float, q: int, big_i: float) -> float:
    """Largest |sinc(w0 dt)| keeping the 2x2 dipole rate matrix PSD.

    det gamma >= 0 solved for the cross-term weight:

        sqrt( 4 kappa^2 n (1 + q n)
              / (kappa^2 (n + 1 + q n)^2 + 4 I^2) ).
    """
    num = 4.0 * kappa**2 * n * (1.0 + q * n)
    den = kappa**2 * (n + 1.0 + q * n) ** 2 + 4.0 * big_i**2
    if den == 0.0:
        return 0.0
    return math.sqrt(num / den)


def sufficient_sinc_bound(kappa: float, n: float, q: int,
                          i_minus: float, i_plus: float) -> float:
    """Closed-form sufficient bound on the cross-term weight (two gaps).

        2 kappa n / ( sqrt((kappa n)^2 + 4 I_minus^2)
                      + sqrt((kappa (1 + q n))^2 + 4 I_plus^2) )

    Never exceeds :func:`exact_threshold`; it underestimates most at low
    temperature.
    """
    den = (math.hypot(kappa * n, 2.0 * i_minus)
           + math.hypot(kappa * (1.0 + q * n), 2.0 * i_plus))
    if den == 0.0:
        return 0.0
    return 2.0 * kappa * n / den


def _dipole_terms(model: DipoleModel, rel_tol: float):
    bath = model.bath()
    big_i, i_minus, i_plus = dipole_pv_terms(bath, model.omega0, rel_tol=rel_tol)
    kappa = float(bath.kappa(model.omega0))
    n = bath.occupation(model.omega0)
    return kappa, n, big_i, i_minus, i_plus


def exact_threshold_dipole(model: DipoleModel, rel_tol: float = 1e-10) -> float:
    kappa, n, big_i, _, _ = _dipole_terms(model, rel_tol)
    return exact_threshold(kappa, n, model.q, big_i)


def sufficient_sinc_bound_dipole(model: DipoleModel, rel_tol: float = 1e-10) -> float:
    kappa, n, _, i_minus, i_plus = _dipole_terms(model, rel_tol)
    return sufficient_sinc_bound(kappa, n, model.q, i_minus, i_plus)


def dipole_gamma_eigenvalues(rates: DipoleRates, sinc_value: float | None = None):
    """Closed-form eigenvalues (gamma_-, gamma_+) of the 2x2 rate matrix."""
    g_mp = _cross_term(rates, sinc_value)
    tr = rates.gamma_pp + rates.gamma_mm
    disc = math.hypot(rates.gamma_pp - rates.gamma_mm, 2.0 * abs(g_mp))
    return 0.5 * (tr - disc), 0.5 * (tr + disc)


def dipole_det(rates: DipoleRates, sinc_value: float | None = None) -> float:
    """Determinant gamma_pp * gamma_mm - |cross term|^2 of the 2x2 matrix."""
    g_mp = _cross_term(rates, sinc_value)
    return rates.gamma_pp * rates.gamma_mm - abs(g_mp) ** 2


def _cross_term(rates: DipoleRates, sinc_value: float | None) -> complex:
    if sinc_value is None:
        return rates.gamma_mp
    if rates.sinc == 0.0:
        # re-evaluate the dt-free prefactor from the stored constants
        return (((rates.q + 1) * rates.n + 1.0) * rates.kappa / 2.0
                - 1j * rates.big_i) * sinc_value
    return rates.gamma_mp / rates.sinc * sinc_value


@dataclass(frozen=True)
class DilutionRecord:
    """Per-gap dilution data: q weights, optimal probabilities, Q and K."""

    q_weights: dict[float, float]
    p_optimal: dict[float, float]
    q_total: float
    k_constant: float


@dataclass(frozen=True)
class CriticalTimes:
    """The three sufficient coarse-graining thresholds and their dilution data.

    Always dtc0 <= dtc1 <= dtc2 when finite.  A single-gap model has no cross
    terms, any dt is safe: all three are 0 and ``trivial_single_gap`` is set.
    """

    dtc0: float
    dtc1: float
    dtc2: float
    dilution: dict[float, DilutionRecord] = field(default_factory=dict)
    trivial_single_gap: bool = False


def _gap_values(omega: OmegaProvider, gaps) -> list[float]:
    if gaps is None:
        return list(omega.gaps)
    if isinstance(gaps, GapDecomposition):
        return list(gaps.gaps)
    return [float(w) for w in gaps]


def critical_times(omega: OmegaProvider, gaps=None) -> CriticalTimes:
    """Compute dtc0, dtc1, dtc2 from the Omega blocks alone.

    ``gaps`` may be a GapDecomposition, an iterable of gap values, or None to
    use every gap the provider knows.  A block with lmin(w) = 0 pushes the
    affected times to infinity (only the strict secular limit is safe there).
    """
    ws = sorted(_gap_values(omega, gaps))
    g = len(ws)
    if g < 1:
        raise ValidationError("need at least one gap")
    if g == 1:
        return CriticalTimes(dtc0=0.0, dtc1=0.0, dtc2=0.0, trivial_single_gap=True)

    norms = {w: omega.spectral_norm(w) for w in ws}
    lmins = {w: max(omega.lambda_min(w), 0.0) for w in ws}

    # dtc1: flat probabilities p = 1/(G-1), exhaustive max over ordered pairs
    dtc1 = 0.0
    for w in ws:
        for wp in ws:
            if wp == w:
                continue
            num = norms[w] + norms[wp]
            den = abs(w - wp) * lmins[w]
            term = math.inf if den == 0.0 else 2.0 * (g - 1) * num / den
            dtc1 = max(dtc1, term)

    # dtc2: collapse all blocks onto worst norm / worst eigenvalue / closest pair
    nu_min = min(abs(w - wp) for w in ws for wp in ws if wp != w)
    norm_max = max(norms.values())
    lmin_glob = min(lmins.values())
    dtc2 = (math.inf if lmin_glob == 0.0
            else 4.0 * (g - 1) * norm_max / (nu_min * lmin_glob))

    # dtc0: optimal dilution p^(w)_{w'} q^(w)_{w'} = K(w)
    dilution: dict[float, DilutionRecord] = {}
    dtc0 = 0.0
    for w in ws:
        qw = {wp: abs(w - wp) / (norms[w] + norms[wp]) for wp in ws if wp != w}
        q_total = sum(qw.values())
        q_norm = {wp: v / q_total for wp, v in qw.items()}
        k_const = 1.0 / sum(1.0 / v for v in q_norm.values())
        p_opt = {wp: k_const / v for wp, v in q_norm.items()}
        dilution[w] = DilutionRecord(q_weights=q_norm, p_optimal=p_opt,
                                     q_total=q_total, k_constant=k_const)
        den = q_total * k_const * lmins[w]
        dtc0 = max(dtc0, math.inf if den == 0.0 else 2.0 / den)

    return CriticalTimes(dtc0=dtc0, dtc1=dtc1, dtc2=dtc2, dilution=dilution)


def verify_dilution(omega: OmegaProvider, gaps, probabilities,
                    delta_t: float) -> bool:
    """Check the pair-wise sufficient condition for a given dilution.

    ``probabilities`` maps each gap w to {w': p^(w)_{w'}} with non-negative
    entries summing to one.  Returns True iff

        dt >= (2 / p^(w)_{w'}) (||O(w)|| + ||O(w')||) / (|w - w'| lmin(w))

    holds for every ordered pair; True guarantees the rate matrix at this dt
    is PSD (the converse does not hold, the condition is only sufficient).
    """
    ws = sorted(_gap_values(omega, gaps))
    if len(ws) < 2:
        raise ValidationError("dilution needs at least two gaps")
    for w in ws:
        if w not in probabilities:
            raise ValidationError(f"missing probability set for gap {w}")
        probs = probabilities[w]
        if any(p < 0 for p in probs.values()):
            raise ValidationError(f"negative probability for gap {w}")
        total = sum(probs[wp] for wp in ws if wp != w)
        if abs(total - 1.0) > 1e-9:
            raise ValidationError(f"probabilities for gap {w} sum to {total}, not 1")

    for w in ws:
        lmin = max(omega.lambda_min(w), 0.0)
        for wp in ws:
            if wp == w:
                continue
            p = probabilities[w].get(wp, 0.0)
            num = 2.0 * (omega.spectral_norm(w) + omega.spectral_norm(wp))
            den = p * abs(w - wp) * lmin
            if den == 0.0:
                if not math.isinf(delta_t):
                    return False
                continue
            # tiny relative slack: dt computed from an algebraically equal
            # expression may differ from num/den by a few ulps
            if delta_t < (num / den) * (1.0 - 1e-12):
                return False
    return True


@dataclass(frozen=True)
class PositivityReport:
    """Summary of a certification run.

    ``lambda_min`` is the exact minimum eigenvalue of gamma at the model's
    coarse-graining time (None when no time was specified); the critical
    times and dilution data are dt-independent.
    """

    lambda_min: float | None
    is_cp: bool | None
    dtc0: float
    dtc1: float
    dtc2: float
    dilution: dict[float, DilutionRecord]
    trivial_single_gap: bool = False
    exact_threshold: float | None = None
    sufficient_bound: float | None = None

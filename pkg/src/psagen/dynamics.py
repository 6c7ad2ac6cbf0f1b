"""Trajectory integration, analytic reference solutions and steady states.

Propagation applies the exponential of the (constant) linearized generator on
each time increment, so a trajectory is exact to solver precision; analytic
closed forms for the dipole-coupled qubit, its process (channel-state dual)
eigenvalue, and the oscillator's second moments serve as independent oracles.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .dipole import DipoleRates
from .errors import IntegrationError, NonUniqueSteadyStateError, ValidationError
from .generator import Liouvillian, unvec, vec

__all__ = [
    "Trajectory",
    "ChoiTrajectory",
    "MomentSeries",
    "evolve",
    "propagate_matrix",
    "qubit_analytic",
    "choi_evolution",
    "choi_eigenvalue_analytic",
    "qho_moments",
    "ladder_moments",
    "steady_state",
]

_HERM_TOL = 1e-8
_TRACE_TOL = 1e-8


@dataclass
class Trajectory:
    """Times, density matrices, and optional named observable series."""

    times: np.ndarray
    states: list[np.ndarray]
    observables: dict[str, np.ndarray] = field(default_factory=dict)


@dataclass
class ChoiTrajectory:
    """Process matrices rho_CJ(t) with their sorted eigenvalue series."""

    times: np.ndarray
    choi_states: list[np.ndarray]
    eigenvalues: np.ndarray  # shape (n_times, d*d), ascending


@dataclass
class MomentSeries:
    """Second-moment series of the oscillator: <a^2>(t) and <a^dag a>(t)."""

    times: np.ndarray
    a_squared: np.ndarray      # complex
    occupation: np.ndarray     # real


class _Propagator:
    """Matrix exponentials of L*dt, cached per distinct time increment."""

    def __init__(self, matrix: np.ndarray):
        self.matrix = matrix
        self._cache: dict[float, np.ndarray] = {}

    def step(self, dt: float) -> np.ndarray:
        key = round(dt, 15)
        if key not in self._cache:
            self._cache[key] = expm(self.matrix * dt)
        return self._cache[key]


def _check_times(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0:
        raise ValidationError("times must be a nonempty 1-d sequence")
    if times[0] < 0 or np.any(np.diff(times) <= 0):
        raise ValidationError("times must increase from 0")
    return times


def propagate_matrix(liou: Liouvillian, mat0: np.ndarray, times) -> list[np.ndarray]:
    """Apply the semigroup to an arbitrary (not necessarily Hermitian) matrix."""
    times = _check_times(times)
    prop = _Propagator(liou.matrix)
    out = []
    v = vec(mat0)
    t_prev = 0.0
    for t in times:
        if t > t_prev:
            v = prop.step(t - t_prev) @ v
            t_prev = t
        out.append(unvec(v, liou.dimension))
    return out


def evolve(liou: Liouvillian, rho0: np.ndarray, times) -> Trajectory:
    """Integrate the master equation from a density matrix.

    The initial state must be Hermitian with unit trace and no eigenvalue
    below -1e-10.  Trace and Hermiticity are monitored along the way: the
    generator preserves both even in non-CP regimes, so a violation signals
    an integration failure, not physics.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    d = liou.dimension
    if rho0.shape != (d, d):
        raise ValidationError(f"initial state shape {rho0.shape}, expected {(d, d)}")
    if np.abs(rho0 - rho0.conj().T).max() > 1e-10:
        raise ValidationError("initial state must be Hermitian")
    if abs(np.trace(rho0) - 1.0) > 1e-10:
        raise ValidationError("initial state must have unit trace")
    if np.linalg.eigvalsh(rho0).min() < -1e-10:
        raise ValidationError("initial state must be positive semi-definite")

    times = _check_times(times)
    states = propagate_matrix(liou, rho0, times)
    for t, rho in zip(times, states):
        if np.abs(rho - rho.conj().T).max() > _HERM_TOL:
            raise IntegrationError(f"Hermiticity lost at t = {t}", t=float(t))
        if abs(np.trace(rho) - 1.0) > _TRACE_TOL:
            raise IntegrationError(f"trace drifted at t = {t}", t=float(t))
    return Trajectory(times=times, states=states)


def _sin_over(z: complex, t: float) -> complex:
    """sin(z t) / z, analytic through z = 0 (and imaginary z -> sinh)."""
    x = z * t
    if abs(x) < 1e-8:
        return t * (1.0 - x * x / 6.0)
    return cmath.sin(x) / z


def qubit_analytic(rates: DipoleRates, t: float) -> np.ndarray:
    """Closed-form qubit state at time t for the (|0> + |1>)/sqrt(2) start.

    Populations relax independently of the cross term; the coherence rotates
    at the shifted frequency sqrt(omega_bar^2 - |gamma_mp|^2), continued to a
    hyperbolic branch when the cross term dominates.
    """
    s = rates.rate_sum
    d = rates.rate_gap
    wbar = rates.omega_bar
    g = rates.gamma_mp
    w_dt = cmath.sqrt(complex(wbar * wbar - abs(g) ** 2))

    decay = math.exp(-0.5 * s * t)
    sin_t = _sin_over(w_dt, t)
    cos_t = cmath.cos(w_dt * t)
    re10 = 0.5 * decay * (g.real * sin_t + cos_t).real
    im10 = -0.5 * decay * ((g.imag + wbar) * sin_t).real
    p00 = (-d * math.exp(-s * t) + 2.0 * rates.gamma_pp) / (2.0 * s)

    rho10 = re10 + 1j * im10
    return np.array([[p00, np.conj(rho10)], [rho10, 1.0 - p00]], dtype=complex)


def choi_evolution(liou: Liouvillian, times) -> ChoiTrajectory:
    """Process matrices from evolving every operator-basis initial condition.

    Block (i, j) of the d^2 x d^2 process matrix is the evolved |i><j| over d;
    at t = 0 this is the maximally entangled projector.
    """
    d = liou.dimension
    times = _check_times(times)
    blocks = {}
    for i in range(d):
        for j in range(d):
            e_ij = np.zeros((d, d), dtype=complex)
            e_ij[i, j] = 1.0
            blocks[(i, j)] = propagate_matrix(liou, e_ij, times)

    choi_states = []
    eigenvalues = np.empty((len(times), d * d))
    for k in range(len(times)):
        full = np.zeros((d * d, d * d), dtype=complex)
        for (i, j), series in blocks.items():
            full[i * d:(i + 1) * d, j * d:(j + 1) * d] = series[k] / d
        choi_states.append(full)
        eigenvalues[k] = np.linalg.eigvalsh(full)
    return ChoiTrajectory(times=times, choi_states=choi_states,
                          eigenvalues=eigenvalues)


def choi_eigenvalue_analytic(rates: DipoleRates, t: float) -> float:
    """Closed form of the process eigenvalue that crosses zero at threshold.

    Vanishes at t = 0 with slope (s - sqrt(d^2 + 4 |gamma_mp|^2)) / 4, so its
    sign at short times flips exactly where |gamma_mp|^2 crosses
    gamma_mm * gamma_pp.
    """
    s = rates.rate_sum
    d = rates.rate_gap
    g2 = abs(rates.gamma_mp) ** 2
    w_dt = cmath.sqrt(complex(rates.omega_bar ** 2 - g2))

    if t == 0.0:
        return 0.0
    inner = (d * d * w_dt * w_dt * (math.cosh(s * t) - 1.0)
             - g2 * s * s * (cmath.cos(2.0 * w_dt * t) - 1.0))
    root = cmath.sqrt(inner)
    val = 0.25 * (1.0 - math.exp(-s * t)
                  - math.sqrt(2.0) / s * math.exp(-0.5 * s * t) * (root / w_dt).real)
    return float(val)


def qho_moments(rates: DipoleRates, a2_init: complex, n_init: float,
                times) -> MomentSeries:
    """Integrate the closed second-moment system of the oscillator.

    With z = <a^2> and m = <a^dag a>, h = eta_pm, g = gamma_pm:

        dz/dt = -2i (omega_bar z + 2 h m + h) - g - (gamma_pp - gamma_mm) z
        dm/dt =  2i (conj(h) z - h conj(z))       - (gamma_pp - gamma_mm) m
                 + gamma_mm

    which is linear in (Re z, Im z, m); the affine system is solved exactly
    with the exponential of the augmented 4x4 matrix.
    """
    times = _check_times(times)
    wbar = rates.omega_bar
    dg = rates.rate_gap
    h = rates.eta_pm
    g = rates.gamma_pm

    a = np.array([
        [-dg, 2.0 * wbar, 4.0 * h.imag],
        [-2.0 * wbar, -dg, -4.0 * h.real],
        [4.0 * h.imag, -4.0 * h.real, -dg],
    ])
    b = np.array([2.0 * h.imag - g.real, -2.0 * h.real - g.imag, rates.gamma_mm])
    aug = np.zeros((4, 4))
    aug[:3, :3] = a
    aug[:3, 3] = b

    v = np.array([np.real(a2_init), np.imag(a2_init), float(n_init), 1.0])
    cache: dict[float, np.ndarray] = {}
    a2 = np.empty(len(times), dtype=complex)
    occ = np.empty(len(times))
    t_prev = 0.0
    for k, t in enumerate(times):
        if t > t_prev:
            dt = round(t - t_prev, 15)
            if dt not in cache:
                cache[dt] = expm(aug * dt)
            v = cache[dt] @ v
            t_prev = t
        a2[k] = v[0] + 1j * v[1]
        occ[k] = v[2]
    return MomentSeries(times=times, a_squared=a2, occupation=occ)


def ladder_moments(states, ladder: np.ndarray):
    """Extract (<a^2>, <a^dag a>) series from density matrices."""
    a2_op = ladder @ ladder
    n_op = ladder.conj().T @ ladder
    a2 = np.array([np.trace(a2_op @ rho) for rho in states])
    occ = np.array([np.trace(n_op @ rho).real for rho in states])
    return a2, occ


def steady_state(liou: Liouvillian, kernel_tol: float = 1e-9) -> np.ndarray:
    """Unique stationary state as the generator's null vector.

    Dense SVD; the kernel must be one-dimensional at the given relative
    tolerance on singular values, otherwise the stationary state is not
    unique and an error carrying the kernel dimension is raised.
    """
    _, svals, vh = np.linalg.svd(liou.matrix)
    scale = max(svals[0], 1e-300)
    kernel_dim = int(np.sum(svals <= kernel_tol * scale))
    if kernel_dim != 1:
        raise NonUniqueSteadyStateError(
            f"generator kernel has dimension {kernel_dim}, expected 1",
            kernel_dim=kernel_dim,
        )
    rho = unvec(vh[-1].conj(), liou.dimension)
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho).real
    if abs(tr) < 1e-12:
        raise NonUniqueSteadyStateError(
            "kernel vector is traceless; no normalizable stationary state",
            kernel_dim=kernel_dim,
        )
    return rho / tr

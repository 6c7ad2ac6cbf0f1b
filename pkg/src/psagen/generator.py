"""Coarse-grained master-equation generators.

Given the gap eigenoperators A_i (collective index i = (alpha, w)) and the
half-Fourier matrices Omega(w), the generator at coarse-graining time dt is
assembled from

    gamma_ij = [Omega_ab(w') + conj(Omega_ba(w))] * S(w - w', dt)
    eta_ij   = [Omega_ab(w') - conj(Omega_ba(w))] / (2i) * S(w - w', dt)
    H_LS     = sum_ij eta_ij A_i A_j^dag

with S(x, dt) = sinc(x * dt / 2) the coarse-grain weight.  The equation of
motion is

    d rho / dt = -i [H + H_LS, rho]
                 + sum_ij gamma_ij (A_j^dag rho A_i - 1/2 {A_i A_j^dag, rho})

note the A_j^dag rho A_i index order: transposing it silently is the classic
sign mistake, and the commutator audits below pin the convention.

Linearization convention (fixed once, used everywhere): row-major stacking,
vec(rho)[i*d + j] = rho[i, j], so vec(A rho B) = kron(A, B.T) vec(rho).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bath import OmegaProvider
from .errors import ConfigurationError, NotCompletelyPositiveError, ValidationError
from .spectral import GapDecomposition, SystemSpec

__all__ = [
    "CoarseGrainedGenerator",
    "Liouvillian",
    "CommutatorAudit",
    "sinc_factor",
    "build_generator",
    "liouvillian",
    "hamiltonian_superop",
    "dissipator_superop",
    "dissipator_from_jumps",
    "lindblad_diagonal_form",
    "commutator_audit",
    "vec",
    "unvec",
]

SECULAR = math.inf   # dt sentinel: keep only equal-gap terms
REDFIELD = 0.0       # dt sentinel: keep every term at full weight


def sinc_factor(w: float, wp: float, delta_t: float) -> float:
    """Coarse-grain weight sinc((w - wp) * dt / 2).

    Equal gaps always give 1; dt = 0 gives 1 for every pair (Redfield limit);
    dt = inf gives the Kronecker delta (secular limit).
    """
    if delta_t < 0:
        raise ValidationError("delta_t must be >= 0")
    if w == wp:
        return 1.0
    if math.isinf(delta_t):
        return 0.0
    x = 0.5 * (w - wp) * delta_t
    return float(np.sinc(x / math.pi))


def vec(rho: np.ndarray) -> np.ndarray:
    """Row-major stacking of a matrix into a vector."""
    return np.asarray(rho, dtype=complex).reshape(-1)


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape(d, d)


def _left_right(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> a rho b in the row-stacking convention."""
    return np.kron(a, b.T)


def hamiltonian_superop(h: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> -i [h, rho]."""
    d = h.shape[0]
    eye = np.eye(d)
    return -1j * (_left_right(h, eye) - _left_right(eye, h))


@dataclass(frozen=True)
class CoarseGrainedGenerator:
    """Rate matrix gamma, Lamb-shift matrix eta and H_LS at a given dt.

    ``delta_t`` may be 0 (Redfield), finite, or math.inf (secular).  When the
    generator was built from an injected sinc value instead, ``delta_t`` is
    None and ``sinc_value`` holds the off-diagonal weight (two-gap models
    only, where a single weight covers every cross term).
    """

    delta_t: float | None
    sinc_value: float | None
    gamma: np.ndarray
    eta: np.ndarray
    lamb_shift: np.ndarray
    index_map: tuple[tuple[int, float], ...]

    @property
    def size(self) -> int:
        return len(self.index_map)

    def gamma_scale(self) -> float:
        return float(np.linalg.norm(self.gamma, 2))

    def lambda_min(self) -> float:
        return float(np.linalg.eigvalsh(self.gamma).min())


def _pair_weight(w: float, wp: float, delta_t, sinc_value) -> float:
    if w == wp:
        return 1.0
    if sinc_value is not None:
        return float(sinc_value)
    return sinc_factor(w, wp, delta_t)


def build_generator(
    gaps: GapDecomposition,
    omega: OmegaProvider,
    delta_t: float | None = None,
    sinc_value: float | None = None,
) -> CoarseGrainedGenerator:
    """Assemble gamma, eta and the Lamb shift for a coarse-graining time.

    Every gap in the decomposition must have an Omega entry (matched within
    the decomposition's gap tolerance).  Exactly one of ``delta_t`` and
    ``sinc_value`` must be given; the latter is only meaningful when all
    cross terms share one gap difference (at most two gaps).
    """
    if (delta_t is None) == (sinc_value is None):
        raise ValidationError("give exactly one of delta_t and sinc_value")
    if sinc_value is not None and len(gaps.gaps) > 2:
        raise ValidationError("sinc_value parameterization needs at most two gaps")

    omega_keys = sorted(omega.entries)

    def lookup(w: float) -> np.ndarray:
        hits = [k for k in omega_keys if abs(k - w) <= max(gaps.gap_tol, 1e-12 * abs(w))]
        if not hits:
            raise ConfigurationError(f"no Omega entry for gap {w}")
        return omega.entries[min(hits, key=lambda k: abs(k - w))]

    index_map = [
        (alpha, w)
        for w in gaps.gaps
        for alpha in range(gaps.n_channels)
        if (alpha, w) in gaps.eigenops
    ]
    n = len(index_map)
    gamma = np.zeros((n, n), dtype=complex)
    eta = np.zeros((n, n), dtype=complex)
    omega_mats = {w: lookup(w) for w in gaps.gaps}

    for i, (a, w) in enumerate(index_map):
        for j, (b, wp) in enumerate(index_map):
            s = _pair_weight(w, wp, delta_t, sinc_value)
            om_wp = omega_mats[wp][a, b]
            om_w_conj = np.conj(omega_mats[w][b, a])
            gamma[i, j] = (om_wp + om_w_conj) * s
            eta[i, j] = (om_wp - om_w_conj) / 2j * s

    d = next(iter(gaps.eigenops.values())).shape[0]
    h_ls = np.zeros((d, d), dtype=complex)
    for i, (a, w) in enumerate(index_map):
        ai = gaps.eigenops[(a, w)]
        for j, (b, wp) in enumerate(index_map):
            aj = gaps.eigenops[(b, wp)]
            h_ls += eta[i, j] * (ai @ aj.conj().T)

    return CoarseGrainedGenerator(
        delta_t=delta_t,
        sinc_value=sinc_value,
        gamma=gamma,
        eta=eta,
        lamb_shift=h_ls,
        index_map=tuple(index_map),
    )


@dataclass(frozen=True)
class Liouvillian:
    """Linearized generator acting on vec(rho) (row-major stacking)."""

    matrix: np.ndarray
    hamiltonian_part: np.ndarray
    dissipator_part: np.ndarray
    dimension: int

    def trace_defect(self) -> float:
        """Norm of the action of the adjoint generator on the identity.

        Trace preservation means vec(1)^T L = 0 in this linearization.
        """
        e = vec(np.eye(self.dimension))
        return float(np.abs(e @ self.matrix).max())

    def hermiticity_defect(self) -> float:
        """Norm of T conj(L) T - L with T the transpose permutation.

        Zero iff the generator maps Hermitian matrices to Hermitian ones.
        """
        d = self.dimension
        perm = np.arange(d * d).reshape(d, d).T.reshape(-1)
        swapped = self.matrix[np.ix_(perm, perm)].conj()
        return float(np.abs(swapped - self.matrix).max())


def dissipator_superop(gamma: np.ndarray, ops: list[np.ndarray]) -> np.ndarray:
    """Linearize sum_ij gamma_ij (A_j^dag rho A_i - 1/2 {A_i A_j^dag, rho})."""
    d = ops[0].shape[0]
    eye = np.eye(d)
    out = np.zeros((d * d, d * d), dtype=complex)
    for i, ai in enumerate(ops):
        for j, aj in enumerate(ops):
            g = gamma[i, j]
            if g == 0:
                continue
            ajd = aj.conj().T
            prod = ai @ ajd
            out += g * (
                _left_right(ajd, ai)
                - 0.5 * _left_right(prod, eye)
                - 0.5 * _left_right(eye, prod)
            )
    return out


def dissipator_from_jumps(rates, jump_ops) -> np.ndarray:
    """Linearize sum_k r_k (L_k rho L_k^dag - 1/2 {L_k^dag L_k, rho})."""
    d = jump_ops[0].shape[0]
    eye = np.eye(d)
    out = np.zeros((d * d, d * d), dtype=complex)
    for r, op in zip(rates, jump_ops):
        opd = op.conj().T
        prod = opd @ op
        out += r * (
            _left_right(op, opd)
            - 0.5 * _left_right(prod, eye)
            - 0.5 * _left_right(eye, prod)
        )
    return out


def liouvillian(spec: SystemSpec, gen: CoarseGrainedGenerator,
                gaps: GapDecomposition) -> Liouvillian:
    """Full linearized generator -i[H + H_LS, .] + dissipator."""
    d = spec.dimension
    if gen.lamb_shift.shape != (d, d):
        raise ValidationError("generator dimension does not match system")
    ops = [gaps.eigenops[key] for key in gen.index_map]
    ham = hamiltonian_superop(spec.hamiltonian + gen.lamb_shift)
    diss = dissipator_superop(gen.gamma, ops)
    return Liouvillian(matrix=ham + diss, hamiltonian_part=ham,
                       dissipator_part=diss, dimension=d)


def lindblad_diagonal_form(gen: CoarseGrainedGenerator, gaps: GapDecomposition,
                           psd_tol: float = 1e-10):
    """Diagonalize gamma = U diag(rates) U^dag into explicit jump operators.

    Returns (rates, jump_ops) with jump_ops[k] = (sum_i U[i, k] A_i)^dag, so
    the dissipator is sum_k rates[k] (L rho L^dag - 1/2 {L^dag L, rho}).
    Raises if gamma has an eigenvalue below -psd_tol * ||gamma||.
    """
    vals, u = np.linalg.eigh(gen.gamma)
    scale = max(float(np.abs(vals).max()), 1e-300)
    if vals[0] < -psd_tol * scale:
        raise NotCompletelyPositiveError(
            f"rate matrix has negative eigenvalue {vals[0]:.6e}",
            lambda_min=float(vals[0]),
        )
    ops = [gaps.eigenops[key] for key in gen.index_map]
    jump_ops = []
    for k in range(len(vals)):
        f_k = sum(u[i, k] * ops[i] for i in range(len(ops)))
        jump_ops.append(f_k.conj().T)
    return list(map(float, vals)), jump_ops


@dataclass(frozen=True)
class CommutatorAudit:
    """Spectral norms of the three commutators probed by the structure audit.

    ``hs_hls``: operator commutator [H, H_LS];
    ``full_vs_dissipator``: superoperator commutator of -i[H + H_LS, .] with
    the dissipator; ``bare_vs_dissipator``: same with -i[H, .] alone.
    """

    hs_hls: float
    full_vs_dissipator: float
    bare_vs_dissipator: float


def commutator_audit(spec: SystemSpec, gen: CoarseGrainedGenerator,
                     gaps: GapDecomposition,
                     interior_levels: int | None = None) -> CommutatorAudit:
    """Norms of the structural commutators, superoperators as d^2 matrices.

    ``interior_levels`` restricts the norms to basis states below that index.
    Truncated-ladder models need this: infinite-ladder identities (Lamb shift
    proportional to the number operator, commuting generator parts) break at
    the truncation edge by construction, and the defect sits entirely in the
    top levels.
    """
    liou = liouvillian(spec, gen, gaps)
    op_comm = spec.hamiltonian @ gen.lamb_shift - gen.lamb_shift @ spec.hamiltonian
    h_bare = hamiltonian_superop(spec.hamiltonian)
    d_part = liou.dissipator_part
    h_full = liou.hamiltonian_part
    comm_full = h_full @ d_part - d_part @ h_full
    comm_bare = h_bare @ d_part - d_part @ h_bare

    if interior_levels is not None:
        d = spec.dimension
        if not (0 < interior_levels <= d):
            raise ValidationError("interior_levels must lie in (0, dimension]")
        keep = np.array([i * d + j
                         for i in range(interior_levels)
                         for j in range(interior_levels)])
        op_comm = op_comm[:interior_levels, :interior_levels]
        comm_full = comm_full[np.ix_(keep, keep)]
        comm_bare = comm_bare[np.ix_(keep, keep)]

    return CommutatorAudit(
        hs_hls=float(np.linalg.norm(op_comm, 2)),
        full_vs_dissipator=float(np.linalg.norm(comm_full, 2)),
        bare_vs_dissipator=float(np.linalg.norm(comm_bare, 2)),
    )

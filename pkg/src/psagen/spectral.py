"""Spectral decomposition of the system Hamiltonian and gap eigenoperators.

A Hamiltonian H = sum_e e * P_e (distinct eigenvalues e, orthogonal projectors
P_e) splits every Hermitian coupling operator A into eigenoperators

    A(w) = sum_e P_{e+w} A P_e,        [H, A(w)] = w A(w),

one per distinguishable energy gap w = e1 - e2 (the zero gap included).  These
eigenoperators are the raw material for the coarse-grained generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

__all__ = [
    "SystemSpec",
    "SpectralDecomposition",
    "GapDecomposition",
    "eigendecompose",
    "gap_decompose",
]

# Max |A(w)| below this fraction of the coupling scale counts as a zero channel.
_PRUNE_REL = 1e-14


def _require_hermitian(mat: np.ndarray, name: str, rtol: float = 1e-12) -> np.ndarray:
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValidationError(f"{name} must be a square matrix, got shape {mat.shape}")
    scale = np.abs(mat).max()
    if scale == 0.0:
        return mat
    if np.abs(mat - mat.conj().T).max() > rtol * scale:
        raise ValidationError(f"{name} is not Hermitian within tolerance")
    return mat


@dataclass(frozen=True)
class SystemSpec:
    """System Hamiltonian plus the Hermitian coupling operators.

    Energies are in units with hbar = 1; ``couplings`` is an ordered sequence,
    its position is the channel index alpha.
    """

    dimension: int
    hamiltonian: np.ndarray
    couplings: tuple[np.ndarray, ...]

    def __post_init__(self):
        if self.dimension < 1:
            raise ValidationError("dimension must be a positive integer")
        h = _require_hermitian(self.hamiltonian, "hamiltonian")
        if h.shape != (self.dimension, self.dimension):
            raise ValidationError(
                f"hamiltonian shape {h.shape} does not match dimension {self.dimension}"
            )
        if len(self.couplings) == 0:
            raise ValidationError("at least one coupling operator is required")
        checked = []
        for k, a in enumerate(self.couplings):
            a = _require_hermitian(a, f"coupling[{k}]")
            if a.shape != h.shape:
                raise ValidationError(f"coupling[{k}] shape {a.shape} does not match system")
            if np.abs(a).max() == 0.0:
                raise ValidationError(f"coupling[{k}] is the zero matrix")
            checked.append(a)
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "couplings", tuple(checked))

    @property
    def n_channels(self) -> int:
        return len(self.couplings)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Distinct eigenvalues of H with their (possibly degenerate) projectors."""

    levels: tuple[tuple[float, np.ndarray], ...]
    degeneracy_tol: float

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([e for e, _ in self.levels])

    def reassemble(self) -> np.ndarray:
        """Return sum_e e * P_e."""
        d = self.levels[0][1].shape[0]
        out = np.zeros((d, d), dtype=complex)
        for e, p in self.levels:
            out += e * p
        return out


@dataclass(frozen=True)
class GapDecomposition:
    """Eigenoperators A(alpha, w) indexed by channel alpha and gap w.

    ``gaps`` is sorted ascending and contains only gaps with at least one
    surviving (non-pruned) channel; ``pairs_before_pruning`` records the raw
    count of (alpha, w) pairs, i.e. (number of distinguishable gaps) * M.
    """

    gaps: tuple[float, ...]
    eigenops: dict[tuple[int, float], np.ndarray]
    gap_tol: float
    n_channels: int
    pairs_before_pruning: int = field(default=0)

    def channel_sum(self, alpha: int) -> np.ndarray:
        """Return sum_w A(alpha, w) over the surviving gaps."""
        mats = [m for (a, _), m in self.eigenops.items() if a == alpha]
        return sum(mats)

    def operators_for(self, omega: float) -> dict[int, np.ndarray]:
        return {a: m for (a, w), m in self.eigenops.items() if w == omega}


def _cluster(values: np.ndarray, tol: float) -> list[np.ndarray]:
    """Group sorted values into chains whose consecutive spacing is <= tol.

    Returns index arrays into the sorted order.
    """
    order = np.argsort(values)
    sorted_vals = values[order]
    clusters = []
    start = 0
    for k in range(1, len(sorted_vals) + 1):
        if k == len(sorted_vals) or sorted_vals[k] - sorted_vals[k - 1] > tol:
            clusters.append(order[start:k])
            start = k
    return clusters


def eigendecompose(spec: SystemSpec, degeneracy_tol: float | None = None) -> SpectralDecomposition:
    """Diagonalize the system Hamiltonian into distinct levels.

    Eigenvalues closer than ``degeneracy_tol`` are merged into a single level
    whose projector is the sum of the corresponding rank-1 projectors.  The
    default tolerance is 1e-9 times the spectral range (1e-12 fallback for a
    fully degenerate spectrum).
    """
    evals, evecs = np.linalg.eigh(spec.hamiltonian)
    if degeneracy_tol is None:
        spread = float(evals[-1] - evals[0])
        degeneracy_tol = 1e-9 * spread if spread > 0 else 1e-12
    if degeneracy_tol <= 0:
        raise ValidationError("degeneracy_tol must be positive")

    levels = []
    for idx in _cluster(evals, degeneracy_tol):
        vecs = evecs[:, idx]
        proj = vecs @ vecs.conj().T
        levels.append((float(np.mean(evals[idx])), proj))
    return SpectralDecomposition(levels=tuple(levels), degeneracy_tol=degeneracy_tol)


def gap_decompose(
    sd: SpectralDecomposition,
    couplings,
    gap_tol: float | None = None,
) -> GapDecomposition:
    """Split each coupling into gap eigenoperators A(alpha, w).

    Gaps are all pairwise eigenvalue differences e1 - e2, merged within
    ``gap_tol`` (default 1e-9 times the spectral range).  Channels whose
    eigenoperator is numerically zero are pruned; a gap with no surviving
    channel is dropped.
    """
    couplings = [np.asarray(a, dtype=complex) for a in couplings]
    if len(couplings) == 0:
        raise ValidationError("couplings must be nonempty")
    evals = sd.eigenvalues
    if gap_tol is None:
        spread = float(evals.max() - evals.min())
        gap_tol = 1e-9 * spread if spread > 0 else 1e-12
    if gap_tol <= 0:
        raise ValidationError("gap_tol must be positive")

    n = len(sd.levels)
    diffs = np.array([evals[i] - evals[j] for i in range(n) for j in range(n)])
    pair_idx = [(i, j) for i in range(n) for j in range(n)]
    clusters = _cluster(diffs, gap_tol)

    scale = max(np.abs(a).max() for a in couplings)
    eigenops: dict[tuple[int, float], np.ndarray] = {}
    kept_gaps = []
    for idx in clusters:
        omega = float(np.mean(diffs[idx]))
        survivors = 0
        for alpha, a in enumerate(couplings):
            op = np.zeros_like(a)
            for k in idx:
                i, j = pair_idx[k]
                op += sd.levels[i][1] @ a @ sd.levels[j][1]
            if np.abs(op).max() >= _PRUNE_REL * scale:
                eigenops[(alpha, omega)] = op
                survivors += 1
        if survivors:
            kept_gaps.append(omega)

    return GapDecomposition(
        gaps=tuple(sorted(kept_gaps)),
        eigenops=eigenops,
        gap_tol=gap_tol,
        n_channels=len(couplings),
        pairs_before_pruning=len(clusters) * len(couplings),
    )

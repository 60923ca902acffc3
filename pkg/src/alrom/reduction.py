"""POD bases from snapshot matrices and DEIM interpolation operators.

POD modes are leading left singular vectors of the snapshot matrix; the
retained count either is fixed or is the smallest r whose relative
cumulative energy sum_{j<=r} s_j^2 / sum_j s_j^2 strictly exceeds
1 - kappa.  DEIM interpolation points come from the pivoted QR
factorization of the transposed mode matrix (Q-DEIM).
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la


@dataclass
class SnapshotSet:
    """Column-stacked samples of a vector quantity with their timestamps."""

    data: np.ndarray  # (N, K_s)
    times: np.ndarray  # (K_s,)
    label: str = ""

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        self.times = np.asarray(self.times, dtype=float)
        if self.data.ndim != 2 or self.data.shape[1] != self.times.size:
            raise ValueError("snapshot columns must match timestamp count")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("snapshots contain non-finite entries")


@dataclass
class PodBasis:
    """Orthonormal mode matrix with the full singular spectrum it came from."""

    modes: np.ndarray  # (N, N_r)
    singular_values: np.ndarray  # full spectrum, length min(N, K_s)
    retained: int
    captured_energy: float


@dataclass
class DeimOperator:
    """DEIM basis, selected site indices, and interpolator Psi = Phi (P^T Phi)^-1."""

    basis: np.ndarray  # (N, N_d)
    points: np.ndarray  # (N_d,) distinct site indices
    interpolator: np.ndarray  # (N, N_d)
    condition: float  # cond(P^T Phi)


def truncation_rank(singular_values: np.ndarray, tolerance: float) -> int:
    """Smallest r with cumulative relative energy > 1 - tolerance (strict)."""
    if not 0.0 < tolerance < 1.0:
        raise ValueError("tolerance must lie in (0, 1)")
    energies = np.cumsum(singular_values**2)
    total = energies[-1]
    return int(np.searchsorted(energies / total, 1.0 - tolerance, side="right") + 1)


def pod_basis(snapshots: SnapshotSet, tolerance: float | None = None,
              n_modes: int | None = None) -> PodBasis:
    """Truncated SVD of the snapshot matrix.

    Exactly one of `tolerance` (energy criterion) and `n_modes` (fixed
    rank) selects the truncation.
    """
    if (tolerance is None) == (n_modes is None):
        raise ValueError("specify exactly one of tolerance and n_modes")
    data = snapshots.data
    if not np.any(data):
        raise ValueError("snapshot matrix is zero")
    u, s, _ = la.svd(data, full_matrices=False)
    if n_modes is not None:
        if not 1 <= n_modes <= min(data.shape):
            raise ValueError(f"n_modes must lie in [1, {min(data.shape)}]")
        rank = n_modes
    else:
        rank = truncation_rank(s, tolerance)
    total = float(np.sum(s**2))
    captured = float(np.sum(s[:rank] ** 2) / total)
    return PodBasis(
        modes=u[:, :rank].copy(),
        singular_values=s,
        retained=rank,
        captured_energy=captured,
    )


def normalized_singular_values(basis: PodBasis) -> np.ndarray:
    """Spectrum scaled so the first entry is one."""
    s = basis.singular_values
    if s.size == 0 or s[0] == 0.0:
        raise ValueError("empty or zero leading singular value")
    return s / s[0]


def qdeim_points(phi: np.ndarray) -> np.ndarray:
    """Interpolation site indices from the pivoted QR of phi^T (Q-DEIM).

    Returns the first N_d column pivots; raises on rank deficiency
    (vanishing R diagonal), naming the offending mode index.
    """
    phi = np.asarray(phi, dtype=float)
    n_d = phi.shape[1]
    _, r, piv = la.qr(phi.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    small = diag <= max(phi.shape) * np.finfo(float).eps * (diag[0] if diag.size else 1.0)
    if np.any(small):
        raise ValueError(
            f"DEIM basis is rank deficient at mode {int(np.argmax(small))}"
        )
    return piv[:n_d].copy()


def deim_operator(phi: np.ndarray, points: np.ndarray) -> DeimOperator:
    """Build Psi = Phi (P^T Phi)^-1 for the given sampling points."""
    phi = np.asarray(phi, dtype=float)
    points = np.asarray(points, dtype=int)
    if len(np.unique(points)) != points.size:
        raise ValueError("sampling points must be distinct")
    sampled = phi[points, :]
    cond = float(np.linalg.cond(sampled))
    if not np.isfinite(cond):
        raise ValueError("P^T Phi is singular")
    interpolator = la.solve(sampled.T, phi.T).T
    return DeimOperator(
        basis=phi, points=points, interpolator=interpolator, condition=cond
    )

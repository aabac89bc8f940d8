"""Sample covariance, Hermitian eigendecomposition and subspace splitting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PreconditionError
from .scene import SnapshotMatrix

HERMITIAN_TOL = 1e-10


def sample_covariance(snapshots):
    """``(1/L) * sum_t y(t) y(t)^H``, symmetrized to be exactly Hermitian."""
    y = snapshots.data if isinstance(snapshots, SnapshotMatrix) else np.asarray(snapshots)
    if y.ndim == 1:
        y = y[:, None]
    if y.ndim != 2 or y.shape[1] == 0 or y.shape[0] == 0:
        raise DomainError("sample_covariance needs a non-empty M x L snapshot matrix")
    r = (y @ y.conj().T) / y.shape[1]
    return 0.5 * (r + r.conj().T)


def eig_hermitian(r, tol=HERMITIAN_TOL):
    """Eigenvalues (descending) and orthonormal eigenvectors of a Hermitian matrix.

    Raises :class:`DomainError` when ``r`` deviates from Hermitian by more than
    ``tol`` relative to its Frobenius norm.
    """
    r = np.asarray(r)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {r.shape}")
    scale = max(np.linalg.norm(r), 1.0)
    if np.linalg.norm(r - r.conj().T) > tol * scale:
        raise DomainError("matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh(0.5 * (r + r.conj().T))
    return w[::-1].copy(), v[:, ::-1].copy()


@dataclass(frozen=True)
class SubspaceDecomposition:
    eigenvalues: np.ndarray
    """All ``M`` eigenvalues, descending."""
    eigenvectors: np.ndarray = field(repr=False)
    num_signal: int
    noise_variance: float
    """Mean of the ``M - K`` smallest eigenvalues (0 when ``K = M``)."""

    @property
    def signal_basis(self):
        return self.eigenvectors[:, : self.num_signal]

    @property
    def noise_basis(self):
        return self.eigenvectors[:, self.num_signal:]

    @property
    def num_antennas(self):
        return self.eigenvectors.shape[0]


def split_subspaces(r, num_sources):
    """Split the eigenbasis of ``r`` into ``K`` signal and ``M - K`` noise vectors."""
    w, v = eig_hermitian(r)
    m = w.size
    if int(num_sources) != num_sources or not 1 <= num_sources <= m:
        raise PreconditionError(f"number of sources must lie in 1..{m}, got {num_sources}")
    k = int(num_sources)
    sigma2 = float(np.mean(w[k:])) if k < m else 0.0
    return SubspaceDecomposition(eigenvalues=w, eigenvectors=v, num_signal=k,
                                 noise_variance=sigma2)


def detect_num_sources(eigenvalues, threshold=2.0):
    """Estimate the source count from a descending eigenvalue sequence.

    The noise floor is the median of the smallest ``ceil(M/4)`` eigenvalues.
    The estimate is the largest ``k`` such that eigenvalue ``k`` exceeds
    ``threshold`` times the floor *and* exceeds eigenvalue ``k+1`` by the same
    factor (an eigenvalue gap).  Requiring the gap keeps the spread of the
    sample noise eigenvalues, which can reach an order of magnitude when ``L``
    is comparable to ``M``, from being counted as sources.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if not threshold > 1:
        raise DomainError(f"threshold must exceed 1, got {threshold}")
    if lam.size == 0:
        return 0
    if np.any(np.diff(lam) > 1e-12 * max(abs(lam[0]), 1.0)):
        raise DomainError("eigenvalues must be sorted in descending order")
    m = lam.size
    floor = float(np.median(lam[m - math.ceil(m / 4):]))
    tiny = np.finfo(float).tiny
    count = 0
    for k in range(m - 1):
        above_floor = lam[k] > threshold * floor
        gap = lam[k] > threshold * max(lam[k + 1], tiny)
        if above_floor and gap:
            count = k + 1
    return count

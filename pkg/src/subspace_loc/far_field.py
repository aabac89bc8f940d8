"""Far-field DoA estimation: MUSIC, ESPRIT and generalized ESPRIT."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError, PreconditionError, SingularityError
from .scene import SnapshotMatrix
from .spectrum import SpectrumTrace, angle_grid, reciprocal_spectrum, trace_1d
from .subspace import SubspaceDecomposition, sample_covariance, split_subspaces

DEFAULT_GRID_SIZE = 100_000
_COND_LIMIT = 1e12


def _check_grid(grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("angle grid must be a non-empty 1D array")
    if np.any(np.abs(grid) > np.pi / 2 + 1e-12):
        raise DomainError("angle grid must lie within [-pi/2, pi/2]")
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise DomainError("angle grid must be strictly increasing")
    return grid


def noise_projection(subspace, offsets, lin, quad):
    """``a^H U_n U_n^H a`` for probes described by ``(lin, quad)`` phase slopes.

    ``subspace`` is a :class:`SubspaceDecomposition` or a raw noise basis.  With
    a decomposition the smaller of the signal/noise bases is used, relying on
    ``U_n U_n^H = I - U_s U_s^H``.
    """
    if isinstance(subspace, SubspaceDecomposition):
        if subspace.num_signal >= subspace.num_antennas:
            raise PreconditionError("MUSIC needs a non-empty noise subspace (K < M)")
        if subspace.num_signal < subspace.num_antennas - subspace.num_signal:
            return _kernels.projection_energy(subspace.signal_basis, offsets, lin, quad,
                                              complement=True)
        basis = subspace.noise_basis
    else:
        basis = np.asarray(subspace)
        if basis.ndim != 2 or basis.shape[1] == 0:
            raise PreconditionError("MUSIC needs a non-empty noise subspace (K < M)")
    if basis.shape[0] != len(offsets):
        raise DomainError(f"noise basis has {basis.shape[0]} rows, array has {len(offsets)} antennas")
    return _kernels.projection_energy(basis, offsets, lin, quad)


def _peak_count(subspace, num_peaks):
    if num_peaks is not None:
        return int(num_peaks)
    if isinstance(subspace, SubspaceDecomposition):
        return subspace.num_signal
    basis = np.asarray(subspace)
    return basis.shape[0] - basis.shape[1]


def music_spectrum(subspace, geom, grid=None, num_peaks=None) -> SpectrumTrace:
    """1D MUSIC pseudo-spectrum ``1 / (a^H U_n U_n^H a)`` with its ``K`` highest peaks."""
    grid = _check_grid(angle_grid(DEFAULT_GRID_SIZE) if grid is None else grid)
    lin = geom.linear_phase(grid)
    denom = noise_projection(subspace, geom.offsets, lin, np.zeros_like(lin))
    values, exact_null = reciprocal_spectrum(denom)
    return trace_1d(grid, values, _peak_count(subspace, num_peaks), exact_null)


def _signal_basis(source, num_sources):
    if isinstance(source, SubspaceDecomposition):
        k = source.num_signal if num_sources is None else int(num_sources)
        if not 1 <= k <= source.num_antennas:
            raise PreconditionError(f"number of sources must lie in 1..{source.num_antennas}")
        return source.eigenvectors[:, :k]
    if isinstance(source, SnapshotMatrix):
        source = sample_covariance(source)
    if num_sources is None:
        raise PreconditionError("number of sources is required with a raw covariance")
    return split_subspaces(source, num_sources).signal_basis


def _spacing_warning(geom, limit, who):
    if geom.spacing > limit * geom.wavelength * (1 + 1e-12):
        warnings.warn(f"{who}: spacing {geom.spacing / geom.wavelength:.3g} lambda exceeds "
                      f"{limit} lambda, angle estimates may alias", stacklevel=3)


def esprit(source, geom, num_sources=None):
    """Least-squares ESPRIT DoA estimates (radians, ascending).

    ``source`` may be a covariance matrix, a :class:`SnapshotMatrix` or a
    :class:`SubspaceDecomposition`.
    """
    _spacing_warning(geom, 0.5, "esprit")
    us = _signal_basis(source, num_sources)
    us1, us2 = us[:-1], us[1:]
    gram = us1.conj().T @ us1
    if us1.shape[0] < us1.shape[1] or np.linalg.cond(gram) > _COND_LIMIT:
        raise SingularityError("first subarray signal basis is rank deficient")
    phi = np.linalg.solve(gram, us1.conj().T @ us2)
    mu = np.linalg.eigvals(phi)
    s = np.angle(mu) * geom.wavelength / (2.0 * np.pi * geom.spacing)
    if np.any(np.abs(s) > 1.0):
        warnings.warn("esprit: |sin(theta)| > 1 from an eigenvalue phase; clamped to +-1",
                      stacklevel=2)
        s = np.clip(s, -1.0, 1.0)
    return np.sort(np.arcsin(s))


@dataclass(frozen=True)
class GenEspritGeometry:
    """Pairing of two equally sized subarrays of a ULA.

    ``first`` and ``second`` hold 0-based antenna rows; pair ``n`` is
    displaced by ``spacing * (second[n] - first[n])``.
    """

    first: tuple
    second: tuple
    spacing: float

    def __post_init__(self):
        object.__setattr__(self, "first", tuple(int(i) for i in self.first))
        object.__setattr__(self, "second", tuple(int(i) for i in self.second))
        if len(self.first) != len(self.second) or not self.first:
            raise DomainError("subarrays must be non-empty and of equal size")

    @classmethod
    def shifted(cls, num_antennas, spacing, shift=1):
        """Rows ``0..M-1-shift`` paired with rows ``shift..M-1``."""
        if not 1 <= shift < num_antennas:
            raise DomainError(f"shift must lie in 1..{num_antennas - 1}")
        return cls(range(num_antennas - shift), range(shift, num_antennas), spacing)

    @classmethod
    def halves(cls, num_antennas, spacing):
        """The first half of an even-sized array paired with the second half."""
        if num_antennas % 2:
            raise DomainError("halves() needs an even antenna count")
        n = num_antennas // 2
        return cls(range(n), range(n, num_antennas), spacing)

    @property
    def size(self):
        return len(self.first)

    @property
    def displacements(self):
        return self.spacing * (np.array(self.second) - np.array(self.first))

    def check(self, num_antennas):
        for idx in (self.first, self.second):
            if min(idx) < 0 or max(idx) >= num_antennas:
                raise DomainError(f"subarray rows must lie in 0..{num_antennas - 1}")


def determinant_spectrum(u1, u2, coeffs, x, grid, weight=None, num_peaks=None):
    """Shared rank-drop spectrum ``1 / |det(W^H F)|`` over ``grid``."""
    j, k = u1.shape
    if k > j:
        raise PreconditionError(f"{k} sources exceed the subarray size {j}")
    if weight is not None:
        weight = np.asarray(weight, dtype=complex)
        if weight.shape != (j, k):
            raise DomainError(f"W^H F must be square: W has shape {weight.shape}, F has {(j, k)}")
    det = _kernels.det_spectrum(u1, u2, coeffs, x, weight)
    values, exact_null = reciprocal_spectrum(det)
    return trace_1d(grid, values, k if num_peaks is None else int(num_peaks), exact_null)


def generalized_esprit_spectrum(source, geom, pairing=None, grid=None, weight=None,
                                num_sources=None) -> SpectrumTrace:
    """Generalized ESPRIT spectrum ``1 / |det(W^H (U_s2 - Psi(theta) U_s1))|``.

    ``pairing`` defaults to the unit-shift pairing of standard ESPRIT;
    ``weight=None`` sets ``W = F(theta)``.
    """
    us = _signal_basis(source, num_sources)
    m = us.shape[0]
    pairing = GenEspritGeometry.shifted(m, geom.spacing) if pairing is None else pairing
    pairing.check(m)
    grid = _check_grid(angle_grid(DEFAULT_GRID_SIZE) if grid is None else grid)
    u1 = us[list(pairing.first)]
    u2 = us[list(pairing.second)]
    x = 2.0 * np.pi * np.sin(grid) / geom.wavelength
    return determinant_spectrum(u1, u2, pairing.displacements, x, grid, weight)

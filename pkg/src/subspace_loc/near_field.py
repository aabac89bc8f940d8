"""Near-field localization: 2D MUSIC and the symmetry-based DoA estimators.

The symmetry-based estimators need a center-referenced array with
``M = 2N + 1`` antennas.  On such an array the anti-diagonal of the
covariance, ``R[n, 2N-n]`` (0-based), loses every range-dependent term and
behaves like a virtual ULA with twice the spacing:
``ybar[n] = sum_k p_k exp(2j * (n - N) * gamma_k)``.

Subvector ``i`` (0-based) of ``ybar`` covers entries ``i .. i + 2N+1-J``.
Its ``j``-th entry carries the phase ``2 * (i + j - N) * gamma``, i.e. the
subvectors factor as ``B p_i`` with ``b(gamma)[j] = exp(2j * (j - N) * gamma)``
and the ``i``-dependent part folded into ``p_i``.  Any common phase on ``b``
leaves the MUSIC spectrum unchanged, so this matches the usual
``exp(-2j*gamma*(N+1)) .. exp(-2j*gamma*(J-N))`` form up to that constant.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .array_model import Reference, field_bounds
from .errors import DomainError, PreconditionError
from .far_field import _check_grid, _signal_basis, determinant_spectrum, noise_projection
from .scene import SnapshotMatrix
from .spectrum import angle_grid, inverse_range_grid, reciprocal_spectrum, trace_1d, trace_2d
from .subspace import SubspaceDecomposition, sample_covariance, split_subspaces

DEFAULT_ANGLE_POINTS = 2000
DEFAULT_RANGE_POINTS = 200
DEFAULT_MAX_COHERENCE = 0.5


def default_range_grid(geom, size=DEFAULT_RANGE_POINTS, aperture=None):
    """Ranges between the single-antenna and array Fraunhofer distances, uniform in ``1/r``."""
    bounds = field_bounds(geom, aperture)
    return inverse_range_grid(size, bounds.single_antenna, bounds.array)


def _check_ranges(ranges):
    ranges = np.asarray(ranges, dtype=float)
    if ranges.ndim != 1 or ranges.size == 0:
        raise DomainError("range grid must be a non-empty 1D array")
    if np.any(~(ranges > 0)):
        raise DomainError("range grid must be positive")
    return ranges


def _noise_subspace(source, num_sources):
    if isinstance(source, SubspaceDecomposition):
        return source
    if isinstance(source, SnapshotMatrix):
        source = sample_covariance(source)
    return split_subspaces(source, num_sources)


def music_2d(subspace, geom, angles=None, ranges=None, num_peaks=None, aperture=None,
             max_coherence=DEFAULT_MAX_COHERENCE):
    """2D MUSIC over an angle x range grid with near-field steering.

    Returns a 2D :class:`SpectrumTrace` whose ``values[i, j]`` belongs to
    ``(angles[i], ranges[j])``.  Around each source the spectrum is a narrow
    tilted ridge that a grid samples as several local maxima; a candidate is
    therefore dropped when its steering vector has normalized coherence above
    ``max_coherence`` with an already selected peak.  ``max_coherence=None``
    keeps every local maximum.
    """
    angles = _check_grid(angle_grid(DEFAULT_ANGLE_POINTS) if angles is None else angles)
    ranges = _check_ranges(default_range_grid(geom, aperture=aperture) if ranges is None else ranges)
    th, rr = np.meshgrid(angles, ranges, indexing="ij")
    lin = geom.linear_phase(th)
    quad = geom.curvature_phase(th, rr)
    denom = noise_projection(subspace, geom.offsets, lin.ravel(), quad.ravel())
    values, exact_null = reciprocal_spectrum(denom.reshape(th.shape))
    k = num_peaks
    if k is None:
        k = subspace.num_signal if isinstance(subspace, SubspaceDecomposition) else (
            np.shape(subspace)[0] - np.shape(subspace)[1])
    masks = None
    if max_coherence is not None:
        o = geom.offsets.astype(float)
        m = o.size

        def masks(chosen, cand):
            ph_a = o * lin[chosen] + o**2 * quad[chosen]
            ph_b = o * lin[cand] + o**2 * quad[cand]
            return abs(np.exp(1j * (ph_b - ph_a)).sum()) / m > max_coherence

    return trace_2d(angles, ranges, values, int(k), exact_null, masks)


def range_spectrum(angle, subspace, geom, ranges):
    """MUSIC spectrum along ``ranges`` at a fixed angle."""
    ranges = _check_ranges(ranges)
    th = np.full(ranges.shape, float(angle))
    denom = noise_projection(subspace, geom.offsets, geom.linear_phase(th),
                             geom.curvature_phase(th, ranges))
    return reciprocal_spectrum(denom)[0]


def estimate_ranges(angles, subspace, geom, ranges=None, aperture=None):
    """Range of each estimated DoA via a 1D MUSIC search; returns ``[(theta, r), ...]``."""
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    if angles.size == 0:
        raise DomainError("need at least one DoA estimate")
    ranges = _check_ranges(default_range_grid(geom, aperture=aperture) if ranges is None else ranges)
    out = []
    for theta in angles:
        values = range_spectrum(theta, subspace, geom, ranges)
        out.append((float(theta), float(ranges[int(np.argmax(values))])))
    return out


def _require_symmetric(geom, who):
    if geom.reference is not Reference.CENTER:
        raise PreconditionError(f"{who} needs a center-referenced array with an odd antenna count")


@dataclass(frozen=True)
class AntiDiagonalVector:
    values: np.ndarray = field(repr=False)
    """``ybar``, length ``2N + 1``."""
    noise_variance: float
    """Variance subtracted from the center entry."""

    @property
    def half_count(self):
        return (self.values.size - 1) // 2

    def subvectors(self, num_subvectors):
        """``J x (2N+2-J)`` array; row ``i`` is the ``i``-th overlapping window."""
        size = self.values.size
        j = int(num_subvectors)
        if not 1 <= j <= size:
            raise PreconditionError(f"number of subvectors must lie in 1..{size}")
        width = size + 1 - j
        return np.lib.stride_tricks.sliding_window_view(self.values, width)[:j].copy()

    def reduced_covariance(self, num_subvectors):
        """``(1/J) * sum_i ybar_i ybar_i^H``."""
        y = self.subvectors(num_subvectors)
        r = y.T @ y.conj() / y.shape[0]
        return 0.5 * (r + r.conj().T)


def build_antidiagonal(r, noise_variance):
    """Anti-diagonal ``R[n, 2N-n]`` with ``noise_variance`` removed at the center."""
    r = np.asarray(r)
    m = r.shape[0]
    if r.ndim != 2 or r.shape[1] != m:
        raise DomainError("expected a square covariance matrix")
    if m % 2 == 0:
        raise PreconditionError(f"the anti-diagonal construction needs an odd antenna count, got {m}")
    y = np.fliplr(r).diagonal().copy()
    y[m // 2] -= noise_variance
    return AntiDiagonalVector(values=y, noise_variance=float(noise_variance))


def check_modified_music(geom, num_sources, num_subvectors):
    """Raise :class:`PreconditionError` if modified MUSIC cannot resolve the setup."""
    _require_symmetric(geom, "modified MUSIC")
    n = geom.half_count
    k, j = int(num_sources), int(num_subvectors)
    if geom.spacing > geom.wavelength / 4 * (1 + 1e-12):
        raise PreconditionError(
            f"modified MUSIC needs spacing <= lambda/4 to keep the doubled phase unambiguous, "
            f"got {geom.spacing / geom.wavelength:.4g} lambda")
    if k < 1:
        raise PreconditionError("need at least one source")
    if k >= n + 1:
        raise PreconditionError(
            f"modified MUSIC resolves at most N = (M-1)/2 = {n} sources, got K = {k}")
    problems = []
    if not k < 2 * n + 2 - j:
        problems.append(f"K < 2N+2-J fails ({k} >= {2 * n + 2 - j}): steering matrix B loses rank")
    if not j > k:
        problems.append(f"J > K fails ({j} <= {k}): subvector power matrix loses rank")
    if problems:
        raise PreconditionError("modified MUSIC resolvability: " + "; ".join(problems))


def modified_music_spectrum(ybar, geom, num_sources, num_subvectors, grid=None):
    """Range-free DoA spectrum from the anti-diagonal subvector covariance."""
    check_modified_music(geom, num_sources, num_subvectors)
    if ybar.values.size != geom.num_antennas:
        raise DomainError("anti-diagonal length does not match the array")
    grid = _check_grid(angle_grid(DEFAULT_ANGLE_POINTS) if grid is None else grid)
    reduced = split_subspaces(ybar.reduced_covariance(num_subvectors), num_sources)
    n = geom.half_count
    width = 2 * n + 2 - int(num_subvectors)
    offsets = 2.0 * (np.arange(width) - n)
    lin = geom.linear_phase(grid)
    denom = noise_projection(reduced, offsets, lin, np.zeros_like(lin))
    values, exact_null = reciprocal_spectrum(denom)
    return trace_1d(grid, values, int(num_sources), exact_null)


def modified_music_doa(source, geom, num_sources, num_subvectors, grid=None, noise_variance=None):
    """DoA estimates (ascending) from modified MUSIC.

    ``source`` is a covariance matrix, snapshots, or an :class:`AntiDiagonalVector`.
    Without an explicit ``noise_variance`` the mean of the ``M - K`` smallest
    covariance eigenvalues is used for the center correction.
    """
    trace = modified_music_trace(source, geom, num_sources, num_subvectors, grid, noise_variance)
    return np.sort(trace.peak_angles)


def modified_music_trace(source, geom, num_sources, num_subvectors, grid=None, noise_variance=None):
    check_modified_music(geom, num_sources, num_subvectors)
    if isinstance(source, AntiDiagonalVector):
        ybar = source
    else:
        r = sample_covariance(source) if isinstance(source, SnapshotMatrix) else np.asarray(source)
        if noise_variance is None:
            noise_variance = split_subspaces(r, num_sources).noise_variance
        ybar = build_antidiagonal(r, noise_variance)
    return modified_music_spectrum(ybar, geom, num_sources, num_subvectors, grid)


def check_gen_esprit_nf(geom, num_sources, num_subvectors):
    _require_symmetric(geom, "near-field generalized ESPRIT")
    m, k, j = geom.num_antennas, int(num_sources), int(num_subvectors)
    if not j < m:
        raise PreconditionError(f"subarray size J must be below M = {m}, got {j}")
    if not 1 <= k <= j:
        raise PreconditionError(f"near-field generalized ESPRIT needs 1 <= K <= J, got K={k}, J={j}")
    n = geom.half_count
    if k > n:
        # rows n and 2N-n pair the same antennas swapped and row N pairs the
        # center with itself, so F(theta) never has rank above N
        warnings.warn(f"F(theta) has rank at most N = {n} for every angle; "
                      f"K = {k} sources give a degenerate spectrum", UserWarning, stacklevel=3)


def gen_esprit_nf_spectrum(source, geom, num_sources, num_subvectors, grid=None, weight=None):
    """Rank-drop spectrum of the mirrored-subarray (near-field) generalized ESPRIT.

    Subarray one is the first ``J`` antennas in ascending order, subarray two
    the last ``J`` in descending order; pair ``n`` (0-based) has the phase ratio
    ``exp(4j*pi*d*sin(theta)*(N-n)/lambda)`` independently of range.
    """
    check_gen_esprit_nf(geom, num_sources, num_subvectors)
    us = _signal_basis(source, num_sources)
    m, j = geom.num_antennas, int(num_subvectors)
    if us.shape[0] != m:
        raise DomainError("signal basis does not match the array")
    u1 = us[:j]
    u2 = us[m - j:][::-1]
    coeffs = 2.0 * geom.spacing * (geom.half_count - np.arange(j))
    grid = _check_grid(angle_grid(DEFAULT_ANGLE_POINTS) if grid is None else grid)
    x = 2.0 * np.pi * np.sin(grid) / geom.wavelength
    return determinant_spectrum(u1, u2, coeffs, x, grid, weight)


def gen_esprit_nf_doa(source, geom, num_sources, num_subvectors, grid=None, weight=None):
    """DoA estimates (ascending) from near-field generalized ESPRIT."""
    trace = gen_esprit_nf_spectrum(source, geom, num_sources, num_subvectors, grid, weight)
    return np.sort(trace.peak_angles)

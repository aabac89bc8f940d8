"""Pseudo-spectrum containers and grid peak extraction."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DomainError

MIN_DENOMINATOR = 1e-30
MAX_VALUE = 1.0 / MIN_DENOMINATOR


class Peak(NamedTuple):
    location: float | tuple[float, float]
    """Angle for 1D spectra, ``(angle, range)`` for 2D ones."""
    value: float
    index: int | tuple[int, int]


@dataclass(frozen=True)
class PeakSearch:
    indices: list
    under_resolved: bool
    """Fewer local maxima than requested."""
    boundary: bool
    """At least one returned peak sits on the grid edge."""


@dataclass(frozen=True)
class SpectrumTrace:
    """A pseudo-spectrum on a 1D angle grid or a 2D angle x range grid."""

    angles: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    peaks: list
    ranges: np.ndarray | None = field(default=None, repr=False)
    under_resolved: bool = False
    boundary_peak: bool = False
    exact_null: bool = False
    """Some denominator fell below ``MIN_DENOMINATOR`` and was clamped."""

    @property
    def is_2d(self):
        return self.ranges is not None

    @property
    def peak_angles(self):
        if self.is_2d:
            return np.array([p.location[0] for p in self.peaks])
        return np.array([p.location for p in self.peaks])

    @property
    def peak_ranges(self):
        if not self.is_2d:
            raise AttributeError("a 1D spectrum has no range axis")
        return np.array([p.location[1] for p in self.peaks])

    def normalized(self):
        return normalize_spectrum(self.values)


def reciprocal_spectrum(denominators):
    """``1 / denominator`` with tiny or negative denominators clamped.

    Returns ``(values, exact_null)``.
    """
    denominators = np.asarray(denominators, dtype=float)
    exact_null = bool(np.any(denominators < MIN_DENOMINATOR))
    return 1.0 / np.maximum(denominators, MIN_DENOMINATOR), exact_null


def _rank(values, candidates):
    # descending value, ties toward the smaller index
    order = np.lexsort((candidates, -values[candidates]))
    return candidates[order]


def find_peaks(values, k):
    """The ``k`` largest strict local maxima of a 1D sequence.

    Interior points must exceed both neighbors; the two end points qualify
    when they exceed their single neighbor.  Equal values rank toward the
    smaller index.
    """
    if k < 1:
        raise DomainError(f"number of peaks must be >= 1, got {k}")
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise DomainError("find_peaks expects a non-empty 1D array")
    n = v.size
    if n == 1:
        mask = np.array([True])
    else:
        mask = np.zeros(n, dtype=bool)
        mask[1:-1] = (v[1:-1] > v[:-2]) & (v[1:-1] > v[2:])
        mask[0] = v[0] > v[1]
        mask[-1] = v[-1] > v[-2]
    chosen = _rank(v, np.flatnonzero(mask))[:k]
    edges = (0, n - 1)
    return PeakSearch(
        indices=[int(i) for i in chosen],
        under_resolved=chosen.size < k,
        boundary=any(int(i) in edges for i in chosen),
    )


def find_peaks_2d(values, k, masks=None):
    """The ``k`` largest local maxima of a 2D array over 4-neighborhoods.

    A cell must be strictly greater than its upper and left neighbors and at
    least as large as its lower and right ones, so a plateau reports only its
    lexicographically smallest cell.  Cells outside the array do not count.

    ``masks(chosen, candidate)``, when given, is called with two index tuples
    and returns True if the already chosen peak shadows the candidate; such
    candidates are skipped in the descending-value scan.
    """
    if k < 1:
        raise DomainError(f"number of peaks must be >= 1, got {k}")
    v = np.asarray(values, dtype=float)
    if v.ndim != 2 or v.size == 0:
        raise DomainError("find_peaks_2d expects a non-empty 2D array")
    pad = np.pad(v, 1, constant_values=-np.inf)
    c = pad[1:-1, 1:-1]
    mask = (
        (c > pad[:-2, 1:-1]) & (c > pad[1:-1, :-2])
        & (c >= pad[2:, 1:-1]) & (c >= pad[1:-1, 2:])
    )
    flat = v.ravel()
    ranked = _rank(flat, np.flatnonzero(mask.ravel()))
    rows, cols = np.unravel_index(ranked, v.shape)
    idx = []
    for r, q in zip(rows, cols):
        cand = (int(r), int(q))
        if masks is not None and any(masks(prev, cand) for prev in idx):
            continue
        idx.append(cand)
        if len(idx) == k:
            break
    boundary = any(r in (0, v.shape[0] - 1) or q in (0, v.shape[1] - 1) for r, q in idx)
    return PeakSearch(indices=idx, under_resolved=len(idx) < k, boundary=boundary)


def normalize_spectrum(values):
    """Scale so the maximum is 1; peak locations are unchanged."""
    v = np.asarray(values, dtype=float)
    top = np.max(v) if v.size else 0.0
    if not top > 0:
        raise DomainError("cannot normalize a spectrum without a positive value")
    return v / top


def trace_1d(angles, values, k, exact_null=False):
    search = find_peaks(values, k)
    peaks = [Peak(float(angles[i]), float(values[i]), i) for i in search.indices]
    return SpectrumTrace(angles=angles, values=values, peaks=peaks,
                         under_resolved=search.under_resolved,
                         boundary_peak=search.boundary, exact_null=exact_null)


def trace_2d(angles, ranges, values, k, exact_null=False, masks=None):
    search = find_peaks_2d(values, k, masks)
    peaks = [Peak((float(angles[i]), float(ranges[j])), float(values[i, j]), (i, j))
             for i, j in search.indices]
    return SpectrumTrace(angles=angles, values=values, peaks=peaks, ranges=ranges,
                         under_resolved=search.under_resolved,
                         boundary_peak=search.boundary, exact_null=exact_null)


def angle_grid(size, low=-np.pi / 2, high=np.pi / 2):
    """``size`` uniformly spaced angles including both end points."""
    if size < 2:
        raise DomainError("an angle grid needs at least two points")
    return np.linspace(low, high, int(size))


def inverse_range_grid(size, r_min, r_max):
    """``size`` ranges in ``[r_min, r_max]`` uniformly spaced in ``1/r``, ascending."""
    if size < 1:
        raise DomainError("a range grid needs at least one point")
    if not 0 < r_min <= r_max:
        raise DomainError("range grid needs 0 < r_min <= r_max")
    if size == 1:
        return np.array([float(r_min)])
    inv = np.linspace(1.0 / r_max, 1.0 / r_min, int(size))
    r = 1.0 / inv[::-1]
    r[0], r[-1] = r_min, r_max
    return r

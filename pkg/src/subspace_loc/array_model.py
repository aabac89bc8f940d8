"""Uniform linear array geometry and array-response (steering) vectors.

Two indexing conventions are supported:

* ``Reference.FIRST`` -- antennas at offsets ``0, 1, ..., M-1`` (times the
  spacing); the first antenna is the phase reference.
* ``Reference.CENTER`` -- ``M = 2N + 1`` antennas at offsets ``-N, ..., N``;
  the center antenna is the phase reference.  Required by the symmetry-based
  near-field estimators.

Angles are measured from broadside in radians.  A positive angle advances
the phase toward higher antenna offsets, so the far-field response of the
antenna at offset ``m`` is ``exp(1j * m * gamma)`` with
``gamma = 2*pi*d/lambda * sin(theta)``.  The near-field (Fresnel) response
adds the curvature term ``m**2 * phi`` with
``phi = -pi * d**2 * cos(theta)**2 / (lambda * r)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PreconditionError

_ANGLE_SLACK = 1e-12


class Reference(str, enum.Enum):
    FIRST = "first"
    CENTER = "center"


@dataclass(frozen=True)
class UlaGeometry:
    """A uniform linear array.

    Parameters
    ----------
    num_antennas : int
        Number of antennas ``M`` (at least 2).
    spacing : float
        Inter-antenna spacing ``d`` in meters.
    wavelength : float
        Carrier wavelength in meters.
    reference : Reference
        Indexing convention; ``CENTER`` requires an odd antenna count.
    """

    num_antennas: int
    spacing: float
    wavelength: float
    reference: Reference = Reference.FIRST

    def __post_init__(self):
        object.__setattr__(self, "reference", Reference(self.reference))
        if int(self.num_antennas) != self.num_antennas or self.num_antennas < 2:
            raise DomainError(f"num_antennas must be an integer >= 2, got {self.num_antennas}")
        object.__setattr__(self, "num_antennas", int(self.num_antennas))
        if not self.spacing > 0:
            raise DomainError(f"spacing must be positive, got {self.spacing}")
        if not self.wavelength > 0:
            raise DomainError(f"wavelength must be positive, got {self.wavelength}")
        if self.reference is Reference.CENTER and self.num_antennas % 2 == 0:
            raise DomainError(
                f"a center-referenced array needs an odd antenna count, got {self.num_antennas}"
            )

    @classmethod
    def with_spacing_ratio(cls, num_antennas, spacing_ratio=0.5, wavelength=1.0,
                           reference=Reference.FIRST):
        """Build a geometry with ``d = spacing_ratio * wavelength``."""
        return cls(num_antennas, spacing_ratio * wavelength, wavelength, reference)

    @property
    def half_count(self):
        """``N`` such that ``M = 2N + 1`` (only meaningful for odd ``M``)."""
        return (self.num_antennas - 1) // 2

    @property
    def offsets(self):
        """Integer antenna offsets relative to the reference antenna."""
        if self.reference is Reference.CENTER:
            n = self.half_count
            return np.arange(-n, n + 1)
        return np.arange(self.num_antennas)

    @property
    def reference_row(self):
        """Row index of the reference antenna in steering vectors."""
        return self.half_count if self.reference is Reference.CENTER else 0

    def linear_phase(self, theta):
        """``gamma = 2*pi*d/lambda * sin(theta)``."""
        return 2.0 * np.pi * self.spacing / self.wavelength * np.sin(theta)

    def curvature_phase(self, theta, r):
        """``phi = -pi * d**2 * cos(theta)**2 / (lambda * r)``; zero for ``r = inf``."""
        theta = np.asarray(theta, dtype=float)
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            inv_r = np.where(np.isinf(r), 0.0, 1.0 / r)
        return -np.pi * self.spacing**2 * np.cos(theta) ** 2 / self.wavelength * inv_r


@dataclass(frozen=True)
class FieldBounds:
    single_antenna: float
    """Fraunhofer distance of one antenna, ``2 D**2 / lambda``."""
    array: float
    """Fraunhofer distance of the whole array, ``2 W**2 / lambda``."""
    aperture: float
    array_aperture: float
    array_approx: float
    """The shortcut ``M**2 / 2 * d_F`` for cross-checking ``array``."""


def _check_angles(theta):
    theta = np.asarray(theta, dtype=float)
    if np.any(np.abs(theta) > np.pi / 2 + _ANGLE_SLACK) or not np.all(np.isfinite(theta)):
        raise DomainError("angles must lie in [-pi/2, pi/2]")
    return theta


def _check_ranges(r):
    r = np.asarray(r, dtype=float)
    if np.any(~(r > 0)):
        raise DomainError("ranges must be positive")
    return r


def steering_phases(geom, theta, r=np.inf):
    """Per-antenna phases of the (Fresnel) response, shape ``(M,) + broadcast(theta, r).shape``."""
    theta = _check_angles(theta)
    r = _check_ranges(r)
    gamma = geom.linear_phase(theta)
    phi = geom.curvature_phase(theta, r)
    gamma, phi = np.broadcast_arrays(gamma, phi)
    m = geom.offsets.astype(float).reshape((-1,) + (1,) * gamma.ndim)
    return m * gamma + m**2 * phi


def steering(geom, theta, r=np.inf):
    """Array response for either reference convention; ``r = inf`` is far field.

    Scalar inputs give a length-``M`` vector, array inputs give one column per
    (broadcast) ``(theta, r)`` pair.
    """
    return np.exp(1j * steering_phases(geom, theta, r))


def steering_far(geom, theta):
    """Far-field response ``exp(1j * (m-1) * gamma)`` of a first-antenna-referenced ULA."""
    if geom.reference is not Reference.FIRST:
        raise PreconditionError("steering_far expects a first-antenna-referenced array; "
                                "use steering_near(..., r=inf) for center-referenced arrays")
    return steering(geom, theta)


def steering_near(geom, theta, r):
    """Second-order (Fresnel) near-field response in the geometry's own convention."""
    return steering(geom, theta, r)


def steering_matrix(geom, thetas, ranges=None):
    """Columns ``a(theta_k, r_k)``; ``ranges=None`` (or ``inf`` entries) means far field."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    if ranges is None:
        ranges = np.full(thetas.shape, np.inf)
    ranges = np.atleast_1d(np.asarray(ranges, dtype=float))
    if ranges.shape != thetas.shape:
        raise DomainError("thetas and ranges must have matching lengths")
    return steering(geom, thetas, ranges)


def exact_distance(geom, theta, r, m):
    """Law-of-cosines distance from a source at ``(theta, r)`` to antenna ``m``.

    ``m`` is 1-based (``1..M``) for first-antenna-referenced arrays and a
    signed offset (``-N..N``) for center-referenced arrays; ``r`` is measured
    from the reference antenna.
    """
    _check_angles(theta)
    _check_ranges(r)
    if geom.reference is Reference.CENTER:
        if abs(m) > geom.half_count:
            raise DomainError(f"antenna offset {m} outside -{geom.half_count}..{geom.half_count}")
        offset = m
    else:
        if not 1 <= m <= geom.num_antennas:
            raise DomainError(f"antenna index {m} outside 1..{geom.num_antennas}")
        offset = m - 1
    delta = offset * geom.spacing
    return np.sqrt(r**2 + delta**2 - 2.0 * r * delta * np.sin(theta))


def exact_phases(geom, theta, r):
    """Response phases from exact distances, ``-2*pi/lambda * (r_m - r)``."""
    if geom.reference is Reference.CENTER:
        idx = geom.offsets
    else:
        idx = geom.offsets + 1
    dist = np.array([exact_distance(geom, theta, r, int(m)) for m in idx])
    return -2.0 * np.pi / geom.wavelength * (dist - r)


def fraunhofer_bounds(num_antennas, spacing, wavelength, aperture):
    """Fraunhofer distances for ``num_antennas`` elements of size ``aperture``.

    A single antenna (``num_antennas == 1``) is allowed here; its array
    distance collapses to the single-antenna one.
    """
    if not aperture > 0:
        raise DomainError(f"antenna aperture must be positive, got {aperture}")
    if num_antennas < 1:
        raise DomainError("need at least one antenna")
    array_aperture = (num_antennas - 1) * spacing + aperture
    d_f = 2.0 * aperture**2 / wavelength
    d_fa = 2.0 * array_aperture**2 / wavelength
    return FieldBounds(
        single_antenna=d_f,
        array=d_fa,
        aperture=aperture,
        array_aperture=array_aperture,
        array_approx=num_antennas**2 / 2.0 * d_f,
    )


def field_bounds(geom, aperture=None):
    """Fraunhofer bounds of ``geom``; the antenna aperture defaults to ``d / 2``."""
    if aperture is None:
        aperture = geom.spacing / 2.0
    return fraunhofer_bounds(geom.num_antennas, geom.spacing, geom.wavelength, aperture)

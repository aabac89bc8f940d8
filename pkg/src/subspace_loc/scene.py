"""Snapshot synthesis for far- and near-field source scenes.

Each snapshot is ``y(t) = A diag(exp(1j*psi)) s(t) + n(t)``.  Source symbols
are zero-mean circular complex Gaussian with covariance ``S`` whose diagonal
holds the source powers and whose off-diagonal entries are
``rho * sqrt(p_i * p_j)``; noise is white with variance ``sigma2``.

Random numbers come from :func:`numpy.random.default_rng` (PCG64) seeded with
the scene seed.  Draw order is fixed: phase offsets (only when not given),
then source symbols, then noise.  The real and imaginary parts of every
complex normal are independent standard normals scaled by ``1/sqrt(2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .array_model import UlaGeometry, steering_matrix
from .errors import ConfigError, DomainError


@dataclass(frozen=True)
class Source:
    """One source: DoA in radians, range in meters (``inf`` = far field)."""

    angle: float
    range: float = math.inf
    power: float = 1.0
    phase: float | None = None
    """Phase offset ``psi`` on the reference antenna; ``None`` draws it."""

    @property
    def far_field(self):
        return math.isinf(self.range)


@dataclass(frozen=True)
class SourceScene:
    sources: tuple[Source, ...]
    noise_variance: float = 1.0
    correlation: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        if not self.sources:
            raise DomainError("a scene needs at least one source")
        for src in self.sources:
            if abs(src.angle) > np.pi / 2 + 1e-12:
                raise DomainError(f"source angle {src.angle} outside [-pi/2, pi/2]")
            if not src.power > 0:
                raise DomainError(f"source power must be positive, got {src.power}")
            if not src.range > 0:
                raise DomainError(f"source range must be positive, got {src.range}")
        if not self.noise_variance > 0:
            raise DomainError(f"noise variance must be positive, got {self.noise_variance}")
        if not 0.0 <= self.correlation < 1.0:
            raise DomainError(f"correlation must lie in [0, 1), got {self.correlation}")
        sines = np.sort(np.sin(self.angles))
        if np.any(np.diff(sines) <= 1e-12):
            raise DomainError("source angles must have distinct sines")

    @property
    def num_sources(self):
        return len(self.sources)

    @property
    def angles(self):
        return np.array([s.angle for s in self.sources])

    @property
    def ranges(self):
        return np.array([s.range for s in self.sources])

    @property
    def powers(self):
        return np.array([s.power for s in self.sources])

    def with_seed(self, seed):
        return SourceScene(self.sources, self.noise_variance, self.correlation, seed)


@dataclass(frozen=True)
class SnapshotMatrix:
    data: np.ndarray = field(repr=False)
    """``M x L`` complex samples."""
    seed: int
    phases: np.ndarray = field(repr=False)
    """The phase offsets ``psi`` actually used."""
    symbols: np.ndarray = field(repr=False)
    """``K x L`` source symbols ``s(t)`` before the phase offsets."""

    @property
    def num_snapshots(self):
        return self.data.shape[1]

    @property
    def num_antennas(self):
        return self.data.shape[0]


def source_covariance(scene):
    """``S`` with ``p_k`` on the diagonal and ``rho * sqrt(p_i p_j)`` elsewhere."""
    sq = np.sqrt(scene.powers)
    k = scene.num_sources
    corr = np.full((k, k), scene.correlation, dtype=float)
    np.fill_diagonal(corr, 1.0)
    return (sq[:, None] * corr * sq[None, :]).astype(complex)


def _scene_steering(scene, geom, model):
    if model not in ("auto", "far", "near"):
        raise ConfigError(f"unknown steering model {model!r}", "model")
    ranges = scene.ranges
    if model == "far":
        if not np.all(np.isinf(ranges)):
            raise ConfigError("scene has near-field sources but far-field steering was requested",
                              "model")
    elif model == "near" and np.any(np.isinf(ranges)):
        raise ConfigError("near-field steering requested for a far-field source", "model")
    return steering_matrix(geom, scene.angles, ranges)


def _draw_phases(scene, rng):
    given = [s.phase for s in scene.sources]
    if all(p is not None for p in given):
        return np.array(given, dtype=float)
    drawn = rng.uniform(0.0, 2.0 * np.pi, size=scene.num_sources)
    return np.array([d if p is None else p for p, d in zip(given, drawn)])


def scene_phases(scene):
    """The phase offsets ``psi`` that :func:`synthesize` uses for this scene."""
    return _draw_phases(scene, np.random.default_rng(scene.seed))


def theoretical_covariance(scene, geom, model="auto"):
    """Exact ``R = A Psi S Psi^H A^H + sigma2 I`` with ``Psi = diag(exp(1j*psi))``.

    The phase offsets cancel unless sources are correlated; when they matter
    the seeded draws of :func:`synthesize` are reproduced.
    """
    a = _scene_steering(scene, geom, model) * np.exp(1j * scene_phases(scene))[None, :]
    r = a @ source_covariance(scene) @ a.conj().T
    r = 0.5 * (r + r.conj().T)
    r += scene.noise_variance * np.eye(geom.num_antennas)
    return r


def _complex_normal(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def synthesize(scene: SourceScene, geom: UlaGeometry, num_snapshots: int,
               model="auto", noiseless=False) -> SnapshotMatrix:
    """Draw ``num_snapshots`` seeded snapshots of ``scene`` on ``geom``.

    ``model`` selects the steering family: ``"auto"`` uses the near-field
    response for finite ranges and the far-field one otherwise; ``"far"`` and
    ``"near"`` insist on one family and raise :class:`ConfigError` on a
    mismatch.  ``noiseless=True`` skips the noise draw.
    """
    if int(num_snapshots) != num_snapshots or num_snapshots < 1:
        raise DomainError(f"need at least one snapshot, got {num_snapshots}")
    num_snapshots = int(num_snapshots)
    a = _scene_steering(scene, geom, model)
    rng = np.random.default_rng(scene.seed)
    k = scene.num_sources

    psi = _draw_phases(scene, rng)

    chol = np.linalg.cholesky(source_covariance(scene))
    symbols = chol @ _complex_normal(rng, (k, num_snapshots))
    y = a @ (np.exp(1j * psi)[:, None] * symbols)
    if not noiseless:
        y += np.sqrt(scene.noise_variance) * _complex_normal(rng, (geom.num_antennas, num_snapshots))
    return SnapshotMatrix(data=y, seed=scene.seed, phases=psi, symbols=symbols)

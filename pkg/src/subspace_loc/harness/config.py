"""Scenario configuration: YAML files parsed into validated dataclasses.

Layout (every block optional unless noted)::

    name: table1
    runtime: fast                # informational runtime class
    geometry:
      num_antennas: 50           # required
      spacing: 0.5               # in wavelengths
      wavelength: 1.0
      reference: first           # or center
      aperture: 0.25             # antenna size in wavelengths, default spacing/2
    scene:
      sources:                   # required
        - {angle: -pi/4}         # far field
        - {angle: pi/6, range: 30, power: 1.0, phase: 0}
      noise_variance: 1.0
      correlation: 0.0
      phases: random             # or zero
    estimators:                  # required, one or more
      - name: music
        grid: 100000
    num_sources: 4               # or auto
    threshold: 2.0               # eigenvalue detector factor for auto
    run:
      snapshots: 100
      seeds: 20                  # count (0..n-1) or an explicit list
      resolution_tol: 0.005
      spectrum: true

Angles are radians or strings such as ``"pi/6"``, ``"-pi/100"`` or
``"3*pi/4"``.  Ranges are multiples of the single-antenna Fraunhofer
distance, or ``far``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..array_model import Reference, UlaGeometry, field_bounds
from ..errors import ConfigError, SubspaceLocError
from ..scene import Source, SourceScene

ESTIMATORS = ("music", "esprit", "gen-esprit", "music2d", "modified-music", "gen-esprit-nf")
SYMMETRIC = ("modified-music", "gen-esprit-nf")

_PI_RE = re.compile(
    r"^\s*([+-])?\s*(\d+(?:\.\d*)?)?\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$", re.IGNORECASE)


def parse_angle(value, where="angle"):
    """Radians from a number or a ``"k*pi/n"`` string."""
    if isinstance(value, bool):
        raise ConfigError(f"expected an angle, got {value!r}", where)
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        m = _PI_RE.match(value)
        if m:
            sign = -1.0 if m.group(1) == "-" else 1.0
            num = float(m.group(2)) if m.group(2) else 1.0
            den = float(m.group(3)) if m.group(3) else 1.0
            if den == 0:
                raise ConfigError("division by zero in angle", where)
            return sign * num * math.pi / den
        try:
            return float(value)
        except ValueError:
            pass
    raise ConfigError(f"cannot parse angle {value!r}", where)


def _take(block, key, where, default=None, required=False):
    if key in block:
        return block[key]
    if required:
        raise ConfigError("missing required entry", f"{where}.{key}" if where else key)
    return default


def _check_keys(block, allowed, where):
    if not isinstance(block, dict):
        raise ConfigError("expected a mapping", where or "<root>")
    extra = sorted(set(block) - set(allowed))
    if extra:
        name = f"{where}.{extra[0]}" if where else extra[0]
        raise ConfigError("unknown entry", name)


def _number(value, where, kind=float, low=None, strict=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", where)
    if kind is int and int(value) != value:
        raise ConfigError(f"expected an integer, got {value!r}", where)
    value = kind(value)
    if low is not None and (value <= low if strict else value < low):
        raise ConfigError(f"must be {'>' if strict else '>='} {low}, got {value}", where)
    return value


@dataclass(frozen=True)
class GeometryConfig:
    num_antennas: int
    spacing: float = 0.5
    wavelength: float = 1.0
    reference: Reference = Reference.FIRST
    aperture: float | None = None

    def build(self):
        return UlaGeometry(self.num_antennas, self.spacing * self.wavelength, self.wavelength,
                           self.reference)

    def bounds(self):
        ap = None if self.aperture is None else self.aperture * self.wavelength
        return field_bounds(self.build(), ap)


@dataclass(frozen=True)
class SourceConfig:
    angle: float
    range: float | None = None
    """Multiples of the single-antenna Fraunhofer distance; ``None`` is far field."""
    power: float = 1.0
    phase: float | None = None


@dataclass(frozen=True)
class SceneConfig:
    sources: tuple[SourceConfig, ...]
    noise_variance: float = 1.0
    correlation: float = 0.0
    phases: str = "random"


@dataclass(frozen=True)
class EstimatorConfig:
    name: str
    grid: int = 2000
    """Angle grid points."""
    range_grid: int = 200
    subvectors: int | None = None
    """``J``: subvector count (modified MUSIC) or subarray size (gen-esprit-nf)."""
    max_coherence: float | None = 0.5
    """Peak suppression for music2d; ``None`` keeps every local maximum."""
    spectrum_stride: tuple[int, int] = (1, 1)
    """Decimation of the angle / range axes in ``spectrum.csv``."""


@dataclass(frozen=True)
class RunConfig:
    snapshots: int = 100
    seeds: tuple[int, ...] = tuple(range(20))
    resolution_tol: float = 5e-3
    spectrum: bool = True


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    geometry: GeometryConfig
    scene: SceneConfig
    estimators: tuple[EstimatorConfig, ...]
    num_sources: int | str = "auto"
    threshold: float = 2.0
    run: RunConfig = field(default_factory=RunConfig)
    runtime: str = "fast"
    description: str = ""

    @property
    def near_field(self):
        return any(s.range is not None for s in self.scene.sources)

    def true_angles(self):
        return [s.angle for s in self.scene.sources]

    def true_ranges(self):
        """Ranges in meters, ``inf`` for far-field sources."""
        d_f = self.geometry.bounds().single_antenna
        return [math.inf if s.range is None else s.range * d_f for s in self.scene.sources]

    def build_scene(self, seed):
        ranges = self.true_ranges()
        sources = []
        for s, r in zip(self.scene.sources, ranges):
            phase = s.phase
            if phase is None and self.scene.phases == "zero":
                phase = 0.0
            sources.append(Source(s.angle, r, s.power, phase))
        try:
            return SourceScene(sources, self.scene.noise_variance, self.scene.correlation, int(seed))
        except SubspaceLocError as exc:
            raise ConfigError(str(exc), "scene") from exc

    def with_seeds(self, seeds):
        run = RunConfig(self.run.snapshots, tuple(int(s) for s in seeds),
                        self.run.resolution_tol, self.run.spectrum)
        return ScenarioConfig(self.name, self.geometry, self.scene, self.estimators,
                              self.num_sources, self.threshold, run, self.runtime,
                              self.description)


def _parse_geometry(block):
    where = "geometry"
    _check_keys(block, ("num_antennas", "spacing", "wavelength", "reference", "aperture"), where)
    m = _number(_take(block, "num_antennas", where, required=True), f"{where}.num_antennas", int, 2)
    spacing = _number(_take(block, "spacing", where, 0.5), f"{where}.spacing", low=0, strict=True)
    wl = _number(_take(block, "wavelength", where, 1.0), f"{where}.wavelength", low=0, strict=True)
    ref = _take(block, "reference", where, "first")
    try:
        ref = Reference(str(ref).lower())
    except ValueError:
        raise ConfigError(f"expected 'first' or 'center', got {ref!r}", f"{where}.reference") from None
    if ref is Reference.CENTER and m % 2 == 0:
        raise ConfigError("a center-referenced array needs an odd antenna count",
                          f"{where}.num_antennas")
    aperture = _take(block, "aperture", where)
    if aperture is not None:
        aperture = _number(aperture, f"{where}.aperture", low=0, strict=True)
    return GeometryConfig(m, spacing, wl, ref, aperture)


def _parse_source(block, where):
    if not isinstance(block, dict):
        block = {"angle": block}
    _check_keys(block, ("angle", "range", "power", "phase"), where)
    angle = parse_angle(_take(block, "angle", where, required=True), f"{where}.angle")
    if abs(angle) > math.pi / 2 + 1e-12:
        raise ConfigError("angle must lie within [-pi/2, pi/2]", f"{where}.angle")
    rng = _take(block, "range", where)
    if isinstance(rng, str) and rng.lower() in ("far", "farfield", "far-field", "inf"):
        rng = None
    if rng is not None:
        rng = _number(rng, f"{where}.range", low=0, strict=True)
    power = _number(_take(block, "power", where, 1.0), f"{where}.power", low=0, strict=True)
    phase = _take(block, "phase", where)
    if phase is not None:
        phase = parse_angle(phase, f"{where}.phase")
    return SourceConfig(angle, rng, power, phase)


def _parse_scene(block):
    where = "scene"
    _check_keys(block, ("sources", "noise_variance", "correlation", "phases"), where)
    raw = _take(block, "sources", where, required=True)
    if not isinstance(raw, list) or not raw:
        raise ConfigError("need a non-empty list of sources", f"{where}.sources")
    sources = tuple(_parse_source(s, f"{where}.sources[{i}]") for i, s in enumerate(raw))
    sigma2 = _number(_take(block, "noise_variance", where, 1.0), f"{where}.noise_variance",
                     low=0, strict=True)
    rho = _number(_take(block, "correlation", where, 0.0), f"{where}.correlation", low=0)
    if rho >= 1:
        raise ConfigError("must be below 1 (coherent sources are not supported)",
                          f"{where}.correlation")
    phases = str(_take(block, "phases", where, "random")).lower()
    if phases not in ("random", "zero"):
        raise ConfigError(f"expected 'random' or 'zero', got {phases!r}", f"{where}.phases")
    return SceneConfig(sources, sigma2, rho, phases)


def _parse_estimator(block, where):
    if isinstance(block, str):
        block = {"name": block}
    _check_keys(block, ("name", "grid", "range_grid", "subvectors", "max_coherence",
                        "spectrum_stride"), where)
    name = str(_take(block, "name", where, required=True)).lower()
    if name not in ESTIMATORS:
        raise ConfigError(f"unknown estimator {name!r}; choose from {', '.join(ESTIMATORS)}",
                          f"{where}.name")
    default_grid = 100_000 if name in ("music", "gen-esprit") else 2000
    grid = _number(_take(block, "grid", where, default_grid), f"{where}.grid", int, 2)
    range_grid = _number(_take(block, "range_grid", where, 200), f"{where}.range_grid", int, 1)
    j = _take(block, "subvectors", where)
    if j is not None:
        j = _number(j, f"{where}.subvectors", int, 1)
    elif name in SYMMETRIC:
        raise ConfigError(f"{name} needs the subvector count J", f"{where}.subvectors")
    coh = _take(block, "max_coherence", where, 0.5)
    if coh is not None:
        coh = _number(coh, f"{where}.max_coherence", low=0)
        if coh > 1:
            raise ConfigError("must lie in [0, 1]", f"{where}.max_coherence")
    stride = _take(block, "spectrum_stride", where, [1, 1])
    if isinstance(stride, int):
        stride = [stride, stride]
    if not isinstance(stride, list) or len(stride) != 2:
        raise ConfigError("expected [angle_stride, range_stride]", f"{where}.spectrum_stride")
    stride = tuple(_number(s, f"{where}.spectrum_stride", int, 1) for s in stride)
    return EstimatorConfig(name, grid, range_grid, j, coh, stride)


def _parse_run(block):
    where = "run"
    _check_keys(block, ("snapshots", "seeds", "resolution_tol", "spectrum"), where)
    snapshots = _number(_take(block, "snapshots", where, 100), f"{where}.snapshots", int, 1)
    seeds = _take(block, "seeds", where, 20)
    if isinstance(seeds, list):
        if not seeds:
            raise ConfigError("seed list is empty", f"{where}.seeds")
        seeds = tuple(_number(s, f"{where}.seeds", int, 0) for s in seeds)
    else:
        seeds = tuple(range(_number(seeds, f"{where}.seeds", int, 1)))
    tol = _number(_take(block, "resolution_tol", where, 5e-3), f"{where}.resolution_tol",
                  low=0, strict=True)
    spectrum = _take(block, "spectrum", where, True)
    if not isinstance(spectrum, bool):
        raise ConfigError("expected true or false", f"{where}.spectrum")
    return RunConfig(snapshots, seeds, tol, spectrum)


def _check_compatibility(cfg):
    geom = cfg.geometry
    for i, est in enumerate(cfg.estimators):
        where = f"estimators[{i}]"
        if est.name in SYMMETRIC:
            if geom.reference is not Reference.CENTER:
                raise ConfigError(f"{est.name} needs reference: center", "geometry.reference")
            if est.subvectors >= geom.num_antennas:
                raise ConfigError(f"J must be below M = {geom.num_antennas}", f"{where}.subvectors")
        if est.name == "modified-music" and geom.spacing > 0.25 * (1 + 1e-12):
            raise ConfigError("modified-music needs spacing <= 0.25 wavelengths",
                              "geometry.spacing")
        if est.name == "music2d" and not cfg.near_field:
            raise ConfigError("music2d needs sources with finite ranges", "scene.sources")
    if isinstance(cfg.num_sources, int) and cfg.num_sources >= geom.num_antennas:
        raise ConfigError(f"must be below M = {geom.num_antennas}", "num_sources")


def parse_config(data, name=None):
    """Validate a parsed YAML mapping into a :class:`ScenarioConfig`."""
    _check_keys(data, ("name", "description", "runtime", "geometry", "scene", "estimators",
                       "num_sources", "threshold", "run"), "")
    geometry = _parse_geometry(_take(data, "geometry", "", required=True))
    scene = _parse_scene(_take(data, "scene", "", required=True))
    raw = _take(data, "estimators", "", required=True)
    if isinstance(raw, (str, dict)):
        raw = [raw]
    if not isinstance(raw, list) or not raw:
        raise ConfigError("need at least one estimator", "estimators")
    estimators = tuple(_parse_estimator(e, f"estimators[{i}]") for i, e in enumerate(raw))
    names = [e.name for e in estimators]
    if len(set(names)) != len(names):
        raise ConfigError("each estimator may appear once", "estimators")
    k = _take(data, "num_sources", "", "auto")
    if not (isinstance(k, str) and k.lower() == "auto"):
        k = _number(k, "num_sources", int, 1)
    else:
        k = "auto"
    threshold = _number(_take(data, "threshold", "", 2.0), "threshold", low=1, strict=True)
    run = _parse_run(_take(data, "run", "", {}) or {})
    runtime = str(_take(data, "runtime", "", "fast"))
    cfg = ScenarioConfig(
        name=str(_take(data, "name", "", name or "scenario")),
        geometry=geometry, scene=scene, estimators=estimators, num_sources=k,
        threshold=threshold, run=run, runtime=runtime,
        description=str(_take(data, "description", "", "")),
    )
    _check_compatibility(cfg)
    return cfg


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from exc
    return loads_config(text, name=path.stem)


def loads_config(text, name=None):
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {exc}") from exc
    if data is None:
        raise ConfigError("config is empty")
    return parse_config(data, name)

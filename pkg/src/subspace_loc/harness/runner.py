"""Monte Carlo execution of a scenario and its output files.

``report.json`` and ``estimates.json`` depend only on the config and seeds, so
repeated runs are byte-identical.  Wall-clock time is kept on the returned
:class:`RunReport` and written to ``timing.json`` instead.
"""

from __future__ import annotations

import dataclasses
import json
import math
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..far_field import esprit, generalized_esprit_spectrum, music_spectrum
from ..near_field import estimate_ranges, gen_esprit_nf_spectrum, modified_music_trace, music_2d
from ..scene import synthesize
from ..spectrum import angle_grid, inverse_range_grid
from ..subspace import detect_num_sources, eig_hermitian, sample_covariance, split_subspaces
from .scoring import match_and_score, rmse

SCHEMA_VERSION = 1
_RANGE_ESTIMATORS = ("modified-music", "gen-esprit-nf")


@dataclass(frozen=True)
class SeedResult:
    seed: int
    num_sources: int
    angles: list
    ranges: list | None
    angle_errors: list
    range_errors: list
    misses: int
    false_alarms: int
    resolved: int
    """Truths matched by an estimate within the resolution tolerance."""
    under_resolved: bool
    warnings: list = field(default_factory=list)


@dataclass
class EstimatorReport:
    name: str
    per_seed: list = field(default_factory=list)

    def aggregate(self, num_truths):
        n = len(self.per_seed)
        ang = [e for s in self.per_seed for e in s.angle_errors]
        rng = [e for s in self.per_seed for e in s.range_errors]
        per_source_mean, per_source_max = [], []
        for t in range(num_truths):
            vals = [s.angle_errors[t] for s in self.per_seed if s.angle_errors[t] is not None]
            per_source_mean.append(float(np.mean(vals)) if vals else None)
            per_source_max.append(float(np.max(vals)) if vals else None)
        under = sum(s.under_resolved for s in self.per_seed)
        finite_ang = [e for e in ang if e is not None]
        finite_rng = [e for e in rng if e is not None]
        return {
            "seeds": n,
            "angle_rmse": rmse(ang),
            "range_rel_rmse": rmse(rng),
            "max_angle_error": max(finite_ang) if finite_ang else None,
            "max_range_rel_error": max(finite_rng) if finite_rng else None,
            "mean_angle_error_per_source": per_source_mean,
            "max_angle_error_per_source": per_source_max,
            "misses": sum(s.misses for s in self.per_seed),
            "false_alarms": sum(s.false_alarms for s in self.per_seed),
            "under_resolved_seeds": under,
            "under_resolved": 2 * under > n,
        }


@dataclass
class RunReport:
    scenario: str
    config: dict
    true_angles: list
    true_ranges: list
    estimators: dict
    wall_clock: float = 0.0
    traces: dict = field(default_factory=dict, repr=False)
    """Spectrum traces of the first seed, keyed by estimator name."""

    def to_dict(self):
        return {
            "schema": SCHEMA_VERSION,
            "scenario": self.scenario,
            "config": self.config,
            "truth": {"angles": self.true_angles, "ranges": _finite(self.true_ranges)},
            "estimators": {
                name: {
                    "aggregate": rep.aggregate(len(self.true_angles)),
                    "per_seed": [dataclasses.asdict(s) for s in rep.per_seed],
                }
                for name, rep in self.estimators.items()
            },
        }

    def estimates_dict(self):
        return {
            "schema": SCHEMA_VERSION,
            "scenario": self.scenario,
            "truth": {"angles": self.true_angles, "ranges": _finite(self.true_ranges)},
            "estimates": {
                name: [{"seed": s.seed, "num_sources": s.num_sources, "angles": s.angles,
                        "ranges": s.ranges} for s in rep.per_seed]
                for name, rep in self.estimators.items()
            },
        }


def _finite(values):
    return [None if v is None or math.isinf(v) else float(v) for v in values]


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _config_dict(cfg):
    d = dataclasses.asdict(cfg)
    d["geometry"]["reference"] = cfg.geometry.reference.value
    return json.loads(json.dumps(d))


def _estimate(est, cfg, geom, r, dec, k):
    """Run one estimator; returns ``(angles, ranges_or_None, trace_or_None)``."""
    grid = angle_grid(est.grid)
    if est.name == "music":
        trace = music_spectrum(dec, geom, grid, k)
    elif est.name == "esprit":
        return np.asarray(esprit(dec, geom, k)), None, None
    elif est.name == "gen-esprit":
        trace = generalized_esprit_spectrum(dec, geom, grid=grid, num_sources=k)
    elif est.name == "music2d":
        bounds = cfg.geometry.bounds()
        ranges = inverse_range_grid(est.range_grid, bounds.single_antenna, bounds.array)
        trace = music_2d(dec, geom, grid, ranges, k, max_coherence=est.max_coherence)
        return trace.peak_angles, trace.peak_ranges, trace
    elif est.name == "modified-music":
        trace = modified_music_trace(r, geom, k, est.subvectors, grid, dec.noise_variance)
    else:
        trace = gen_esprit_nf_spectrum(dec, geom, k, est.subvectors, grid)
    return trace.peak_angles, None, trace


def _range_search(angles, est, cfg, geom, dec):
    if not (cfg.near_field and est.name in _RANGE_ESTIMATORS and len(angles)):
        return None
    bounds = cfg.geometry.bounds()
    ranges = inverse_range_grid(est.range_grid, bounds.single_antenna, bounds.array)
    return np.array([rr for _, rr in estimate_ranges(angles, dec, geom, ranges)])


def run_scenario(cfg, out_dir=None):
    """Run every estimator over every seed; write output files when ``out_dir`` is set."""
    start = time.perf_counter()
    geom = cfg.geometry.build()
    true_angles = cfg.true_angles()
    true_ranges = cfg.true_ranges()
    reports = {e.name: EstimatorReport(e.name) for e in cfg.estimators}
    traces = {}
    for n_seed, seed in enumerate(cfg.run.seeds):
        scene = cfg.build_scene(seed)
        r = sample_covariance(synthesize(scene, geom, cfg.run.snapshots))
        if cfg.num_sources == "auto":
            k = detect_num_sources(eig_hermitian(r)[0], cfg.threshold)
        else:
            k = cfg.num_sources
        dec = split_subspaces(r, k) if 1 <= k < geom.num_antennas else None
        for est in cfg.estimators:
            trace = None
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                if dec is None:
                    angles, ranges = np.array([]), None
                else:
                    angles, ranges, trace = _estimate(est, cfg, geom, r, dec, k)
                    if ranges is None:
                        ranges = _range_search(angles, est, cfg, geom, dec)
            order = np.argsort(angles, kind="stable")
            angles = np.asarray(angles, dtype=float)[order]
            if ranges is not None:
                ranges = np.asarray(ranges, dtype=float)[order]
            score = match_and_score(angles, true_angles, ranges, true_ranges)
            resolved = sum(e is not None and e <= cfg.run.resolution_tol for e in score.angle_errors)
            under = resolved < len(true_angles) or bool(trace is not None and trace.under_resolved)
            reports[est.name].per_seed.append(SeedResult(
                seed=int(seed), num_sources=int(k),
                angles=[float(a) for a in angles],
                ranges=None if ranges is None else [float(x) for x in ranges],
                angle_errors=score.angle_errors, range_errors=score.range_errors,
                misses=score.misses, false_alarms=score.false_alarms,
                resolved=int(resolved), under_resolved=bool(under),
                warnings=sorted({str(w.message) for w in caught}),
            ))
            if n_seed == 0 and trace is not None:
                traces[est.name] = trace
    report = RunReport(
        scenario=cfg.name, config=_config_dict(cfg),
        true_angles=[float(a) for a in true_angles], true_ranges=list(true_ranges),
        estimators=reports, traces=traces,
    )
    report.wall_clock = time.perf_counter() - start
    if out_dir is not None:
        write_outputs(report, cfg, out_dir)
    return report


def _fmt(x):
    return f"{x:.12g}"


def spectrum_rows(report, cfg):
    """CSV rows ``estimator, angle, range, value, normalized`` for the first seed."""
    strides = {e.name: e.spectrum_stride for e in cfg.estimators}
    for name, trace in report.traces.items():
        top = float(np.max(trace.values))
        scale = 1.0 / top if top > 0 else 0.0
        if trace.is_2d:
            sa, sr = strides[name]
            for i in range(0, trace.angles.size, sa):
                row = trace.values[i]
                for j in range(0, trace.ranges.size, sr):
                    v = row[j]
                    yield (name, _fmt(trace.angles[i]), _fmt(trace.ranges[j]), _fmt(v), _fmt(v * scale))
        else:
            for a, v in zip(trace.angles, trace.values):
                yield (name, _fmt(a), "", _fmt(v), _fmt(v * scale))


def write_outputs(report, cfg, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(_dump(report.to_dict()))
    (out / "estimates.json").write_text(_dump(report.estimates_dict()))
    (out / "timing.json").write_text(_dump({"wall_clock_seconds": round(report.wall_clock, 3)}))
    if cfg.run.spectrum:
        with open(out / "spectrum.csv", "w", newline="") as fh:
            fh.write("estimator,angle,range,value,normalized\n")
            for row in spectrum_rows(report, cfg):
                fh.write(",".join(row) + "\n")
    return out

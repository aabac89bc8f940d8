"""Compare the numba and numpy grid kernels.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Times the MUSIC projection kernel on a 1D far-field grid and a 2D
near-field grid, and the determinant kernel of generalized ESPRIT, checks
that both backends agree, and prints a table.  The first numba call (JIT
compile or cache load) is excluded.
"""

import argparse
import time

import numpy as np

from subspace_loc import UlaGeometry, Reference, angle_grid, inverse_range_grid, field_bounds
from subspace_loc import _kernels


def _basis(m, k, rng):
    q, _ = np.linalg.qr(rng.standard_normal((m, k)) + 1j * rng.standard_normal((m, k)))
    return q


def _cases(rng):
    geom = UlaGeometry(50, 0.5, 1.0)
    grid = angle_grid(100_000)
    lin = geom.linear_phase(grid)
    us = _basis(50, 4, rng)
    yield "music 1D, M=50, 1e5 angles", lambda b: _kernels.projection_energy(
        us, geom.offsets, lin, np.zeros_like(lin), complement=True, backend=b)

    bounds = field_bounds(geom, 0.5)
    th, rr = np.meshgrid(angle_grid(500), inverse_range_grid(500, bounds.single_antenna, bounds.array),
                         indexing="ij")
    lin2 = geom.linear_phase(th).ravel()
    quad2 = geom.curvature_phase(th, rr).ravel()
    yield "music 2D, M=50, 500x500", lambda b: _kernels.projection_energy(
        us, geom.offsets, lin2, quad2, complement=True, backend=b)

    sym = UlaGeometry(51, 0.25, 1.0, Reference.CENTER)
    us5 = _basis(51, 5, rng)
    j = 50
    coeffs = 2.0 * sym.spacing * (sym.half_count - np.arange(j))
    x = 2 * np.pi * np.sin(angle_grid(20_000))
    yield "gen-ESPRIT det, J=50, K=5, 2e4 angles", lambda b: _kernels.det_spectrum(
        us5[:j], us5[51 - j:][::-1], coeffs, x, backend=b)


def _time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    if not _kernels.HAVE_NUMBA:
        print("numba is not installed; nothing to compare")
        return 1
    rng = np.random.default_rng(0)
    print(f"{'case':40s} {'numpy [s]':>10s} {'numba [s]':>10s} {'speedup':>8s} {'max rel diff':>13s}")
    for name, fn in _cases(rng):
        fn("numba")  # compile / load cache
        t_np, ref = _time(lambda: fn("numpy"), args.repeat)
        t_nb, out = _time(lambda: fn("numba"), args.repeat)
        diff = np.max(np.abs(out - ref) / np.maximum(np.abs(ref), 1e-300))
        print(f"{name:40s} {t_np:10.3f} {t_nb:10.3f} {t_np / t_nb:8.1f} {diff:13.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""Grid-evaluation kernels behind the pseudo-spectra.

Every kernel has a numba implementation and a pure-numpy one with identical
semantics.  The numba path is used when numba imports, JIT is not globally
disabled and ``SUBSPACE_LOC_DISABLE_NUMBA`` is unset (or ``0``).  Both paths
stay importable for tests and benchmarks.
"""

from __future__ import annotations

import os

import numpy as np

_CHUNK_ENTRIES = 1 << 20

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


def _numba_wanted():
    if numba is None:
        return False
    if os.environ.get("SUBSPACE_LOC_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no"):
        return False
    return not numba.config.DISABLE_JIT


HAVE_NUMBA = numba is not None
BACKEND = "numba" if _numba_wanted() else "numpy"


def _progression(offsets):
    offsets = np.asarray(offsets, dtype=np.float64)
    if offsets.size == 0:
        raise ValueError("need at least one antenna offset")
    step = float(offsets[1] - offsets[0]) if offsets.size > 1 else 1.0
    expected = offsets[0] + step * np.arange(offsets.size)
    if not np.allclose(offsets, expected, rtol=0.0, atol=1e-9 * max(1.0, abs(step))):
        raise ValueError("antenna offsets must form an arithmetic progression")
    return float(offsets[0]), step


# ---------------------------------------------------------------- numpy path

def projection_energy_numpy(basis, offsets, lin, quad, complement=False):
    basis = np.ascontiguousarray(basis, dtype=np.complex128)
    _progression(offsets)
    offsets = np.asarray(offsets, dtype=np.float64)
    lin = np.asarray(lin, dtype=np.float64).ravel()
    quad = np.asarray(quad, dtype=np.float64).ravel()
    m = offsets.size
    out = np.empty(lin.size)
    step = max(1, _CHUNK_ENTRIES // max(m, 1))
    for start in range(0, lin.size, step):
        sl = slice(start, start + step)
        phase = np.outer(lin[sl], offsets) + np.outer(quad[sl], offsets**2)
        a_conj = np.exp(-1j * phase)
        proj = a_conj @ basis
        energy = np.einsum("ij,ij->i", proj.real, proj.real) + np.einsum("ij,ij->i", proj.imag, proj.imag)
        out[sl] = m - energy if complement else energy
    return out


def det_spectrum_numpy(u1, u2, coeffs, x, weight=None):
    u1 = np.asarray(u1, dtype=np.complex128)
    u2 = np.asarray(u2, dtype=np.complex128)
    coeffs = np.asarray(coeffs, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64).ravel()
    j, k = u1.shape
    out = np.empty(x.size)
    step = max(1, _CHUNK_ENTRIES // max(j * k, 1))
    for start in range(0, x.size, step):
        sl = slice(start, start + step)
        psi = np.exp(1j * np.outer(x[sl], coeffs))
        f = u2[None, :, :] - psi[:, :, None] * u1[None, :, :]
        if weight is None:
            g = np.conj(np.swapaxes(f, 1, 2)) @ f
        else:
            g = weight.conj().T[None, :, :] @ f
        out[sl] = np.abs(np.linalg.det(g))
    return out


# ---------------------------------------------------------------- numba path

if numba is not None:

    @numba.njit(cache=True, nogil=True)
    def _projection_energy_nb(basis, start, step, lin, quad, complement):
        m, c = basis.shape
        g = lin.size
        out = np.empty(g)
        a_conj = np.empty(m, dtype=np.complex128)
        for i in range(g):
            # conj(a_p) by recurrence: ratio w_p between neighbors, w_{p+1} = w_p * ratio2
            ph0 = start * lin[i] + start * start * quad[i]
            a = complex(np.cos(ph0), -np.sin(ph0))
            phw = step * lin[i] + quad[i] * step * (2.0 * start + step)
            w = complex(np.cos(phw), -np.sin(phw))
            ph2 = 2.0 * step * step * quad[i]
            ratio2 = complex(np.cos(ph2), -np.sin(ph2))
            for p in range(m):
                a_conj[p] = a
                a *= w
                w *= ratio2
            energy = 0.0
            for q in range(c):
                acc = 0j
                for p in range(m):
                    acc += a_conj[p] * basis[p, q]
                energy += acc.real * acc.real + acc.imag * acc.imag
            out[i] = m - energy if complement else energy
        return out

    @numba.njit(cache=True, nogil=True)
    def _abs_det_inplace(a):
        # LU with partial pivoting; destroys ``a``
        n = a.shape[0]
        det = 1.0 + 0j
        for col in range(n):
            piv = col
            best = abs(a[col, col])
            for row in range(col + 1, n):
                v = abs(a[row, col])
                if v > best:
                    best = v
                    piv = row
            if best == 0.0:
                return 0.0
            if piv != col:
                for q in range(n):
                    tmp = a[col, q]
                    a[col, q] = a[piv, q]
                    a[piv, q] = tmp
                det = -det
            d = a[col, col]
            det *= d
            for row in range(col + 1, n):
                fac = a[row, col] / d
                for q in range(col + 1, n):
                    a[row, q] -= fac * a[col, q]
        return abs(det)

    @numba.njit(cache=True, nogil=True)
    def _det_spectrum_nb(u1, u2, coeffs, x, weight, use_weight):
        j, k = u1.shape
        out = np.empty(x.size)
        f = np.empty((j, k), dtype=np.complex128)
        g = np.empty((k, k), dtype=np.complex128)
        for i in range(x.size):
            for n in range(j):
                ph = coeffs[n] * x[i]
                psi = complex(np.cos(ph), np.sin(ph))
                for q in range(k):
                    f[n, q] = u2[n, q] - psi * u1[n, q]
            for p in range(k):
                for q in range(k):
                    acc = 0j
                    if use_weight:
                        for n in range(j):
                            acc += weight[n, p].conjugate() * f[n, q]
                    else:
                        for n in range(j):
                            acc += f[n, p].conjugate() * f[n, q]
                    g[p, q] = acc
            out[i] = _abs_det_inplace(g)
        return out


def projection_energy_numba(basis, offsets, lin, quad, complement=False):
    if numba is None:
        raise RuntimeError("numba is not installed")
    start, step = _progression(offsets)
    return _projection_energy_nb(
        np.ascontiguousarray(basis, dtype=np.complex128),
        start, step,
        np.ascontiguousarray(np.ravel(lin), dtype=np.float64),
        np.ascontiguousarray(np.ravel(quad), dtype=np.float64),
        bool(complement),
    )


def det_spectrum_numba(u1, u2, coeffs, x, weight=None):
    if numba is None:
        raise RuntimeError("numba is not installed")
    u1 = np.ascontiguousarray(u1, dtype=np.complex128)
    w = np.zeros((1, 1), dtype=np.complex128) if weight is None else np.ascontiguousarray(weight, dtype=np.complex128)
    return _det_spectrum_nb(
        u1,
        np.ascontiguousarray(u2, dtype=np.complex128),
        np.ascontiguousarray(coeffs, dtype=np.float64),
        np.ascontiguousarray(np.ravel(x), dtype=np.float64),
        w,
        weight is not None,
    )


# ---------------------------------------------------------------- dispatch

_IMPLS = {
    "numpy": (projection_energy_numpy, det_spectrum_numpy),
    "numba": (projection_energy_numba, det_spectrum_numba),
}


def projection_energy(basis, offsets, lin, quad, complement=False, backend=None):
    """Squared projection of unit-modulus probe vectors onto ``basis``.

    Probe ``g`` has entries ``exp(1j * (o * lin[g] + o**2 * quad[g]))`` for
    the offsets ``o``, which must be equally spaced.  Returns ``sum_c |a^H basis[:, c]|**2`` per probe, or
    ``M`` minus that when ``complement`` is set (projection onto the orthogonal
    complement of an orthonormal ``basis``).
    """
    return _IMPLS[backend or BACKEND][0](basis, offsets, lin, quad, complement)


def det_spectrum(u1, u2, coeffs, x, weight=None, backend=None):
    """``|det(W^H F(x))|`` with ``F(x) = u2 - diag(exp(1j * coeffs * x)) u1``.

    ``weight=None`` uses ``W = F(x)`` at every grid point.
    """
    return _IMPLS[backend or BACKEND][1](u1, u2, coeffs, x, weight)

"""Pure Python reference backend.

Accumulation goes through math.fsum, which is exactly rounded, so this
backend is the accuracy reference. The compiled backend (_core.pyx)
reproduces every function with Neumaier-compensated loops; the two must
agree to 1e-13 relative on the nonnegative summand sets used by the
criteria (see the backend agreement tests).
"""

import math

import numpy as np


def comp_sum(x):
    """Compensated sum of a 1-D float64 array."""
    return math.fsum(x)


def bilinear_dense(u, g):
    """sum_{i,j} u[i] u[j] g[i, j] over the full N x N grid."""
    n = u.shape[0]
    if g.shape != (n, n):
        raise ValueError("matrix/vector size mismatch")
    if n == 0:
        return 0.0
    rows = [math.fsum(u * g[i] * u[i]) for i in range(n)]
    return math.fsum(rows)


def bilinear_lagged(u, glag, idx):
    """sum_{i,j} u[i] u[j] glag[|idx[i] - idx[j]|].

    A contiguous index range takes a per-lag path that skips zero-weight
    lags; any other enumeration gathers row by row.
    """
    n = u.shape[0]
    if idx.shape[0] != n:
        raise ValueError("index/vector size mismatch")
    if n == 0:
        return 0.0
    span = int(idx.max()) - int(idx.min())
    if span >= glag.shape[0]:
        raise ValueError("lag table too short for index spread")
    if n == 1 or bool((np.diff(idx) == 1).all()):
        parts = []
        for d in np.flatnonzero(glag[: span + 1]):
            d = int(d)
            if d == 0:
                parts.append(glag[0] * math.fsum(u * u))
            else:
                parts.append(2.0 * glag[d] * math.fsum(u[:-d] * u[d:]))
        return math.fsum(parts)
    rows = [math.fsum(u * glag[np.abs(idx[i] - idx)] * u[i]) for i in range(n)]
    return math.fsum(rows)


def trig_partial_sums(a0, apos, aneg, ts, ms):
    """Partial sums S_M(t) = a0 + sum_{n<=M} (a_n e^{2 pi i n t} + a_{-n} e^{-2 pi i n t}).

    Terms enter in symmetric-pair order 0, +1, -1, +2, -2, ... and the
    real and imaginary parts accumulate through fsum separately, once per
    requested mark. Returns an array of shape (len(ts), len(ms)).
    """
    m_max = apos.shape[0]
    if aneg.shape[0] != m_max:
        raise ValueError("one-sided coefficient arrays differ in length")
    if ms.size and (ms[0] < 0 or (np.diff(ms) <= 0).any() or ms[-1] > m_max):
        raise ValueError("truncation marks must be strictly increasing in [0, m_max]")
    out = np.empty((ts.shape[0], ms.shape[0]), dtype=np.complex128)
    if not ms.size:
        return out
    n_arr = np.arange(1, m_max + 1, dtype=np.float64)
    inc_re = np.empty(2 * m_max + 1)
    inc_im = np.empty(2 * m_max + 1)
    a0 = complex(a0)
    for k in range(ts.shape[0]):
        theta = (2.0 * math.pi * float(ts[k])) * n_arr
        z = np.exp(1j * theta)
        zp = apos * z
        zn = aneg * np.conjugate(z)
        inc_re[0] = a0.real
        inc_im[0] = a0.imag
        inc_re[1::2] = zp.real
        inc_im[1::2] = zp.imag
        inc_re[2::2] = zn.real
        inc_im[2::2] = zn.imag
        for q in range(ms.shape[0]):
            stop = 1 + 2 * int(ms[q])
            out[k, q] = complex(math.fsum(inc_re[:stop]), math.fsum(inc_im[:stop]))
    return out

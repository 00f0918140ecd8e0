# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled backend: Neumaier-compensated reductions and trig partial sums.

Mirrors _corepy function for function; depseries._accel picks whichever
imports. Product orderings match _corepy so the backends agree to 1e-13
relative on the nonnegative summand sets the criteria generate.
"""

from libc.math cimport cos, fabs, sin

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef double TWO_PI = 6.283185307179586  # 2 * math.pi, exact double


cdef inline void _acc(double x, double* s, double* c) noexcept nogil:
    # Neumaier update: compensation also catches the |x| > |s| case.
    cdef double t = s[0] + x
    if fabs(s[0]) >= fabs(x):
        c[0] += (s[0] - t) + x
    else:
        c[0] += (x - t) + s[0]
    s[0] = t


def comp_sum(const double[::1] x not None):
    """Compensated sum of a 1-D float64 array."""
    cdef double s = 0.0, c = 0.0
    cdef Py_ssize_t i
    with nogil:
        for i in range(x.shape[0]):
            _acc(x[i], &s, &c)
    return s + c


def bilinear_dense(const double[::1] u not None, const double[:, ::1] g not None):
    """sum_{i,j} u[i] u[j] g[i, j] over the full N x N grid."""
    cdef Py_ssize_t n = u.shape[0]
    if g.shape[0] != n or g.shape[1] != n:
        raise ValueError("matrix/vector size mismatch")
    cdef double s = 0.0, c = 0.0, t
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(n):
            for j in range(n):
                t = u[i] * u[j]
                t = t * g[i, j]
                _acc(t, &s, &c)
    return s + c


def bilinear_lagged(const double[::1] u not None, const double[::1] glag not None,
                    const cnp.int64_t[::1] idx not None):
    """sum_{i,j} u[i] u[j] glag[|idx[i] - idx[j]|]."""
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t d_max = glag.shape[0]
    if idx.shape[0] != n:
        raise ValueError("index/vector size mismatch")
    if n == 0:
        return 0.0
    cdef cnp.int64_t lo = idx[0], hi = idx[0]
    cdef Py_ssize_t i, j
    for i in range(n):
        if idx[i] < lo:
            lo = idx[i]
        if idx[i] > hi:
            hi = idx[i]
    if hi - lo >= <cnp.int64_t>d_max:
        raise ValueError("lag table too short for index spread")
    cdef double s = 0.0, c = 0.0, t
    cdef cnp.int64_t d
    with nogil:
        for i in range(n):
            for j in range(n):
                d = idx[i] - idx[j]
                if d < 0:
                    d = -d
                t = u[i] * u[j]
                t = t * glag[d]
                _acc(t, &s, &c)
    return s + c


def trig_partial_sums(a0, const double complex[::1] apos not None,
                      const double complex[::1] aneg not None,
                      const double[::1] ts not None,
                      const cnp.int64_t[::1] ms not None):
    """Partial sums S_M(t) in symmetric-pair order at the given marks.

    Compensated accumulation of real and imaginary parts; one running
    pass per point records each mark as the pair n = M completes.
    """
    cdef Py_ssize_t m_max = apos.shape[0]
    if aneg.shape[0] != m_max:
        raise ValueError("one-sided coefficient arrays differ in length")
    cdef Py_ssize_t n_ts = ts.shape[0], n_ms = ms.shape[0]
    cdef Py_ssize_t q
    for q in range(n_ms):
        if ms[q] < 0 or ms[q] > <cnp.int64_t>m_max or (q > 0 and ms[q] <= ms[q - 1]):
            raise ValueError("truncation marks must be strictly increasing in [0, m_max]")
    out = np.empty((n_ts, n_ms), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    cdef double complex a0c = complex(a0)
    cdef double complex val
    cdef double sr, cr, si, ci, tpt, th, cs, sn, re, im
    cdef Py_ssize_t k, n_i
    for k in range(n_ts):
        tpt = TWO_PI * ts[k]
        sr = 0.0
        cr = 0.0
        si = 0.0
        ci = 0.0
        _acc(a0c.real, &sr, &cr)
        _acc(a0c.imag, &si, &ci)
        q = 0
        if q < n_ms and ms[q] == 0:
            val.real = sr + cr
            val.imag = si + ci
            o[k, q] = val
            q += 1
        for n_i in range(1, m_max + 1):
            if q >= n_ms:
                break
            th = tpt * n_i
            cs = cos(th)
            sn = sin(th)
            re = apos[n_i - 1].real * cs - apos[n_i - 1].imag * sn
            im = apos[n_i - 1].real * sn + apos[n_i - 1].imag * cs
            _acc(re, &sr, &cr)
            _acc(im, &si, &ci)
            re = aneg[n_i - 1].real * cs + aneg[n_i - 1].imag * sn
            im = aneg[n_i - 1].imag * cs - aneg[n_i - 1].real * sn
            _acc(re, &sr, &cr)
            _acc(im, &si, &ci)
            if ms[q] == n_i:
                val.real = sr + cr
                val.imag = si + ci
                o[k, q] = val
                q += 1
    return out

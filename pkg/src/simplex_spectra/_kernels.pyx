# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops; see ``_pykernels`` for the reference semantics."""
from libc.math cimport sqrt


def euler_block(const double[::1] alpha, double[::1] x, double dt,
                const double[:, ::1] noise, double[:, ::1] out):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t steps = noise.shape[0]
    cdef Py_ssize_t t, i
    cdef double a_last = alpha[n]
    cdef double sqdt = sqrt(dt)
    cdef double s, last, tot, xi, xp, b, y
    cdef int clamped
    cdef long clamps = 0
    for t in range(steps):
        s = 0.0
        for i in range(n):
            s += x[i]
        last = 1.0 - s
        if last < 0.0:
            last = 0.0
        clamped = 0
        tot = 0.0
        for i in range(n):
            xi = x[i]
            xp = xi if xi > 0.0 else 0.0
            b = alpha[i] * last - a_last * xi
            y = xi + b * dt + sqrt(2.0 * last * xp) * noise[t, i] * sqdt
            if y < 0.0:
                y = 0.0
                clamped = 1
            out[t, i] = y
            tot += y
        if tot > 1.0:
            for i in range(n):
                out[t, i] = out[t, i] / tot
            clamped = 1
        if clamped:
            clamps += 1
        for i in range(n):
            x[i] = out[t, i]
    return clamps


def gem_matrices(const double[:, ::1] x, double tol, double[:, :, ::1] a,
                 unsigned char[::1] ok):
    cdef Py_ssize_t m = x.shape[0]
    cdef Py_ssize_t n = x.shape[1]
    cdef Py_ssize_t s, i, j, k
    cdef double s_prev, sk, tot, ci, cj, v
    cdef int good
    cdef double[64] den
    cdef double[64] sp
    if n > 64:
        raise ValueError("gem_matrices supports n <= 64")
    for s in range(m):
        s_prev = 0.0
        good = 1
        for k in range(n):
            sk = s_prev + x[s, k]
            den[k] = x[s, k] * (1.0 - sk)
            sp[k] = 1.0 - s_prev
            if not den[k] > tol:
                good = 0
            s_prev = sk
        ok[s] = good
        for i in range(n):
            for j in range(i, n):
                if not good:
                    a[s, i, j] = 0.0
                    a[s, j, i] = 0.0
                    continue
                tot = 0.0
                for k in range(i + 1):
                    ci = (sp[k] if k == i else 0.0) - x[s, k]
                    cj = (sp[k] if k == j else 0.0) - x[s, k]
                    tot = tot + ci * cj / den[k]
                v = x[s, i] * x[s, j] * tot
                a[s, i, j] = v
                a[s, j, i] = v

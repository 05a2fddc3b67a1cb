"""Pure-Python reference kernels.

Operation order mirrors ``_kernels.pyx`` exactly so both backends produce
bit-identical doubles.
"""
import math

import numpy as np


def euler_block(alpha, x, dt, noise, out):
    """Advance the truncated Euler-Maruyama chain over ``noise.shape[0]`` steps.

    ``x`` (length n) is updated in place; row ``t`` of ``out`` receives the
    state after step ``t``.  Returns the number of steps that needed a
    boundary projection.
    """
    n = x.shape[0]
    a = [float(v) for v in alpha]
    a_last = a[n]
    sqdt = math.sqrt(dt)
    state = [float(v) for v in x]
    clamps = 0
    sqrt = math.sqrt
    for t, z in enumerate(noise.tolist()):
        s = 0.0
        for i in range(n):
            s += state[i]
        last = 1.0 - s
        if last < 0.0:
            last = 0.0
        clamped = False
        tot = 0.0
        new = [0.0] * n
        for i in range(n):
            xi = state[i]
            xp = xi if xi > 0.0 else 0.0
            b = a[i] * last - a_last * xi
            y = xi + b * dt + sqrt(2.0 * last * xp) * z[i] * sqdt
            if y < 0.0:
                y = 0.0
                clamped = True
            new[i] = y
            tot += y
        if tot > 1.0:
            for i in range(n):
                new[i] = new[i] / tot
            clamped = True
        if clamped:
            clamps += 1
        state = new
        out[t, :] = new
    x[:] = state
    return clamps


def gem_matrices(x, tol, a, ok):
    m, n = x.shape
    a[...] = 0.0
    s_prev = np.zeros(m)
    den = np.empty((m, n))
    sp = np.empty((m, n))
    good = np.ones(m, dtype=bool)
    for k in range(n):
        sk = s_prev + x[:, k]
        den[:, k] = x[:, k] * (1.0 - sk)
        sp[:, k] = 1.0 - s_prev
        good &= den[:, k] > tol
        s_prev = sk
    safe = np.where(good[:, None], den, 1.0)
    for i in range(n):
        for j in range(i, n):
            tot = np.zeros(m)
            for k in range(i + 1):
                ci = (sp[:, k] if k == i else 0.0) - x[:, k]
                cj = (sp[:, k] if k == j else 0.0) - x[:, k]
                tot = tot + ci * cj / safe[:, k]
            v = x[:, i] * x[:, j] * tot
            v = np.where(good, v, 0.0)
            a[:, i, j] = v
            a[:, j, i] = v
    ok[:] = good

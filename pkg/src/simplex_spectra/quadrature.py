"""Monte Carlo integration against the Dirichlet law.

Two samplers are provided.  Plain sampling draws from the law itself.  When
an integrand is known to vanish outside a box in some ``n`` of the ``n + 1``
barycentric coordinates, :func:`box_batches` samples those coordinates from
truncated power laws ``y**(alpha_j - 1)`` on the box and returns the matching
importance weights, which makes supports of mass ``eps**large`` reachable.
"""
from dataclasses import dataclass
import math

import numpy as np
from scipy.special import betaincinv

from . import _parallel
from .errors import ConfigError, DimensionMismatch
from .params import AlphaParams, sample_batch

MIN_SAMPLES = 1000


@dataclass(frozen=True)
class QuadratureSpec:
    method: str = "mc"
    samples: int = 100_000
    seed: int = 0
    strata: int = 64

    def __post_init__(self):
        if self.method not in ("mc", "stratified"):
            raise ConfigError(f"unknown quadrature method {self.method!r}")
        if int(self.samples) < MIN_SAMPLES:
            raise ConfigError(f"need at least {MIN_SAMPLES} samples, got {self.samples}")


@dataclass(frozen=True)
class SupportBox:
    """Axis box ``lo <= y_j <= hi`` in the barycentric coordinates ``free``.

    ``free`` lists ``n`` distinct indices out of ``0..n``; index ``n`` is the
    implicit coordinate ``1 - sum(x)``.
    """

    free: tuple
    lo: tuple
    hi: tuple


def stick_to_simplex(v):
    """Map stick-breaking fractions ``v`` (shape ``(m, n)``) to simplex points."""
    x = np.empty_like(v)
    rem = np.ones(v.shape[0])
    for k in range(v.shape[1]):
        x[:, k] = rem * v[:, k]
        rem = rem - x[:, k]
    return x


def stick_params(p: AlphaParams):
    """Beta parameters of the independent stick fractions of the Dirichlet law."""
    a = p.head
    b = tuple(math.fsum(p.alpha[k + 1:]) for k in range(p.n))
    return a, b


def _stratified_batch(p, rng, count, strata):
    a, b = stick_params(p)
    u = rng.random(count)
    u = (np.arange(count) % strata + u) / strata
    v = np.empty((count, p.n))
    v[:, 0] = betaincinv(a[0], b[0], u)
    for k in range(1, p.n):
        v[:, k] = rng.beta(a[k], b[k], size=count)
    return stick_to_simplex(v)


def _power_law(rng, alpha, lo, hi, count):
    u = rng.random(count)
    la, ha = lo**alpha, hi**alpha
    return (la + u * (ha - la)) ** (1.0 / alpha)


def _box_batch(p, box, rng, count):
    n = p.n
    y = np.empty((count, n + 1))
    logw = p.log_norm
    for j, lo, hi in zip(box.free, box.lo, box.hi):
        a = p.alpha[j]
        y[:, j] = _power_law(rng, a, lo, hi, count)
        logw += math.log((hi**a - lo**a) / a)
    (rest,) = set(range(n + 1)) - set(box.free)
    y[:, rest] = 1.0 - y[:, list(box.free)].sum(axis=1)
    inside = y[:, rest] > 0
    w = np.zeros(count)
    w[inside] = np.exp(logw + (p.alpha[rest] - 1.0) * np.log(y[inside, rest]))
    y[~inside, rest] = 0.0
    return y[:, :n], w


def batches(p: AlphaParams, spec: QuadratureSpec, box: SupportBox = None):
    """Yield ``(index, sampler)`` pairs; ``sampler()`` returns ``(x, weights)``."""
    if box is not None:
        if len(box.free) != p.n or len(set(box.free)) != p.n:
            raise DimensionMismatch("support box must fix n distinct barycentric coordinates")
    for i, size in enumerate(_parallel.batch_sizes(int(spec.samples))):
        def sampler(i=i, size=size):
            rng = _parallel.batch_rng(spec.seed, i)
            if box is not None:
                return _box_batch(p, box, rng, size)
            if spec.method == "stratified":
                return _stratified_batch(p, rng, size, spec.strata), np.ones(size)
            return sample_batch(p, rng, size), np.ones(size)

        yield i, sampler


def reduce_batches(p, spec, fn, box=None):
    """Apply ``fn(x, w)`` to every batch and sum its returned arrays in batch order."""
    results = _parallel.ordered_map(lambda item: fn(*item[1]()), batches(p, spec, box))
    total = [np.array(r, dtype=float, copy=True) for r in results[0]]
    for r in results[1:]:
        for acc, part in zip(total, r):
            acc += part
    return total


def mean_and_se(p, spec, integrand, box=None):
    """Estimate ``mu(g)`` for a vector integrand ``g(x) -> (m, q)``; returns ``(mean, se, count)``."""

    def fn(x, w):
        vals = np.atleast_2d(np.asarray(integrand(x), dtype=float).T).T * w[:, None]
        return vals.sum(axis=0), (vals**2).sum(axis=0)

    s1, s2 = reduce_batches(p, spec, fn, box)
    n = int(spec.samples)
    mean = s1 / n
    var = np.maximum(s2 / n - mean**2, 0.0)
    return mean, np.sqrt(var / (n - 1)), n

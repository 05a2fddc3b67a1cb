"""Dirichlet law on the simplex: parameters, density, exact moments, sampling."""
from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from scipy.special import gammaln

from . import _parallel
from .errors import BadN, BoundaryDivergence, DimensionMismatch, NonPositiveAlpha, OutsideSimplex

BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class AlphaParams:
    """Validated parameter vector ``alpha`` of length ``n + 1``.

    ``alpha[-1]`` is the weight of the implicit coordinate
    ``x_{n+1} = 1 - sum(x)``.
    """

    n: int
    alpha: tuple
    alpha_total: float

    @property
    def last(self):
        return self.alpha[-1]

    @property
    def head(self):
        """The first ``n`` entries."""
        return self.alpha[:-1]

    def as_array(self):
        return np.asarray(self.alpha, dtype=float)

    @property
    def log_norm(self):
        return _log_norm(self.alpha)


def validate(alpha_raw, n):
    if int(n) != n or n < 1:
        raise BadN(f"n must be a positive integer, got {n!r}")
    n = int(n)
    alpha = tuple(float(a) for a in alpha_raw)
    if len(alpha) != n + 1:
        raise DimensionMismatch(f"alpha has {len(alpha)} entries, expected n+1 = {n + 1}")
    for i, a in enumerate(alpha):
        if not a > 0 or not math.isfinite(a):
            raise NonPositiveAlpha(f"alpha[{i}] = {a} is not a positive finite number")
    return AlphaParams(n=n, alpha=alpha, alpha_total=math.fsum(alpha))


@lru_cache(maxsize=None)
def _log_norm(alpha):
    return math.lgamma(math.fsum(alpha)) - math.fsum(math.lgamma(a) for a in alpha)


def simplex_points(x, n, tol=BOUNDARY_TOL):
    """Validate points of the simplex, clamping those within ``tol`` of the boundary.

    Accepts a single point of shape ``(n,)`` or a batch ``(m, n)`` and returns a
    float array of the same shape.
    """
    arr = np.array(x, dtype=float)
    if arr.shape[-1:] != (n,):
        raise DimensionMismatch(f"expected points with {n} coordinates, got shape {arr.shape}")
    if np.any(arr < -tol):
        raise OutsideSimplex("point has a coordinate below 0 beyond tolerance")
    arr = np.maximum(arr, 0.0)
    total = arr.sum(axis=-1, keepdims=True)
    if np.any(total > 1 + tol):
        raise OutsideSimplex("point has coordinate sum above 1 beyond tolerance")
    return arr / np.where(total > 1, total, 1.0)


def barycentric(x):
    """Append the last coordinate ``1 - sum(x)`` (clamped at 0)."""
    x = np.asarray(x, dtype=float)
    last = np.maximum(1.0 - x.sum(axis=-1), 0.0)
    return np.concatenate([x, last[..., None]], axis=-1)


def log_density(p: AlphaParams, x):
    y = barycentric(simplex_points(x, p.n))
    a = p.as_array()
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(a == 1.0, 0.0, (a - 1.0) * np.log(y))
    if np.any(np.isinf(terms) & (terms > 0)):
        raise BoundaryDivergence("density is infinite: a coordinate with alpha_i < 1 is zero")
    return p.log_norm + terms.sum(axis=-1)


def density(p: AlphaParams, x):
    """Dirichlet density with respect to Lebesgue measure on the first ``n`` coordinates."""
    out = np.exp(log_density(p, x))
    return float(out) if np.ndim(out) == 0 else out


def moment(p: AlphaParams, k):
    """``E[prod_i x_i**k_i]`` over the first ``n`` coordinates."""
    k = tuple(int(v) for v in k)
    if len(k) != p.n:
        raise DimensionMismatch(f"multi-index has {len(k)} entries, expected {p.n}")
    return _moment(p.alpha, k)


@lru_cache(maxsize=200_000)
def _moment(alpha, k):
    if not any(k):
        return 1.0
    total = math.fsum(alpha)
    lg = math.lgamma(total) - math.lgamma(total + sum(k))
    for a, ki in zip(alpha, k):
        if ki:
            lg += math.lgamma(a + ki) - math.lgamma(a)
    return math.exp(lg)


def moments(p: AlphaParams, ks):
    """Vectorised :func:`moment` for an integer array of multi-indices, shape ``(m, n)``."""
    ks = np.asarray(ks, dtype=float)
    a = np.asarray(p.head, dtype=float)
    lg = gammaln(p.alpha_total) - gammaln(p.alpha_total + ks.sum(axis=-1))
    lg = lg + (gammaln(a + ks) - gammaln(a)).sum(axis=-1)
    return np.exp(lg)


def sample_batch(p: AlphaParams, rng, count):
    """Draw ``count`` points from the Dirichlet law using ``rng``; shape ``(count, n)``."""
    g = rng.standard_gamma(p.as_array(), size=(count, p.n + 1))
    return g[:, :-1] / g.sum(axis=1, keepdims=True)


def sample(p: AlphaParams, seed, count):
    """I.i.d. draws, deterministic in ``seed`` and independent of the thread cap."""
    if count < 1:
        raise ValueError("count must be >= 1")
    sizes = _parallel.batch_sizes(count)
    parts = _parallel.ordered_map(
        lambda ib: sample_batch(p, _parallel.batch_rng(seed, ib[0]), ib[1]), enumerate(sizes)
    )
    return np.concatenate(parts, axis=0)

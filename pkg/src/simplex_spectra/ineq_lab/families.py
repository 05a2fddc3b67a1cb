"""Test-function families that concentrate near faces and corners of the simplex.

Members are evaluated in barycentric coordinates ``y = (x_1, ..., x_n, x_{n+1})``
and return the gradient ``G`` in those coordinates; the gradient in the free
coordinates is ``G_i - G_{n+1}``.  Each member knows an axis box containing its
support, which the importance sampler in :mod:`simplex_spectra.quadrature`
exploits.
"""
from dataclasses import dataclass, field
import enum
import math

import numpy as np

from ..errors import ConfigError, EpsilonTooLarge
from ..forms import DiffusionModel
from ..params import AlphaParams
from ..poly import MultiPoly
from ..quadrature import SupportBox


class FamilyKind(enum.Enum):
    BUMP = "bump"
    CORNER_COMPLEMENT = "corner_complement"
    CORNER_ALL = "corner_all"
    POLYNOMIAL = "polynomial"


H_PRIME_MAX = 1.875


def _smoothstep(u):
    u = np.clip(u, 0.0, 1.0)
    return u**3 * (10.0 - 15.0 * u + 6.0 * u * u)


def _smoothstep_prime(u):
    inside = (u > 0.0) & (u < 1.0)
    return np.where(inside, 30.0 * u * u * (1.0 - u) ** 2, 0.0)


def bump_profile(t):
    """Smooth plateau: 0 on ``t <= 1`` and ``t >= 4``, 1 on ``[2, 3]``, ``|h'| <= 1.875``."""
    t = np.asarray(t, dtype=float)
    out = np.where(t < 2.5, _smoothstep(t - 1.0), _smoothstep(4.0 - t))
    return float(out) if out.ndim == 0 else out


def bump_profile_prime(t):
    t = np.asarray(t, dtype=float)
    out = np.where(t < 2.5, _smoothstep_prime(t - 1.0), -_smoothstep_prime(4.0 - t))
    return float(out) if out.ndim == 0 else out


def _product_gradient(factors, derivs):
    """Value and per-factor gradient of ``prod_k factors[:, k]``."""
    value = np.prod(factors, axis=1)
    grads = np.empty_like(factors)
    for k in range(factors.shape[1]):
        others = np.delete(factors, k, axis=1)
        grads[:, k] = derivs[:, k] * np.prod(others, axis=1)
    return value, grads


class TestFunction:
    """A family member; ``evaluate(x)`` returns values and gradients in ``x``."""

    __test__ = False  # not a pytest class

    n: int
    support_box: SupportBox = None

    def evaluate_bary(self, y):
        raise NotImplementedError

    def evaluate(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        y = np.concatenate([x, (1.0 - x.sum(axis=1))[:, None]], axis=1)
        vals, G = self.evaluate_bary(y)
        return vals, G[:, :-1] - G[:, -1:]

    def __call__(self, x):
        return self.evaluate(x)[0]


class BumpFunction(TestFunction):
    def __init__(self, n, i1, i2, eps):
        self.n, self.i1, self.i2, self.eps = n, tuple(i1), tuple(i2), float(eps)
        self.n1 = len(self.i1)
        self.width = 4.0 * n * self.eps
        centre = 1.0 / self.n1
        lo = [centre - 4.0 * self.width] * self.n1 + [0.0] * len(self.i2)
        hi = [centre - self.width] * self.n1 + [2.0 * self.eps] * len(self.i2)
        self.support_box = SupportBox(self.i1 + self.i2, tuple(lo), tuple(hi))

    def evaluate_bary(self, y):
        m = y.shape[0]
        k1, k2 = len(self.i1), len(self.i2)
        factors = np.empty((m, k1 + k2))
        derivs = np.empty((m, k1 + k2))
        if k1:
            t = (1.0 / self.n1 - y[:, self.i1]) / self.width
            factors[:, :k1] = bump_profile(t)
            derivs[:, :k1] = -bump_profile_prime(t) / self.width
        if k2:
            z = y[:, self.i2] / (2.0 * self.eps)
            factors[:, k1:] = np.maximum(1.0 - z, 0.0)
            derivs[:, k1:] = np.where(z < 1.0, -1.0 / (2.0 * self.eps), 0.0)
        vals, g = _product_gradient(factors, derivs)
        G = np.zeros_like(y)
        G[:, list(self.i1 + self.i2)] = g
        return vals, G


class CornerFunction(TestFunction):
    """``prod_{i in I} (eps - y_i)^+`` over barycentric indices ``I`` (0-based)."""

    def __init__(self, n, index_set, eps):
        self.n, self.index_set, self.eps = n, tuple(index_set), float(eps)
        free = list(self.index_set)
        missing = [j for j in range(n + 1) if j not in free]
        # the box must fix n coordinates; pad with an unconstrained one
        for j in missing[: n - len(free)]:
            free.append(j)
        lo = [0.0] * n
        hi = [self.eps] * len(self.index_set) + [1.0] * (n - len(self.index_set))
        self.support_box = SupportBox(tuple(free), tuple(lo), tuple(hi))

    def evaluate_bary(self, y):
        idx = list(self.index_set)
        gap = self.eps - y[:, idx]
        factors = np.maximum(gap, 0.0)
        derivs = np.where(gap > 0.0, -1.0, 0.0)
        vals, g = _product_gradient(factors, derivs)
        G = np.zeros_like(y)
        G[:, idx] = g
        return vals, G


class PolyFunction(TestFunction):
    def __init__(self, poly: MultiPoly):
        self.n, self.poly = poly.n, poly
        self.support_box = None

    def evaluate(self, x):
        return self.poly.eval_grad(x)


@dataclass(frozen=True)
class TestFamily:
    __test__ = False

    kind: FamilyKind
    params: AlphaParams
    eps_grid: tuple
    i1: tuple = ()
    i2: tuple = ()
    index_set: tuple = ()
    polys: tuple = field(default=(), repr=False)

    def member(self, eps_or_index):
        n = self.params.n
        if self.kind is FamilyKind.BUMP:
            return BumpFunction(n, self.i1, self.i2, eps_or_index)
        if self.kind is FamilyKind.POLYNOMIAL:
            return PolyFunction(self.polys[int(eps_or_index)])
        return CornerFunction(n, self.index_set, eps_or_index)

    def members(self):
        grid = range(len(self.polys)) if self.kind is FamilyKind.POLYNOMIAL else self.eps_grid
        return [self.member(e) for e in grid]


def eps_limit(n):
    return 1.0 / (32.0 * n * n)


def default_eps_grid(kind, n, count=6):
    """Dyadic grid; the bump grid starts at the largest power of 2 not above ``1/(32 n^2)``."""
    start = 5
    if kind is FamilyKind.BUMP:
        start = max(start, math.ceil(-math.log2(eps_limit(n))))
    return tuple(2.0 ** -k for k in range(start, start + count))


def _grid(kind, n, eps_grid):
    grid = default_eps_grid(kind, n) if eps_grid is None else tuple(float(e) for e in eps_grid)
    if any(not e >= 0 for e in grid):
        raise ConfigError("epsilon values must be non-negative")
    if any(b >= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("epsilon grid must be strictly decreasing")
    return grid


def bump_index_sets(p: AlphaParams):
    """0-based ``(i0, I1, I2)``: ``i0`` minimises alpha over the first n coordinates."""
    head = p.head
    i0 = min(range(p.n), key=lambda i: (head[i], i))
    i1 = tuple(i for i in range(p.n) if i == i0 or head[i] <= 1.0)
    i2 = tuple(i for i in range(p.n) if i not in i1)
    return i0, i1, i2


def build_bump_family(p: AlphaParams, eps_grid=None) -> TestFamily:
    grid = _grid(FamilyKind.BUMP, p.n, eps_grid)
    limit = eps_limit(p.n)
    if max(grid) > limit * (1 + 1e-12):
        raise EpsilonTooLarge(f"bump family needs eps <= 1/(32 n^2) = {limit:g}, got {max(grid):g}")
    _, i1, i2 = bump_index_sets(p)
    return TestFamily(FamilyKind.BUMP, p, grid, i1=i1, i2=i2)


def build_corner_complement_family(p: AlphaParams, eps_grid=None) -> TestFamily:
    grid = _grid(FamilyKind.CORNER_COMPLEMENT, p.n, eps_grid)
    i0 = min(range(p.n + 1), key=lambda i: (p.alpha[i], i))
    index_set = tuple(i for i in range(p.n + 1) if i != i0)
    return TestFamily(FamilyKind.CORNER_COMPLEMENT, p, grid, index_set=index_set)


def build_corner_all_family(p: AlphaParams, eps_grid=None) -> TestFamily:
    grid = _grid(FamilyKind.CORNER_ALL, p.n, eps_grid)
    return TestFamily(FamilyKind.CORNER_ALL, p, grid, index_set=tuple(range(p.n)))


def build_polynomial_family(p: AlphaParams, polys) -> TestFamily:
    polys = tuple(polys)
    if not polys or any(q.n != p.n for q in polys):
        raise ConfigError("polynomial family needs polynomials in the parameter dimension")
    return TestFamily(FamilyKind.POLYNOMIAL, p, (), polys=polys)


def build_family(kind, p, eps_grid=None):
    kind = FamilyKind(kind)
    builders = {
        FamilyKind.BUMP: build_bump_family,
        FamilyKind.CORNER_COMPLEMENT: build_corner_complement_family,
        FamilyKind.CORNER_ALL: build_corner_all_family,
    }
    if kind not in builders:
        raise ConfigError(f"family {kind.value!r} cannot be built from an epsilon grid")
    return builders[kind](p, eps_grid)


@dataclass(frozen=True)
class ScalingTheory:
    """Predicted exponents ``q`` in ``quantity ~ eps**q``.

    ``energy`` and ``forced`` map a :class:`DiffusionModel` value to the energy
    exponent and to the super-Poincare exponent the family forces on that form,
    ``(m1_sq - m2) / (m2 - energy)``.
    """

    m2: float
    m1_sq: float
    energy: dict
    forced: dict


def scaling_theory(fam: TestFamily) -> ScalingTheory:
    p = fam.params
    n = p.n
    if fam.kind is FamilyKind.POLYNOMIAL:
        raise ConfigError("polynomial families have no epsilon scaling")
    if fam.kind is FamilyKind.BUMP:
        s2 = math.fsum(p.alpha[i] - 1.0 for i in fam.i2)
        m2 = s2 + n + p.last - 1.0
        m1_sq = 2.0 * m2
        # the multivariate form carries a factor x_{n+1} ~ eps that Fleming-Viot lacks;
        # with a single plateau coordinate the bump sits at a vertex, where
        # Fleming-Viot also picks up a factor 1 - x_i ~ eps
        fv = m2 - 2.0 if len(fam.i1) > 1 else m2 - 1.0
        energy = {DiffusionModel.DIRICHLET.value: m2 - 1.0, DiffusionModel.FLEMING_VIOT.value: fv}
    else:
        s = math.fsum(p.alpha[i] for i in fam.index_set)
        m2 = 2.0 * n + s
        m1_sq = 2.0 * n + 2.0 * s
        energy = {DiffusionModel.DIRICHLET.value: m2 - 1.0, DiffusionModel.FLEMING_VIOT.value: m2 - 1.0}
    forced = {k: (m1_sq - m2) / (m2 - e) for k, e in energy.items()}
    return ScalingTheory(m2, m1_sq, energy, forced)

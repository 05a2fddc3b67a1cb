"""Carre du champ, generators and Dirichlet energies of the three diffusions.

Polynomial paths (multivariate Dirichlet diffusion, Fleming-Viot) are exact.
GEM coefficients carry stick-breaking denominators and are only evaluated
pointwise.
"""
import enum

import numpy as np

from . import kernels
from .errors import DenominatorUnderflow, DimensionMismatch, UnsupportedModel
from .poly import MultiPoly, integrate, last_coordinate

GEM_TOL = 1e-10


class DiffusionModel(enum.Enum):
    DIRICHLET = "dirichlet"
    FLEMING_VIOT = "fv"
    GEM = "gem"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("-", "_")
        aliases = {
            "dirichlet": cls.DIRICHLET,
            "multivariate": cls.DIRICHLET,
            "dirichlet_multivariate": cls.DIRICHLET,
            "fv": cls.FLEMING_VIOT,
            "fleming_viot": cls.FLEMING_VIOT,
            "gem": cls.GEM,
        }
        if key not in aliases:
            raise UnsupportedModel(f"unknown diffusion model {name!r}")
        return aliases[key]


def _require_polynomial(m):
    if m is DiffusionModel.GEM:
        raise UnsupportedModel("GEM coefficients are rational; use gamma_eval / Monte Carlo")


def carre_du_champ(m, f: MultiPoly, g: MultiPoly) -> MultiPoly:
    m = DiffusionModel.parse(m)
    _require_polynomial(m)
    if f.n != g.n:
        raise DimensionMismatch("f and g live in different dimensions")
    n = f.n
    df, dg = f.gradient(), g.gradient()
    xs = [MultiPoly.variable(n, i) for i in range(n)]
    out = MultiPoly.zero(n)
    if m is DiffusionModel.DIRICHLET:
        last = last_coordinate(n)
        for i in range(n):
            out = out + xs[i] * last * df[i] * dg[i]
        return out
    for i in range(n):
        out = out + xs[i] * df[i] * dg[i]
    # - sum_{ij} x_i x_j df_i dg_j = -(x . df)(x . dg)
    xdf = MultiPoly.zero(n)
    xdg = MultiPoly.zero(n)
    for i in range(n):
        xdf = xdf + xs[i] * df[i]
        xdg = xdg + xs[i] * dg[i]
    return out - xdf * xdg


def apply_generator(m, p, f: MultiPoly) -> MultiPoly:
    m = DiffusionModel.parse(m)
    _require_polynomial(m)
    if f.n != p.n:
        raise DimensionMismatch("polynomial and parameters differ in dimension")
    n = f.n
    xs = [MultiPoly.variable(n, i) for i in range(n)]
    df = f.gradient()
    out = MultiPoly.zero(n)
    if m is DiffusionModel.DIRICHLET:
        last = last_coordinate(n)
        for i in range(n):
            drift = last.scale(p.alpha[i]) - xs[i].scale(p.last)
            out = out + xs[i] * last * df[i].partial(i) + drift * df[i]
        return out
    for i in range(n):
        drift = MultiPoly.constant(n, p.alpha[i]) - xs[i].scale(p.alpha_total)
        out = out + xs[i] * df[i].partial(i) + drift * df[i]
        for j in range(n):
            out = out - xs[i] * xs[j] * df[i].partial(j)
    return out


def energy(m, p, f: MultiPoly, g: MultiPoly) -> float:
    """``E(f, g) = mu(Gamma(f, g))``, exact for polynomial models."""
    return integrate(p, carre_du_champ(m, f, g))


def gem_coefficients(x, tol=GEM_TOL):
    """GEM diffusion matrices ``a(x)`` for a batch ``(m, n)``.

    Returns ``(a, ok)`` where ``a`` has shape ``(m, n, n)`` and ``ok`` flags the
    points whose stick denominators ``x_k (1 - x_1 - ... - x_k)`` all exceed
    ``tol``; entries for the other points are zero.
    """
    x = np.ascontiguousarray(np.atleast_2d(np.asarray(x, dtype=float)))
    a = np.zeros((x.shape[0], x.shape[1], x.shape[1]))
    ok = np.zeros(x.shape[0], dtype=np.uint8)
    kernels.gem_matrices(x, float(tol), a, ok)
    return a, ok.astype(bool)


def diffusion_matrices(m, x, tol=GEM_TOL):
    """Symmetric matrices ``a(x)`` with ``Gamma(f, g) = grad f . a grad g``; plus validity mask."""
    m = DiffusionModel.parse(m)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if m is DiffusionModel.GEM:
        return gem_coefficients(x, tol)
    ok = np.ones(x.shape[0], dtype=bool)
    if m is DiffusionModel.DIRICHLET:
        last = np.maximum(1.0 - x.sum(axis=1), 0.0)
        a = np.zeros((x.shape[0], x.shape[1], x.shape[1]))
        idx = np.arange(x.shape[1])
        a[:, idx, idx] = x * last[:, None]
        return a, ok
    a = -x[:, :, None] * x[:, None, :]
    idx = np.arange(x.shape[1])
    a[:, idx, idx] += x
    return a, ok


def carre_values(m, x, grad_f, grad_g=None, tol=GEM_TOL):
    """Pointwise ``Gamma(f, g)`` from gradients at a batch of points; returns ``(values, ok)``."""
    m = DiffusionModel.parse(m)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    gf = np.atleast_2d(grad_f)
    gg = gf if grad_g is None else np.atleast_2d(grad_g)
    if m is DiffusionModel.DIRICHLET:
        last = np.maximum(1.0 - x.sum(axis=1), 0.0)
        return (x * gf * gg).sum(axis=1) * last, np.ones(x.shape[0], dtype=bool)
    if m is DiffusionModel.FLEMING_VIOT:
        vals = (x * gf * gg).sum(axis=1) - (x * gf).sum(axis=1) * (x * gg).sum(axis=1)
        return vals, np.ones(x.shape[0], dtype=bool)
    a, ok = gem_coefficients(x, tol)
    return np.einsum("si,sij,sj->s", gf, a, gg), ok


def gamma_eval(m, f: MultiPoly, g: MultiPoly, x, tol=GEM_TOL):
    """Pointwise carre du champ for any model; ``x`` is one point or a batch."""
    x_arr = np.asarray(x, dtype=float)
    single = x_arr.ndim == 1
    xb = np.atleast_2d(x_arr)
    if xb.shape[1] != f.n:
        raise DimensionMismatch("point and polynomial dimensions differ")
    _, gf = f.eval_grad(xb)
    _, gg = g.eval_grad(xb)
    vals, ok = carre_values(m, xb, gf, gg, tol)
    if not ok.all():
        raise DenominatorUnderflow(
            f"{int((~ok).sum())} point(s) within {tol:g} of a GEM stick boundary"
        )
    return float(vals[0]) if single else vals

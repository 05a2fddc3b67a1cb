"""Localized super-Poincare rates for the multivariate Dirichlet diffusion.

The global rate is assembled from three ingredients:

* a lower bound ``lambda(s) >= (1 - gamma)**2 s / 4`` on the bottom of the
  spectrum of functions vanishing on ``D_s = {x_{n+1} >= 1/s}``, certified by
  the test function ``psi = x_{n+1}**gamma``;
* the growth ``h(s) = s**3`` of ``Gamma(phi, phi)`` for ``phi = 1 / x_{n+1}``;
* local rates ``beta_s(r) = c0 s**(p + q) (r**-p + s**p)`` with
  ``p = sum(max(1/2, alpha_i))`` and ``q = max(alpha_{n+1} - 1, 0)``.

Existential constants are explicit configuration fields; only exponents are
meaningful.
"""
from dataclasses import dataclass
import math

import numpy as np

from .errors import BelowThreshold, BoundaryDivergence, ConfigError, NoThreshold, ROutOfRange
from .ineq_lab.exponents import p_alpha as _p_alpha
from .ineq_lab.measure import RateCurve, exponent_fit
from .params import AlphaParams

FIT_KS = tuple(range(4, 13))
EXPONENT_TOL = 0.05


def choose_gamma(p: AlphaParams) -> float:
    """``max(1/2, 1 - alpha_{n+1}/4)``, strictly inside the range where a threshold exists."""
    return max(0.5, 1.0 - p.last / 4.0)


def _kappa(p, gamma):
    return p.last + gamma - 1.0


def threshold_holds(p: AlphaParams, gamma: float, s: float) -> bool:
    """Drift condition ``kappa (1 - 1/s) >= (1 - gamma) + sum_{i<=n} alpha_i / s``."""
    lhs = _kappa(p, gamma) * (1.0 - 1.0 / s)
    rhs = (1.0 - gamma) + math.fsum(p.head) / s
    return lhs >= rhs - 1e-12 * max(1.0, abs(rhs))


def s0_threshold(p: AlphaParams, gamma: float) -> float:
    """Smallest ``s >= 1`` from which :func:`threshold_holds` is true."""
    kappa = _kappa(p, gamma)
    margin = kappa - (1.0 - gamma)
    if margin <= 0:
        raise NoThreshold(
            f"gamma={gamma} needs gamma > 1 - alpha_(n+1)/2 = {1 - p.last / 2} for a finite threshold"
        )
    return max(1.0, (kappa + math.fsum(p.head)) / margin)


@dataclass(frozen=True)
class LocalizationConfig:
    gamma: float
    s0: float
    c0_beta: float = 1.0
    c_offset: float = 0.0
    r_max: float = 1.0


def make_config(p: AlphaParams, gamma=None, c0_beta=1.0, c_offset=0.0, r_max=1.0) -> LocalizationConfig:
    g = choose_gamma(p) if gamma is None else float(gamma)
    if not 0.5 <= g < 1.0:
        raise ConfigError(f"gamma must lie in [1/2, 1), got {g}")
    if not c0_beta > 0:
        raise ConfigError("c0_beta must be positive")
    if not r_max > 0:
        raise ConfigError("r_max must be positive")
    return LocalizationConfig(g, s0_threshold(p, g), float(c0_beta), float(c_offset), float(r_max))


def lambda_lower(p: AlphaParams, cfg: LocalizationConfig, s: float) -> float:
    if s < cfg.s0 * (1.0 - 1e-12):
        raise BelowThreshold(f"s={s} is below the threshold s0={cfg.s0}")
    return (1.0 - cfg.gamma) ** 2 / 4.0 * s


def cheeger_ingredients(p: AlphaParams, gamma: float, s: float):
    """``(a1, a2)``: bounds on ``Gamma(psi, psi)`` from above and ``L psi`` from below off ``D_s``."""
    return gamma**2 * s ** (1.0 - 2.0 * gamma), gamma * (1.0 - gamma) * s ** (1.0 - gamma)


def _last(x):
    x = np.asarray(x, dtype=float)
    return 1.0 - x.sum(axis=-1)


def gamma_psi(p: AlphaParams, gamma: float, x):
    """Pointwise ``Gamma(psi, psi) = gamma^2 (1 - u) u^(2 gamma - 1)``, ``u = x_{n+1}``."""
    u = _last(x)
    return gamma**2 * (1.0 - u) * u ** (2.0 * gamma - 1.0)


def generator_psi(p: AlphaParams, gamma: float, x):
    """Pointwise ``L psi = gamma (alpha_{n+1} + gamma - 1)(1 - u) u^(gamma-1) - gamma u^gamma sum alpha_i``."""
    u = _last(x)
    if np.any(u <= 0):
        raise BoundaryDivergence("L psi is singular on the face x_{n+1} = 0")
    return gamma * _kappa(p, gamma) * (1.0 - u) * u ** (gamma - 1.0) - gamma * u**gamma * math.fsum(p.head)


def gg2_flux(p: AlphaParams, gamma: float, r: float) -> float:
    """``sup_{x_{n+1} = 1/r} x_{n+1}^alpha_{n+1} sum_i x_i |d_i psi|``, which must vanish as ``r`` grows."""
    return gamma * (1.0 - 1.0 / r) * r ** (1.0 - gamma - p.last)


def certify_cheeger(p: AlphaParams, gamma: float, s: float, points: int = 2001):
    """Check ``Gamma(psi, psi) <= a1`` and ``L psi >= a2`` on a grid of ``D_s^c``.

    Both quantities depend on ``x`` only through ``u = x_{n+1}``; the grid covers
    ``u`` in ``(0, 1/s)`` geometrically down to ``1e-12 / s``.  Returns
    ``(ok, max Gamma - a1, min L psi - a2)``.
    """
    a1, a2 = cheeger_ingredients(p, gamma, s)
    u = np.concatenate([np.geomspace(1e-12 / s, 1.0 / s, points)[:-1], np.linspace(0.0, 1.0 / s, points)[1:-1]])
    x = np.zeros((u.size, p.n))
    x[:, 0] = 1.0 - u
    g_excess = float(np.max(gamma_psi(p, gamma, x)) - a1)
    l_excess = float(np.min(generator_psi(p, gamma, x)) - a2)
    tol = 1e-12 * max(a1, a2)
    return (g_excess <= tol and l_excess >= -tol), g_excess, l_excess


def h_bound(s: float) -> float:
    return float(s) ** 3


def gamma_phi(x):
    """``Gamma(phi, phi)`` for ``phi = 1/x_{n+1}``: ``(1 - u) / u^3``."""
    u = _last(x)
    if np.any(u <= 0):
        raise BoundaryDivergence("phi is infinite on the face x_{n+1} = 0")
    out = (1.0 - u) / u**3
    return float(out) if np.ndim(out) == 0 else out


def local_exponent(p: AlphaParams) -> float:
    """``p(alpha) = sum_{i<=n} max(1/2, alpha_i)``."""
    return additivity_combine([max(0.5, a) for a in p.head])


def beta_s(p: AlphaParams, cfg: LocalizationConfig, s: float, r: float) -> float:
    if s < cfg.s0 * (1.0 - 1e-12):
        raise BelowThreshold(f"s={s} is below the threshold s0={cfg.s0}")
    if not r > 0:
        raise ROutOfRange(f"r must be positive, got {r}")
    pa = local_exponent(p)
    q = max(p.last - 1.0, 0.0)
    return cfg.c0_beta * s ** (pa + q) * (r ** (-pa) + s**pa)


def s_r(p: AlphaParams, cfg: LocalizationConfig, r: float) -> float:
    """Smallest ``s >= s0`` with ``lambda_lower(s) >= 8 / r``."""
    if not r > 0:
        raise ROutOfRange(f"r must be positive, got {r}")
    return max(cfg.s0, 32.0 / ((1.0 - cfg.gamma) ** 2 * r))


def assemble_beta(p: AlphaParams, cfg: LocalizationConfig, r: float) -> float:
    """Global rate ``c + (2 + r h(2 s_r)/s_r^2) beta_{3 s_r}(r / (8 + 2 r h(2 s_r)/s_r^2))``."""
    if not 0 < r <= cfg.r_max:
        raise ROutOfRange(f"r must lie in (0, {cfg.r_max}], got {r}")
    sr = s_r(p, cfg, r)
    growth = r * h_bound(2.0 * sr) / sr**2
    return cfg.c_offset + (2.0 + growth) * beta_s(p, cfg, 3.0 * sr, r / (8.0 + 2.0 * growth))


def assembly_curve(p: AlphaParams, cfg: LocalizationConfig, ks=FIT_KS) -> RateCurve:
    rs = [2.0**-k for k in ks]
    return RateCurve([(r, assemble_beta(p, cfg, r) - cfg.c_offset) for r in rs])


def assembled_exponent(p: AlphaParams, cfg: LocalizationConfig, ks=FIT_KS) -> float:
    """Minus the log-log slope of the assembled rate over ``r = 2^-k``."""
    slope, _ = exponent_fit(assembly_curve(p, cfg, ks))
    return -slope


def localization_report(p: AlphaParams, cfg: LocalizationConfig = None, ks=FIT_KS) -> dict:
    cfg = cfg or make_config(p)
    exponent = assembled_exponent(p, cfg, ks)
    # the exponent must not depend on gamma; recheck with another admissible value
    alt_gamma = 0.5 * (cfg.gamma + 1.0)
    alt = assembled_exponent(p, make_config(p, alt_gamma, cfg.c0_beta, cfg.c_offset, cfg.r_max), ks)
    target = _p_alpha(p)
    return {
        "alpha": list(p.alpha),
        "gamma": cfg.gamma,
        "s0": cfg.s0,
        "fit_window": [2.0 ** -max(ks), 2.0 ** -min(ks)],
        "assembled_exponent": exponent,
        "assembled_exponent_alt_gamma": alt,
        "alt_gamma": alt_gamma,
        "p_alpha": target,
        "match": abs(exponent - target) <= EXPONENT_TOL and abs(alt - target) <= EXPONENT_TOL,
    }


# one-dimensional isoperimetry


def one_dim_boundary_measure(alpha_i: float, a: float) -> float:
    """Boundary measure ``a^(alpha_i - 1/2)`` of ``{a}`` in the intrinsic metric ``2|sqrt s - sqrt t|``."""
    if not 0 < a < 1:
        raise ROutOfRange(f"a must lie in (0, 1), got {a}")
    return a ** (alpha_i - 0.5)


def boundary_measure_fd(alpha_i: float, a: float, eps: float = 1e-8) -> float:
    """``nu([a - eps, a]) / (2 (sqrt a - sqrt(a - eps)))`` for ``nu(ds) = s^(alpha_i - 1) ds``."""
    if not 0 < eps < a < 1:
        raise ROutOfRange("need 0 < eps < a < 1")
    mass = -(a**alpha_i) * math.expm1(alpha_i * math.log1p(-eps / a)) / alpha_i
    dist = 2.0 * eps / (math.sqrt(a) + math.sqrt(a - eps))
    return mass / dist


def isoperimetric_lower(alpha_i: float, r: float) -> float:
    """``r^-(min(1, 1/(2 alpha_i)))``."""
    if not 0 < r < 0.5:
        raise ROutOfRange(f"r must lie in (0, 1/2), got {r}")
    return r ** (-min(1.0, 1.0 / (2.0 * alpha_i)))


def isoperimetric_scan(alpha_i: float, r: float, points: int = 400) -> float:
    """Smallest boundary-to-mass ratio over intervals of ``mu_i``-mass ``r``.

    ``mu_i(ds) = alpha_i s^(alpha_i - 1) ds`` on ``[0, 1]``.  Scans ``[0, b]``,
    ``[a, 1]`` and a grid of interior intervals ``[a, b]``.
    """
    if not 0 < r < 0.5:
        raise ROutOfRange(f"r must lie in (0, 1/2), got {r}")
    A = lambda t: one_dim_boundary_measure(alpha_i, t)  # noqa: E731
    inv = lambda m: m ** (1.0 / alpha_i)  # noqa: E731  # mu_i([0, t]) = t^alpha_i
    ratios = [A(inv(r)) / r, A(inv(1.0 - r)) / r]
    for lo_mass in np.linspace(0.0, 1.0 - r, points + 2)[1:-1]:
        a, b = inv(lo_mass), inv(lo_mass + r)
        if 0 < a < b < 1:
            ratios.append((A(a) + A(b)) / r)
    return min(ratios)


def additivity_combine(exponents) -> float:
    """Rate exponent of a product measure: the sum of the factors' exponents."""
    return math.fsum(float(e) for e in exponents)

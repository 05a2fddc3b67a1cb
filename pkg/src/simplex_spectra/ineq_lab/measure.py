"""Monte Carlo functionals of test functions and rate-function fits."""
import csv
from dataclasses import dataclass, field
import io
import math

import numpy as np
from scipy import stats

from .. import quadrature
from ..errors import (
    DegenerateSupport,
    NonPositiveOrdinate,
    TooFewPoints,
    ZeroEnergy,
    ZeroL1Norm,
)
from ..forms import DiffusionModel, carre_values
from ..params import AlphaParams
from ..poly import MultiPoly
from .families import PolyFunction, TestFamily, scaling_theory


@dataclass(frozen=True)
class FunctionalTriple:
    """``(mu(f^2), mu(|f|), E(f, f))`` with standard errors."""

    m2: float
    m1: float
    en: float
    m2_se: float = 0.0
    m1_se: float = 0.0
    en_se: float = 0.0

    def consistent(self, k=3.0):
        """Cauchy-Schwarz ``m2 >= m1^2`` up to ``k`` combined standard errors."""
        slack = k * math.hypot(self.m2_se, 2.0 * self.m1 * self.m1_se)
        return self.m2 + slack >= self.m1**2


def _as_function(f):
    return PolyFunction(f) if isinstance(f, MultiPoly) else f


def functional_triples(models, p: AlphaParams, f, quad: quadrature.QuadratureSpec, center=False):
    """One sampling pass, one :class:`FunctionalTriple` per model.

    With ``quad.method == "stratified"`` and a function exposing a
    ``support_box``, samples are drawn on the box and reweighted; the box mass
    is estimated in the same pass.  ``center=True`` measures ``f - mu(f)``,
    using ``f = 0`` off the box.
    """
    f = _as_function(f)
    models = [DiffusionModel.parse(m) for m in models]
    box = getattr(f, "support_box", None) if quad.method == "stratified" else None

    def fn(x, w):
        vals, grad = f.evaluate(x)
        cols = [w, w * vals, w * vals * vals, w * np.abs(vals)]
        for m in models:
            g, ok = carre_values(m, x, grad)
            cols.append(np.where(ok, w * g, 0.0))
        V = np.stack(cols, axis=1)
        return V.sum(axis=0), (V * V).sum(axis=0), np.array([float(np.count_nonzero(w * vals))])

    s1, s2, hits = quadrature.reduce_batches(p, quad, fn, box)
    n = int(quad.samples)
    mean = s1 / n
    se = np.sqrt(np.maximum(s2 / n - mean**2, 0.0) / (n - 1))
    mass = mean[0] if box is not None else 1.0
    if hits[0] == 0 or mass <= 0.0:
        raise DegenerateSupport(f"no sample of {n} landed in the support of the function")
    m1_mean, m2, m1 = mean[1], mean[2], mean[3]
    m1_se, m2_se, abs_se = se[1], se[2], se[3]
    if center:
        c = m1_mean
        m2 = max(m2 - c * c, 0.0)
        m2_se = math.hypot(m2_se, 2.0 * abs(c) * m1_se)

        def centred(x, w):
            vals, _ = f.evaluate(x)
            d = w * np.abs(vals - c)
            return d.sum(), (d * d).sum(), w.sum()

        t1, t2, wsum = quadrature.reduce_batches(p, quad, centred, box)
        a_mean = t1 / n
        # off the box f = 0, so |f - c| = |c| there
        m1 = float(a_mean) + abs(c) * max(1.0 - float(wsum) / n, 0.0) if box is not None else float(a_mean)
        abs_se = math.sqrt(max(t2 / n - a_mean**2, 0.0) / (n - 1))
    return [
        FunctionalTriple(float(m2), float(m1), float(max(mean[4 + k], 0.0)), float(m2_se), float(abs_se), float(se[4 + k]))
        for k in range(len(models))
    ]


def functional_triple(m, p: AlphaParams, f, quad: quadrature.QuadratureSpec, center=False) -> FunctionalTriple:
    return functional_triples([m], p, f, quad, center)[0]


def beta_required(triples, r: float) -> float:
    """Smallest ``beta(r)`` compatible with every triple: ``max (m2 - r en)^+ / m1^2``."""
    best = 0.0
    for t in triples:
        if not t.m1 > 0:
            raise ZeroL1Norm("a triple has mu(|f|) = 0")
        best = max(best, max(t.m2 - r * t.en, 0.0) / t.m1**2)
    return best


def nash_ratio(triple: FunctionalTriple, p: float) -> float:
    """``m2 / (en^{p/(p+1)} m1^{2/(p+1)})`` for a centred function."""
    if not triple.en > 0:
        raise ZeroEnergy("energy vanishes; the function is constant")
    if not triple.m1 > 0:
        raise ZeroL1Norm("mu(|f|) = 0")
    return triple.m2 / (triple.en ** (p / (p + 1.0)) * triple.m1 ** (2.0 / (p + 1.0)))


@dataclass
class RateCurve:
    points: list
    se: list = None
    fit_window: tuple = None
    fitted_slope: float = float("nan")
    slope_se: float = float("nan")

    def __post_init__(self):
        xs = [a for a, _ in self.points]
        diffs = np.diff(xs)
        if len(xs) > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ValueError("abscissae must be strictly monotone")
        if self.fit_window is None:
            self.fit_window = (0, len(self.points))

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["abscissa", "ordinate", "se"])
        se = self.se or [0.0] * len(self.points)
        for (a, o), s in zip(self.points, se):
            w.writerow(["%.17g" % a, "%.17g" % o, "%.17g" % s])
        return buf.getvalue()


def exponent_fit(curve: RateCurve):
    """Least-squares slope of ``log(ordinate)`` on ``log(abscissa)`` over the window."""
    lo, hi = curve.fit_window
    pts = curve.points[lo:hi]
    if len(pts) < 4:
        raise TooFewPoints(f"slope fit needs at least 4 points, window holds {len(pts)}")
    xs = np.array([a for a, _ in pts], dtype=float)
    ys = np.array([o for _, o in pts], dtype=float)
    if np.any(ys <= 0) or np.any(xs <= 0):
        raise NonPositiveOrdinate("log-log fit needs positive coordinates")
    res = stats.linregress(np.log(xs), np.log(ys))
    curve.fitted_slope, curve.slope_se = float(res.slope), float(res.stderr)
    return curve.fitted_slope, curve.slope_se


DEFAULT_SKIP = 2


@dataclass
class SharpnessResult:
    family: TestFamily
    triples: dict  # model value -> list of FunctionalTriple (one per eps)
    m2_curve: RateCurve
    beta_curves: dict  # model value -> RateCurve of beta_required along r(eps)
    theory: object = field(default=None)

    def measured_forced(self, model):
        return -self.beta_curves[DiffusionModel.parse(model).value].fitted_slope

    def report(self, exponents):
        return {
            "family": self.family.kind.value,
            "alpha": list(self.family.params.alpha),
            "eps": list(self.family.eps_grid),
            "measured_slope": self.m2_curve.fitted_slope,
            "measured_slope_se": self.m2_curve.slope_se,
            "theory_slope": self.theory.m2,
            "forced_measured": {k: -c.fitted_slope for k, c in self.beta_curves.items()},
            "forced_theory": {k: self.theory.forced[k] for k in self.beta_curves},
            "p_alpha": exponents.p_alpha,
            "p_tilde": exponents.p_tilde,
            "p_prime": exponents.p_prime,
            "sharp_flag": exponents.sharp,
        }


def matched_radii(triples, energy_gap):
    """``r(eps) = (c3 / (2 c4)) eps^energy_gap`` with ``c3/c4`` the geometric mean of measured prefactors.

    ``energy_gap`` is the predicted exponent of ``m2 / en``; on this curve
    ``r * en`` is about ``m2 / 2``.
    """
    eps, ts = zip(*triples)
    logs = [math.log(t.m2 / (t.en * e**energy_gap)) for e, t in zip(eps, ts)]
    ratio = math.exp(math.fsum(logs) / len(logs))
    return [0.5 * ratio * e**energy_gap for e in eps]


def sharpness_scan(fam: TestFamily, models, quad: quadrature.QuadratureSpec, skip=DEFAULT_SKIP):
    """Measure every family member and fit the ``m2`` slope and forced exponents.

    Member ``k`` uses seed ``quad.seed + k`` so that grid points are independent.
    """
    models = [DiffusionModel.parse(m) for m in models]
    theory = scaling_theory(fam)
    per_model = {m.value: [] for m in models}
    for k, eps in enumerate(fam.eps_grid):
        q = quadrature.QuadratureSpec(quad.method, quad.samples, quad.seed + k, quad.strata)
        for m, t in zip(models, functional_triples(models, fam.params, fam.member(eps), q)):
            per_model[m.value].append(t)
    window = (skip, len(fam.eps_grid))
    first = per_model[models[0].value]
    m2_curve = RateCurve(
        [(e, t.m2) for e, t in zip(fam.eps_grid, first)], [t.m2_se for t in first], window
    )
    exponent_fit(m2_curve)
    beta_curves = {}
    for key, triples in per_model.items():
        gap = theory.m2 - theory.energy[key]
        kept = list(zip(fam.eps_grid, triples))[skip:]
        radii = matched_radii(kept, gap)
        pts = [(r, beta_required([t for _, t in kept], r)) for r in radii]
        curve = RateCurve(pts)
        exponent_fit(curve)
        beta_curves[key] = curve
    return SharpnessResult(fam, per_model, m2_curve, beta_curves, theory)

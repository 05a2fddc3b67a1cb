"""Truncated Euler-Maruyama simulation of the multivariate Dirichlet diffusion.

``dX_i = (alpha_i X_{n+1} - alpha_{n+1} X_i) dt + sqrt(2 X_{n+1} X_i) dW_i``
with ``X_{n+1} = 1 - sum(X)``.  After each step negative coordinates are set
to 0 and the point is rescaled onto the simplex if its sum exceeds 1; such
steps are counted.
"""
import csv
from dataclasses import dataclass
import io
import math

import numpy as np

from . import kernels
from .errors import ClampExplosion, ConfigError, InsufficientDecay
from .params import AlphaParams, moment, simplex_points
from .poly import MultiPoly, monomials_up_to

BLOCK_STEPS = 1 << 16
CLAMP_LIMIT = 0.05


@dataclass(frozen=True)
class SimConfig:
    dt: float
    steps: int
    burn_in: int = 0
    seed: int = 0
    scheme: str = "truncated_euler"
    chain: int = 0

    def validate(self, p: AlphaParams):
        limit = 1e-2 * min(1.0, 1.0 / p.alpha_total)
        if not 0 < self.dt <= limit * (1 + 1e-12):
            raise ConfigError(f"dt={self.dt} must lie in (0, {limit:g}] for this alpha")
        if int(self.steps) < 1:
            raise ConfigError("steps must be >= 1")
        if not 0 <= int(self.burn_in) < int(self.steps):
            raise ConfigError("burn_in must satisfy 0 <= burn_in < steps")
        if self.scheme != "truncated_euler":
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        return self


def drift(p: AlphaParams, x):
    x = np.asarray(x, dtype=float)
    last = 1.0 - x.sum(axis=-1, keepdims=True)
    return np.asarray(p.head) * last - p.last * x


def diffusion(p: AlphaParams, x):
    x = np.asarray(x, dtype=float)
    last = np.maximum(1.0 - x.sum(axis=-1, keepdims=True), 0.0)
    return np.sqrt(2.0 * last * np.maximum(x, 0.0))


def step(p: AlphaParams, x, dt, gaussians):
    """One truncated step; returns ``(new_point, clamped)``."""
    state = np.array(x, dtype=float)
    out = np.empty((1, state.size))
    noise = np.ascontiguousarray(np.reshape(np.asarray(gaussians, dtype=float), (1, state.size)))
    clamped = kernels.euler_block(p.as_array(), state, float(dt), noise, out)
    return out[0], bool(clamped)


@dataclass
class Trajectory:
    """States after each step; row 0 is the initial point."""

    points: np.ndarray
    dt: float
    boundary_clamp_count: int
    burn_in: int = 0

    @property
    def steps(self):
        return self.points.shape[0] - 1

    @property
    def clamp_fraction(self):
        return self.boundary_clamp_count / max(self.steps, 1)

    def stationary(self):
        """Points after the burn-in."""
        return self.points[self.burn_in + 1:]

    def to_csv(self, thin=1):
        n = self.points.shape[1]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"x{i + 1}" for i in range(n)])
        for k in range(0, self.points.shape[0], int(thin)):
            w.writerow(["%.17g" % (k * self.dt)] + ["%.17g" % v for v in self.points[k]])
        return buf.getvalue()


def _block_rng(seed, chain, block):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(chain, block))))


def simulate(p: AlphaParams, x0, cfg: SimConfig) -> Trajectory:
    """Run one chain; Gaussian block ``b`` of chain ``c`` uses ``SeedSequence(seed, (c, b))``."""
    cfg.validate(p)
    x = simplex_points(x0, p.n).copy()
    if np.any(x <= 0) or x.sum() >= 1:
        raise ConfigError("x0 must be an interior point of the simplex")
    steps = int(cfg.steps)
    pts = np.empty((steps + 1, p.n))
    pts[0] = x
    alpha = p.as_array()
    clamps = 0
    for b, start in enumerate(range(0, steps, BLOCK_STEPS)):
        stop = min(start + BLOCK_STEPS, steps)
        noise = _block_rng(cfg.seed, cfg.chain, b).standard_normal((stop - start, p.n))
        clamps += kernels.euler_block(alpha, x, float(cfg.dt), noise, pts[start + 1: stop + 1])
    traj = Trajectory(pts, float(cfg.dt), int(clamps), int(cfg.burn_in))
    if traj.clamp_fraction > CLAMP_LIMIT:
        raise ClampExplosion(
            f"{traj.clamp_fraction:.1%} of steps hit the boundary; reduce dt below {cfg.dt:g}"
        )
    return traj


# statistics


def autocovariance(y, max_lag):
    """Biased autocovariance of a 1-D series for lags ``0..max_lag`` via FFT."""
    y = np.asarray(y, dtype=float)
    y = y - y.mean()
    n = y.size
    size = 1 << int(math.ceil(math.log2(2 * n)))
    f = np.fft.rfft(y, size)
    return np.fft.irfft(f * np.conj(f), size)[: max_lag + 1] / n


def integrated_time(y, c=6.0):
    """Integrated autocorrelation time (in steps) with automatic windowing.

    The window is the smallest ``M`` with ``M >= c * tau(M)``.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    acov = autocovariance(y, n - 1)
    if acov[0] <= 0:
        return 0.5
    rho = acov / acov[0]
    taus = 2.0 * np.cumsum(rho) - 1.0
    ok = np.arange(taus.size) >= c * taus
    m = int(np.argmax(ok)) if ok.any() else taus.size - 1
    return max(float(taus[m]) / 2.0, 0.5)


@dataclass(frozen=True)
class TimeAverage:
    label: str
    mean: float
    stderr: float
    tau_int: float
    exact: float

    @property
    def z(self):
        return (self.mean - self.exact) / self.stderr if self.stderr > 0 else float("inf")


def time_average(values, label="", exact=float("nan")):
    values = np.asarray(values, dtype=float)
    tau = integrated_time(values)
    var = values.var()
    se = math.sqrt(2.0 * tau * var / values.size)
    return TimeAverage(label, float(values.mean()), se, tau, float(exact))


def moment_report(p: AlphaParams, traj: Trajectory, degree: int = 2) -> dict:
    """Time averages of every monomial of degree ``1..degree`` against exact moments."""
    x = traj.stationary()
    rows = []
    for k in monomials_up_to(p.n, degree)[1:]:
        vals = np.prod(x ** np.asarray(k), axis=1)
        label = " ".join(f"x{i + 1}^{e}" if e > 1 else f"x{i + 1}" for i, e in enumerate(k) if e)
        ta = time_average(vals, label, moment(p, k))
        rows.append(
            {"monomial": label, "exponent": list(k), "time_average": ta.mean, "stderr": ta.stderr,
             "tau_int_steps": ta.tau_int, "exact": ta.exact, "z": ta.z}
        )
    return {
        "alpha": list(p.alpha),
        "dt": traj.dt,
        "steps": traj.steps,
        "burn_in": traj.burn_in,
        "boundary_clamp_count": traj.boundary_clamp_count,
        "clamp_fraction": traj.clamp_fraction,
        "moments": rows,
    }


# decay rates


@dataclass(frozen=True)
class DecayEstimate:
    rate: float
    stderr: float
    lags: tuple
    method: str


def _lag_blocks(Y, lag, blocks):
    """Per-block sums of ``Y_t Y_t^T``, ``Y_{t+lag} Y_{t+lag}^T`` and ``Y_t Y_{t+lag}^T``."""
    n = Y.shape[0] - lag
    edges = np.linspace(0, n, blocks + 1).astype(int)
    A, B = Y[:n], Y[lag:]
    out = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        a, b = A[lo:hi], B[lo:hi]
        out.append((a.T @ a, b.T @ b, a.T @ b, hi - lo))
    return out


def _slowest_overlapping(c0, ct, weight_vec, min_weight):
    import scipy.linalg

    mu, V = scipy.linalg.eigh(0.5 * (ct + ct.T), c0)
    proj = V.T @ c0 @ weight_vec
    weights = proj**2 / (weight_vec @ c0 @ weight_vec)
    order = np.argsort(-mu)
    for k in order:
        if weights[k] >= min_weight:
            return mu[k]
    return mu[order[0]]


def series_decay_rate(Y, dt, target=None, lags=None, blocks=20, min_weight=1e-2):
    """Slowest relaxation rate visible in the multivariate series ``Y`` (shape ``(m, q)``).

    For each lag ``tau`` the symmetrised lagged covariance is diagonalised
    against the equal-time covariance; the eigenvalue ``mu`` of the slowest
    mode whose overlap with ``target`` (a coefficient vector, default the
    first column) carries at least ``min_weight`` of its variance gives
    ``-log(mu) = rate * tau``.  Lags with ``mu`` below three jackknife standard
    errors are dropped, and the rate is a weighted least-squares fit through
    the origin.  The error bar is a block jackknife.
    """
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    Y = Y - Y.mean(axis=0)
    q = Y.shape[1]
    target = np.eye(q)[0] if target is None else np.asarray(target, dtype=float)
    if lags is None:
        tau = integrated_time(Y @ target)
        # window [tau/20, 3 tau] in steps; 1/tau_int guesses the rate
        lags = np.unique(np.geomspace(max(1.0, tau / 20.0), max(2.0, 3.0 * tau), 8).astype(int))
    lags = [int(l) for l in lags if 0 < l < Y.shape[0] // 4]
    if not lags:
        raise InsufficientDecay("series too short for any lag")
    rows = []
    for lag in lags:
        parts = _lag_blocks(Y, lag, blocks)
        tot = [sum(p[i] for p in parts) for i in range(4)]

        def mu_of(s):
            c0 = 0.5 * (s[0] + s[1]) / s[3]
            return _slowest_overlapping(c0, s[2] / s[3], target, min_weight)

        full = mu_of(tot)
        loo = np.array([mu_of([tot[i] - p[i] for i in range(4)]) for p in parts])
        se = math.sqrt((blocks - 1) / blocks * np.sum((loo - loo.mean()) ** 2))
        rows.append((lag, full, se, loo))
    kept = [r for r in rows if r[1] > 0 and r[1] < 1 and r[1] > 3 * r[2]]
    if len(kept) < 2:
        raise InsufficientDecay("fewer than two lags with a lagged correlation above 3 standard errors")

    def fit(mus):
        t = np.array([r[0] * dt for r in kept])
        y = -np.log(np.clip(mus, 1e-300, None))
        w = np.array([(r[1] / max(r[2], 1e-300)) ** 2 for r in kept])
        return float(np.sum(w * t * y) / np.sum(w * t * t))

    rate = fit(np.array([r[1] for r in kept]))
    loo_rates = np.array([fit(np.array([r[3][b] for r in kept])) for b in range(blocks)])
    se = math.sqrt((blocks - 1) / blocks * np.sum((loo_rates - loo_rates.mean()) ** 2))
    return DecayEstimate(rate, se, tuple(r[0] for r in kept), "variational" if q > 1 else "scalar")


def autocorr_gap(traj: Trajectory, observable: MultiPoly, method="variational", **kw) -> DecayEstimate:
    """Decay rate of the stationary autocovariance of ``observable``.

    ``method="variational"`` works in the span of all non-constant monomials
    of degree at most ``deg(observable)``, which the generator maps into
    itself, and reports the slowest mode the observable overlaps.
    ``method="scalar"`` uses the observable alone.
    """
    if observable.degree() < 1:
        raise ConfigError("observable must be non-constant")
    x = traj.stationary()
    if method == "scalar":
        return series_decay_rate(observable.eval(x), traj.dt, **kw)
    if method != "variational":
        raise ConfigError(f"unknown method {method!r}")
    exps = monomials_up_to(observable.n, observable.degree())[1:]
    Y = np.stack([np.prod(x ** np.asarray(k), axis=1) for k in exps], axis=1)
    target = np.array([observable.coeff(k) for k in exps])
    return series_decay_rate(Y, traj.dt, target=target, **kw)

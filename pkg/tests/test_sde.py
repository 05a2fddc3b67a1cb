import math

import numpy as np
import pytest

from simplex_spectra import errors
from simplex_spectra.params import moment, validate
from simplex_spectra.poly import MultiPoly
from simplex_spectra.sde import (
    SimConfig,
    autocorr_gap,
    diffusion,
    drift,
    integrated_time,
    moment_report,
    series_decay_rate,
    simulate,
    step,
    time_average,
)

P111 = validate([1, 1, 1], 2)


def test_drift_examples():
    assert np.allclose(drift(P111, [0.25, 0.25]), [0.25, 0.25])
    p = validate([2, 1, 1], 2)
    assert np.allclose(drift(p, [0.5, 0.25]), 0.0, atol=1e-15)
    assert np.allclose(drift(p, [0.0, 0.0]), [2.0, 1.0])


def test_diffusion_examples():
    assert np.allclose(diffusion(P111, [0.25, 0.25]), [0.5, 0.5])
    assert np.allclose(diffusion(P111, [0.5, 0.5]), 0.0)
    assert diffusion(P111, [0.0, 0.3])[0] == 0.0


def test_step_zero_noise():
    x, clamped = step(P111, [0.25, 0.25], 0.01, [0.0, 0.0])
    assert np.allclose(x, [0.2525, 0.2525], rtol=1e-14) and not clamped
    p = validate([2, 1, 1], 2)
    x, _ = step(p, [0.5, 0.25], 0.01, [0.0, 0.0])
    assert np.allclose(x, [0.5, 0.25], atol=1e-16)


def test_step_clamps():
    x, clamped = step(P111, [1e-4, 0.3], 0.01, [-10.0, 0.0])
    assert clamped and x[0] == 0.0
    x, clamped = step(P111, [0.49, 0.49], 0.01, [10.0, 10.0])
    assert clamped and x.sum() <= 1.0 + 1e-15


def test_config_validation():
    with pytest.raises(errors.ConfigError):
        SimConfig(0.01, 100).validate(validate([2, 1, 1], 2))  # dt above 1e-2 / |alpha|
    with pytest.raises(errors.ConfigError):
        SimConfig(1e-3, 100, burn_in=100).validate(P111)
    with pytest.raises(errors.ConfigError):
        simulate(P111, [0.5, 0.5], SimConfig(1e-3, 100))


def test_determinism_and_chains():
    cfg = SimConfig(1e-3, 150_000, seed=4)
    a = simulate(P111, [0.3, 0.3], cfg)
    b = simulate(P111, [0.3, 0.3], cfg)
    assert np.array_equal(a.points, b.points) and a.boundary_clamp_count == b.boundary_clamp_count
    c = simulate(P111, [0.3, 0.3], SimConfig(1e-3, 150_000, seed=4, chain=1))
    assert not np.array_equal(a.points, c.points)
    # a prefix run reproduces the prefix: noise blocks are fixed-size and indexed
    d = simulate(P111, [0.3, 0.3], SimConfig(1e-3, 70_000, seed=4))
    assert np.array_equal(d.points, a.points[:70_001])


def test_trajectory_csv():
    tr = simulate(P111, [0.3, 0.3], SimConfig(1e-3, 10, seed=0))
    lines = tr.to_csv(thin=5).splitlines()
    assert lines[0] == "t,x1,x2" and len(lines) == 4
    assert float(lines[2].split(",")[0]) == 5e-3


def test_clamp_explosion():
    # alpha_i far below 1/2 with the largest admissible step hits the boundary constantly
    p = validate([0.02, 0.02, 0.02], 2)
    with pytest.raises(errors.ClampExplosion):
        simulate(p, [0.3, 0.3], SimConfig(1e-2, 20_000, seed=0))


def _clamp_fraction(alpha, dt, steps=200_000):
    p = validate(alpha, len(alpha) - 1)
    x0 = [a / p.alpha_total for a in alpha[:-1]]
    return simulate(p, x0, SimConfig(dt, steps, seed=1)).clamp_fraction


@pytest.mark.parametrize("alpha", [[1, 1, 1], [2, 1, 1], [2, 0.5, 1], [0.5, 1], [0.75, 0.75, 1]])
def test_clamp_fraction_small_at_default_dt(alpha):
    assert _clamp_fraction(alpha, 1e-3) < 0.01


@pytest.mark.parametrize("alpha", [[0.5, 0.5, 2], [0.5, 0.5, 1], [1, 2, 0.5]])
def test_clamp_fraction_half_regime(alpha):
    # the stationary density near x_i = 0 behaves like x_i^(-1/2), so the
    # fraction of steps within reach of the face scales like sqrt(dt)
    hi, lo = _clamp_fraction(alpha, 1e-3), _clamp_fraction(alpha, 1e-4)
    assert math.log(hi / lo) / math.log(10.0) == pytest.approx(0.5, abs=0.15)
    assert lo < 0.01


@pytest.mark.parametrize("alpha", [[1, 1, 1], [2, 1, 1]])
def test_time_averages(alpha):
    p = validate(alpha, 2)
    tr = simulate(p, [1 / 3, 1 / 3], SimConfig(1e-3, 1_000_000, 10_000, seed=0))
    rep = moment_report(p, tr)
    assert len(rep["moments"]) == 5
    for row in rep["moments"]:
        assert abs(row["z"]) < 4, row
    assert rep["moments"][0]["exact"] == moment(p, (1, 0))


def test_integrated_time_ar1():
    # AR(1) with coefficient phi: tau_int = (1 + phi) / (2 (1 - phi)) in the 1/2-convention
    rng = np.random.default_rng(0)
    phi = 0.9
    e = rng.standard_normal(400_000)
    y = np.empty_like(e)
    y[0] = e[0]
    for t in range(1, y.size):
        y[t] = phi * y[t - 1] + e[t]
    assert integrated_time(y) == pytest.approx((1 + phi) / (2 * (1 - phi)), rel=0.1)
    ta = time_average(y, exact=0.0)
    assert abs(ta.z) < 4


def test_scalar_decay_ar1():
    rng = np.random.default_rng(1)
    rate, dt = 2.0, 1e-2
    phi = math.exp(-rate * dt)
    e = rng.standard_normal(1_000_000) * math.sqrt(1 - phi**2)
    y = np.empty_like(e)
    y[0] = e[0]
    for t in range(1, y.size):
        y[t] = phi * y[t - 1] + e[t]
    est = series_decay_rate(y, dt)
    assert est.rate == pytest.approx(rate, rel=0.05)
    assert est.method == "scalar"


def test_decay_rate_one_dim():
    p = validate([1, 2], 1)
    tr = simulate(p, [1 / 3], SimConfig(1e-3, 1_000_000, 10_000, seed=0))
    est = autocorr_gap(tr, MultiPoly.variable(1, 0))
    assert est.rate == pytest.approx(3.0, rel=0.15)


def test_decay_rate_uniform():
    tr = simulate(P111, [1 / 3, 1 / 3], SimConfig(1e-3, 1_000_000, 10_000, seed=0))
    est = autocorr_gap(tr, MultiPoly.variable(2, 0))
    assert est.rate == pytest.approx(1.0, rel=0.15)
    with pytest.raises(errors.ConfigError):
        autocorr_gap(tr, MultiPoly.constant(2))

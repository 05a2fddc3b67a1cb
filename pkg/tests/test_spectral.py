import itertools
import math

import numpy as np
import pytest

from simplex_spectra import errors
from simplex_spectra.forms import DiffusionModel
from simplex_spectra.params import validate
from simplex_spectra.quadrature import QuadratureSpec
from simplex_spectra.spectral import (
    build,
    gap_report,
    gem_gap_estimate,
    orthonormalize,
    spectral_gap,
    spectrum,
    stick_moments,
)

D, FV, GEM = DiffusionModel.DIRICHLET, DiffusionModel.FLEMING_VIOT, DiffusionModel.GEM


def test_one_dim_degree_one_system():
    s = build(D, validate([1, 1], 1), 1)
    assert np.allclose(s.form_matrix, np.diag([0.0, 2.0]), atol=1e-13)
    # second basis element is sqrt(12) (x - 1/2) up to sign
    b = s.basis[1]
    sign = np.sign(b.coeff((1,)))
    assert sign * b.coeff((1,)) == pytest.approx(math.sqrt(12), rel=1e-12)
    assert sign * b.coeff((0,)) == pytest.approx(-math.sqrt(12) / 2, rel=1e-12)


@pytest.mark.parametrize("m", [D, FV])
def test_system_invariants(m):
    s = build(m, validate([0.5, 2, 1, 1], 3), 3)
    A = s.form_matrix
    assert np.max(np.abs(A - A.T)) < 1e-10
    ev = np.linalg.eigvalsh(A)
    assert ev.min() >= -1e-8 * np.abs(A).max()
    assert np.all(A[0] == 0) and np.all(A[:, 0] == 0)
    assert s.exponents[0] == (0, 0, 0)
    assert s.drift < 1e-8


def test_degree_one_single_zero_eigenvalue():
    for m in (D, FV):
        ev = np.linalg.eigvalsh(build(m, validate([1, 2, 0.5], 2), 1).form_matrix)
        assert np.sum(np.abs(ev) < 1e-10) == 1


def test_gap_examples():
    for m in (D, FV):
        assert spectral_gap(m, validate([1, 2], 1), 1) == pytest.approx(3.0, abs=1e-8)
        assert spectral_gap(m, validate([1, 2], 1), 4) == pytest.approx(3.0, abs=1e-8)
    assert spectral_gap(FV, validate([1, 1, 1], 2), 3) == pytest.approx(3.0, abs=1e-10)
    assert spectral_gap(D, validate([1, 1, 1], 2), 1) == pytest.approx(1.0, abs=1e-10)
    assert spectral_gap(D, validate([0.5, 0.5, 2], 2), 4) == pytest.approx(2.0, abs=1e-10)


def test_one_dim_spectrum_jacobi():
    sp = spectrum(D, validate([1, 1], 1), 3, 3)
    # lambda_m = m (m + alpha_1 + alpha_2 - 1)
    assert np.allclose(sp.eigenvalues, [2.0, 6.0, 12.0], atol=1e-9)
    assert sp.degrees == (1, 2, 3)


def test_spectrum_k_too_large():
    with pytest.raises(errors.KTooLarge):
        spectrum(D, validate([1, 1], 1), 2, 3)


def test_spectrum_monotone_in_degree():
    p = validate([0.5, 1, 2], 2)
    for m in (D, FV):
        lo = spectrum(m, p, 2, 5).eigenvalues
        hi = spectrum(m, p, 3, 5).eigenvalues
        assert all(b <= a + 1e-10 for a, b in zip(lo, hi))


@pytest.mark.parametrize("alpha", [[0.5, 2, 1], [2, 2, 0.5], [1, 0.5, 2, 1]])
def test_exactness_plateau(alpha):
    p = validate(alpha, len(alpha) - 1)
    for m in (D, FV):
        gaps = [spectral_gap(m, p, d) for d in range(1, 5)]
        assert max(abs(g - gaps[0]) for g in gaps) < 1e-8
        assert all(b <= a + 1e-10 for a, b in zip(gaps, gaps[1:]))


def test_gem_and_degree_errors():
    with pytest.raises(errors.UnsupportedModel):
        build(GEM, validate([1, 1, 1], 2), 2)
    with pytest.raises(errors.BasisTooLarge):
        build(D, validate([1, 1, 1, 1], 3), 30)


def test_orthonormalize_breakdown():
    g = np.array([[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(errors.GramBreakdown):
        orthonormalize(g)


def test_orthonormalize_hilbert_like():
    # moments of the uniform law on [0,1]: Hilbert matrix of order 6
    h = np.array([[1.0 / (i + j + 1) for j in range(6)] for i in range(6)])
    C, drift = orthonormalize(h)
    assert drift < 1e-8
    assert np.allclose(np.triu(C), C)


def test_gap_report_keys():
    r = gap_report("fv", validate([1, 1, 1], 2), 2, 2)
    assert r["model"] == "fv" and r["gap"] == pytest.approx(3.0, abs=1e-10)
    assert len(r["eigenvalues"]) == 2


def test_stick_moments_match_dirichlet_for_first_coordinate():
    from simplex_spectra.params import moment

    p = validate([0.5, 1.5, 2], 2)
    assert stick_moments(p, [(3, 0)]) == pytest.approx(moment(p, (3, 0)), rel=1e-13)


# Frozen Gauss-Jacobi oracle: the same stick-fraction basis integrated with a
# 40-point tensor Gauss-Jacobi rule per stick, computed once offline.
GEM_ORACLE = {
    ((1, 1, 1), 2): 2.0000000000000067,
    ((0.5, 1, 2), 1): 2.9999999999999916,
    ((0.5, 1, 2), 2): 2.9999999999999916,
    ((2, 0.5, 1, 1), 2): 1.999999999999993,
}


@pytest.mark.parametrize("key", sorted(GEM_ORACLE))
def test_gem_gap_against_oracle(key):
    alpha, degree = key
    p = validate(list(alpha), len(alpha) - 1)
    est = gem_gap_estimate(p, degree, QuadratureSpec("mc", 200_000, seed=3))
    assert abs(est.gap - GEM_ORACLE[key]) < 4 * est.stderr
    assert est.stderr < 0.05 * est.gap
    # the closed form alpha_N + alpha_{N+1}
    assert GEM_ORACLE[key] == pytest.approx(alpha[-2] + alpha[-1], abs=1e-10)


def test_gem_one_dim_equals_wright_fisher():
    est = gem_gap_estimate(validate([1, 2], 1), 2, QuadratureSpec("mc", 100_000, seed=1))
    assert abs(est.gap - 3.0) < 4 * est.stderr


def test_gem_degree_monotone():
    p = validate([1, 1, 1], 2)
    q = QuadratureSpec("mc", 100_000, seed=5)
    e1, e2 = gem_gap_estimate(p, 1, q), gem_gap_estimate(p, 2, q)
    assert e2.gap <= e1.gap + 3 * math.hypot(e1.stderr, e2.stderr)


def test_gem_deterministic():
    p = validate([1, 1, 1], 2)
    q = QuadratureSpec("mc", 20_000, seed=9)
    assert gem_gap_estimate(p, 1, q) == gem_gap_estimate(p, 1, q)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_gap_grid_values(n):
    for alpha in itertools.product([0.5, 1.0, 2.0], repeat=n + 1):
        p = validate(list(alpha), n)
        want_d = sum(alpha) if n == 1 else alpha[-1]
        assert spectral_gap(D, p, 3) == pytest.approx(want_d, abs=1e-6)
        assert spectral_gap(FV, p, 3) == pytest.approx(sum(alpha), abs=1e-6)

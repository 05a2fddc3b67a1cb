import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from simplex_spectra import errors
from simplex_spectra.forms import (
    DiffusionModel,
    apply_generator,
    carre_du_champ,
    diffusion_matrices,
    energy,
    gamma_eval,
)
from simplex_spectra.params import sample, validate
from simplex_spectra.poly import MultiPoly, integrate, last_coordinate, monomials_up_to, parse
from simplex_spectra.spectral import _monomial_energies

D, FV, GEM = DiffusionModel.DIRICHLET, DiffusionModel.FLEMING_VIOT, DiffusionModel.GEM


def var(n, i):
    return MultiPoly.variable(n, i)


def test_parse_model_names():
    assert DiffusionModel.parse("fv") is FV
    assert DiffusionModel.parse("dirichlet") is D
    with pytest.raises(errors.ConfigError):
        DiffusionModel.parse("heat")


def test_carre_du_champ_examples():
    x1 = var(2, 0)
    assert carre_du_champ(D, x1, x1) == x1 * last_coordinate(2)
    assert carre_du_champ(FV, x1, x1) == x1 - x1 * x1
    assert carre_du_champ(D, MultiPoly.constant(2), MultiPoly.constant(2)).is_zero()
    with pytest.raises(errors.UnsupportedModel):
        carre_du_champ(GEM, x1, x1)


def test_gamma_eval_examples():
    y1 = var(1, 0)
    assert gamma_eval(GEM, y1, y1, [0.5]) == pytest.approx(0.25, abs=1e-15)
    x1 = var(2, 0)
    assert gamma_eval(FV, x1, x1, [0.5, 0.25]) == pytest.approx(0.25, abs=1e-15)
    assert gamma_eval(D, x1, x1, [0.25, 0.25]) == pytest.approx(0.125, abs=1e-15)


def test_gamma_eval_gem_denominator_underflow():
    x1 = var(2, 0)
    with pytest.raises(errors.DenominatorUnderflow):
        gamma_eval(GEM, x1, x1, [0.5, 0.5 - 1e-12])


def test_gem_matrix_symbolic_oracle():
    # a_ij = x_i x_j sum_{k <= i^j} c_ik c_jk / (x_k (1 - S_k)), c_ik = (1 - S_{k-1}) [i=k] - x_k
    x = np.array([0.2, 0.3, 0.1])
    S = np.cumsum(x)
    Sp = np.concatenate([[0.0], S[:-1]])
    ref = np.zeros((3, 3))
    for i in range(3):
        for j in range(3):
            for k in range(min(i, j) + 1):
                ci = (1 - Sp[k]) * (i == k) - x[k]
                cj = (1 - Sp[k]) * (j == k) - x[k]
                ref[i, j] += x[i] * x[j] * ci * cj / (x[k] * (1 - S[k]))
    a, ok = diffusion_matrices(GEM, x)
    assert ok.all()
    assert np.allclose(a[0], ref, rtol=1e-13, atol=1e-15)
    # frozen value of the (1,1) entry; at N=1 it reduces to x(1-x)
    assert a[0, 0, 0] == pytest.approx(0.16, rel=1e-13)


def test_gem_matrix_positive_semidefinite():
    x = sample(validate([1, 1, 1, 1], 3), 0, 500)
    a, ok = diffusion_matrices(GEM, x)
    ev = np.linalg.eigvalsh(a[ok])
    assert ev.min() > -1e-12


def test_apply_generator_examples():
    p1 = validate([1, 1], 1)
    assert apply_generator(D, p1, var(1, 0)).almost_equal(parse("1 + -2 * x1", 1))
    p2 = validate([1, 1, 1], 2)
    assert apply_generator(FV, p2, var(2, 0)).almost_equal(parse("1 + -3 * x1", 2))
    for m in (D, FV):
        assert apply_generator(m, p2, MultiPoly.constant(2, 4.0)).is_zero()
    with pytest.raises(errors.UnsupportedModel):
        apply_generator(GEM, p2, var(2, 0))


def _fd_generator(m, p, f, x, h=1e-4):
    """Central-difference generator from the diffusion matrix and drift."""
    x = np.asarray(x, float)
    n = x.size
    a, _ = diffusion_matrices(m, x)
    a = a[0]
    last = 1 - x.sum()
    alpha = np.asarray(p.alpha)
    if m is D:
        b = alpha[:n] * last - alpha[n] * x
    else:
        b = alpha[:n] - alpha.sum() * x
    e = np.eye(n) * h
    out = 0.0
    for i in range(n):
        di = (f.eval(x + e[i]) - f.eval(x - e[i])) / (2 * h)
        out += b[i] * di
        for j in range(n):
            dij = (
                f.eval(x + e[i] + e[j]) - f.eval(x + e[i] - e[j]) - f.eval(x - e[i] + e[j]) + f.eval(x - e[i] - e[j])
            ) / (4 * h * h)
            out += a[i, j] * dij
    return out


@pytest.mark.parametrize("m", [D, FV])
def test_generator_matches_finite_differences(m):
    p = validate([0.5, 2.0, 1.5], 2)
    f = parse("1 * x1^2 x2 + -2 * x2^3 + 0.5 * x1", 2)
    x = [0.3, 0.25]
    assert apply_generator(m, p, f).eval(x) == pytest.approx(_fd_generator(m, p, f, x), abs=1e-6)


def test_energy_examples():
    p1 = validate([1, 1], 1)
    y = var(1, 0)
    assert energy(D, p1, y, y) == pytest.approx(1 / 6, rel=1e-14)
    assert energy(FV, p1, y, y) == pytest.approx(1 / 6, rel=1e-14)
    p2 = validate([1, 1, 1], 2)
    c = MultiPoly.constant(2)
    assert energy(D, p2, c, c) == 0.0 and energy(FV, p2, c, c) == 0.0
    x1 = var(2, 0)
    assert energy(FV, p2, x1, x1) == pytest.approx(1 / 6, rel=1e-14)
    # Monte Carlo oracle for the same value
    x = sample(p2, 1, 400_000)[:, 0]
    g = x * (1 - x)
    assert abs(g.mean() - 1 / 6) < 4 * g.std() / np.sqrt(g.size)


@pytest.mark.parametrize("m", [D, FV])
@pytest.mark.parametrize("alpha", [[0.5, 2, 1], [1, 1, 1, 1], [2, 0.5]])
def test_closed_form_energies_match_energy(m, alpha):
    n = len(alpha) - 1
    p = validate(alpha, n)
    exps = monomials_up_to(n, 3)
    E = _monomial_energies(m, p, exps)
    for i, k in enumerate(exps):
        for j, l in enumerate(exps):
            ref = energy(m, p, MultiPoly.monomial(k), MultiPoly.monomial(l))
            assert E[i, j] == pytest.approx(ref, rel=1e-11, abs=1e-14)


def polys(n, max_deg=4):
    mono = st.tuples(*[st.integers(0, max_deg) for _ in range(n)]).filter(lambda k: sum(k) <= max_deg)
    return st.dictionaries(mono, st.floats(-2, 2), min_size=1, max_size=5).map(lambda t: MultiPoly(n, t))


def case(n):
    return st.tuples(
        st.lists(st.floats(0.2, 4.0), min_size=n + 1, max_size=n + 1), polys(n), polys(n)
    )


def _scale(f, g):
    return max(1.0, sum(abs(c) for c in f.terms.values()) * sum(abs(c) for c in g.terms.values()))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3).flatmap(case), st.sampled_from([D, FV]))
def test_integration_by_parts(c, m):
    alpha, f, g = c
    p = validate(alpha, f.n)
    lhs = integrate(p, f * apply_generator(m, p, g)) + energy(m, p, f, g)
    assert abs(lhs) < 1e-10 * _scale(f, g)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3).flatmap(case), st.sampled_from([D, FV]))
def test_energy_symmetric_and_cauchy_schwarz(c, m):
    alpha, f, g = c
    p = validate(alpha, f.n)
    efg = energy(m, p, f, g)
    assert efg == pytest.approx(energy(m, p, g, f), rel=1e-10, abs=1e-12)
    eff, egg = energy(m, p, f, f), energy(m, p, g, g)
    assert eff >= -1e-12 and egg >= -1e-12
    assert efg**2 <= eff * egg * (1 + 1e-10) + 1e-20


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3).flatmap(lambda n: st.tuples(polys(n), st.lists(st.floats(0.01, 1.0), min_size=n + 1, max_size=n + 1))))
def test_fv_dominates_dirichlet(c):
    f, w = c
    x = np.asarray(w[:-1]) / sum(w)
    assert gamma_eval(FV, f, f, x) >= gamma_eval(D, f, f, x) - 1e-12


@settings(max_examples=40, deadline=None)
@given(polys(1), polys(1))
def test_n1_models_coincide(f, g):
    assert carre_du_champ(D, f, g).almost_equal(carre_du_champ(FV, f, g), tol=1e-12)

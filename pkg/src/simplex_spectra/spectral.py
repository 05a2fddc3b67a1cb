"""Rayleigh-Ritz approximation of spectral gaps on polynomial subspaces.

For the multivariate Dirichlet diffusion and Fleming-Viot the generators map
polynomials of degree ``d`` to polynomials of degree ``d``, so the Galerkin
eigenvalues are exact eigenvalues.  For GEM the energy matrix is estimated by
Monte Carlo over a basis of monomials in the stick-breaking fractions
``v_k = x_k / (1 - x_1 - ... - x_{k-1})``.
"""
from dataclasses import dataclass, field
import math

import numpy as np
import scipy.linalg
from scipy.special import comb, gammaln

from . import quadrature
from .errors import BasisTooLarge, GramBreakdown, KTooLarge, QuadratureUnstable, UnsupportedModel
from .forms import DiffusionModel, gem_coefficients
from .params import AlphaParams, moments
from .poly import MultiPoly, monomials_up_to

BASIS_CAP = 2000
DRIFT_TOL = 1e-8
GEM_REJECT_LIMIT = 0.01


def orthonormalize(gram):
    """Modified Gram-Schmidt, one reorthogonalization pass, in the metric ``gram``.

    Returns ``(C, drift)``: the columns of ``C`` are coefficient vectors of an
    orthonormal basis (column ``j`` only uses inputs ``0..j``) and ``drift`` is
    ``max |C^T G C - I|``.
    """
    m = gram.shape[0]
    C = np.zeros((m, m))
    GC = np.zeros((m, m))
    for j in range(m):
        v = np.zeros(m)
        v[j] = 1.0
        w = gram[:, j].copy()
        for _ in range(2):
            for i in range(j):
                r = C[:, i] @ w
                v -= r * C[:, i]
                w -= r * GC[:, i]
        norm2 = v @ w
        if not norm2 > 1e-13 * gram[j, j]:
            raise GramBreakdown(f"basis element {j} is numerically dependent on its predecessors")
        norm = math.sqrt(norm2)
        C[:, j] = v / norm
        GC[:, j] = w / norm
    drift = float(np.max(np.abs(C.T @ gram @ C - np.eye(m))))
    return C, drift


def _monomial_energies(m, p, exps):
    """Exact ``E(x^k, x^l)`` for all pairs of exponents."""
    K = np.asarray(exps, dtype=int)
    tot = K[:, None, :] + K[None, :, :]
    n = p.n
    out = np.zeros((len(exps), len(exps)))
    a_last = p.last
    for i in range(n):
        kl = K[:, None, i] * K[None, :, i]
        mask = kl > 0
        if not mask.any():
            continue
        sub = tot[mask].copy()
        sub[:, i] -= 1
        if m is DiffusionModel.DIRICHLET:
            # mu(x^sub * x_{n+1}) = mu(x^sub) * a_last / (|alpha| + |sub|)
            vals = moments(p, sub) * a_last / (p.alpha_total + sub.sum(axis=1))
        else:
            vals = moments(p, sub)
        out[mask] += kl[mask] * vals
    if m is DiffusionModel.FLEMING_VIOT:
        deg = K.sum(axis=1)
        out -= np.outer(deg, deg) * moments(p, tot.reshape(-1, n)).reshape(out.shape)
    return 0.5 * (out + out.T)


@dataclass
class GalerkinSystem:
    """Orthonormal polynomial basis (constant first) and energy matrix ``A``."""

    model: DiffusionModel
    params: AlphaParams
    degree: int
    exponents: list
    coeffs: np.ndarray
    form_matrix: np.ndarray
    drift: float
    _basis: list = field(default=None, repr=False)

    @property
    def basis(self):
        if self._basis is None:
            n = self.params.n
            self._basis = [
                MultiPoly(n, {k: c for k, c in zip(self.exponents, col) if c != 0.0})
                for col in self.coeffs.T
            ]
        return self._basis

    @property
    def size(self):
        return len(self.exponents)

    def basis_degrees(self):
        return np.array([sum(k) for k in self.exponents])

    def eigh(self):
        """Eigenpairs of ``A`` on the complement of the constants, ascending."""
        vals, vecs = scipy.linalg.eigh(self.form_matrix[1:, 1:], driver="ev")
        return vals, vecs


def build(m, p: AlphaParams, degree: int, basis_cap: int = BASIS_CAP) -> GalerkinSystem:
    m = DiffusionModel.parse(m)
    if m is DiffusionModel.GEM:
        raise UnsupportedModel("GEM energies are not polynomial; use gem_gap_estimate")
    degree = int(degree)
    if degree < 1:
        raise BasisTooLarge(f"degree must be >= 1, got {degree}")
    size = int(comb(p.n + degree, p.n, exact=True))
    if size > basis_cap:
        raise BasisTooLarge(f"{size} basis functions exceed the cap {basis_cap}")
    exps = monomials_up_to(p.n, degree)
    K = np.asarray(exps, dtype=int)
    gram = moments(p, (K[:, None, :] + K[None, :, :]).reshape(-1, p.n)).reshape(size, size)
    C, drift = orthonormalize(gram)
    if drift > DRIFT_TOL:
        raise GramBreakdown(f"orthogonality drift {drift:.3g} exceeds {DRIFT_TOL:g}")
    A = C.T @ _monomial_energies(m, p, exps) @ C
    A = 0.5 * (A + A.T)
    # the constant has zero energy exactly
    A[0, :] = 0.0
    A[:, 0] = 0.0
    return GalerkinSystem(m, p, degree, exps, C, A, drift)


def spectral_gap(m, p: AlphaParams, degree: int) -> float:
    vals, _ = build(m, p, degree).eigh()
    return float(vals[0])


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: tuple
    degrees: tuple
    drift: float


def _eigen_degrees(system, vecs, k, tol=1e-8):
    degs = system.basis_degrees()[1:]
    out = []
    for j in range(k):
        w = np.abs(vecs[:, j])
        out.append(int(degs[w > tol * w.max()].max()))
    return out


def spectrum(m, p: AlphaParams, degree: int, k: int) -> Spectrum:
    """The ``k`` smallest nonzero Galerkin eigenvalues with eigenpolynomial degrees."""
    system = build(m, p, degree)
    if not 1 <= int(k) <= system.size - 1:
        raise KTooLarge(f"k={k} but the basis has only {system.size - 1} non-constant elements")
    vals, vecs = system.eigh()
    k = int(k)
    return Spectrum(tuple(float(v) for v in vals[:k]), tuple(_eigen_degrees(system, vecs, k)), system.drift)


def gap_report(m, p: AlphaParams, degree: int, k: int = 1) -> dict:
    m = DiffusionModel.parse(m)
    sp = spectrum(m, p, degree, k)
    return {
        "model": m.value,
        "alpha": list(p.alpha),
        "degree": int(degree),
        "gap": sp.eigenvalues[0],
        "eigenvalues": list(sp.eigenvalues),
        "eigen_degrees": list(sp.degrees),
        "orthogonality_drift": sp.drift,
    }


# GEM


def stick_fractions(x):
    """``v_k = x_k / (1 - S_{k-1})`` and the denominators ``1 - S_{k-1}``."""
    x = np.atleast_2d(x)
    prev = np.concatenate([np.zeros((x.shape[0], 1)), np.cumsum(x, axis=1)[:, :-1]], axis=1)
    rem = 1.0 - prev
    with np.errstate(divide="ignore", invalid="ignore"):
        return x / rem, rem


def stick_moments(p: AlphaParams, ks):
    """Exact ``E[prod v_k**e_k]`` for the independent Beta stick fractions."""
    a, b = (np.asarray(t) for t in quadrature.stick_params(p))
    ks = np.asarray(ks, dtype=float)
    lg = gammaln(a + ks) + gammaln(a + b) - gammaln(a) - gammaln(a + b + ks)
    return np.exp(lg.sum(axis=-1))


@dataclass(frozen=True)
class GemGapEstimate:
    gap: float
    stderr: float
    samples: int
    rejected_fraction: float
    degree: int


def _stick_gradients(x, exps):
    """Gradients in ``x`` of the monomials ``v**e``; shape ``(m, len(exps), n)``."""
    v, rem = stick_fractions(x)
    s, n = x.shape
    # J[s, k, i] = dv_k / dx_i
    J = np.zeros((s, n, n))
    idx = np.arange(n)
    J[:, idx, idx] = 1.0 / rem
    for k in range(1, n):
        J[:, k, :k] = (x[:, k] / rem[:, k] ** 2)[:, None]
    E = np.asarray(exps, dtype=int)
    gv = np.zeros((s, len(exps), n))
    for c in range(n):
        lower = E.copy()
        lower[:, c] = np.maximum(lower[:, c] - 1, 0)
        gv[:, :, c] = E[:, c] * np.prod(v[:, None, :] ** lower[None, :, :], axis=-1)
    return np.einsum("smk,ski->smi", gv, J)


def gem_gap_estimate(p: AlphaParams, degree: int, quad: quadrature.QuadratureSpec) -> GemGapEstimate:
    """Galerkin GEM gap with Monte Carlo energy matrix; estimate and standard error.

    The standard error is the first-order delta-method error of the smallest
    eigenvalue, ``sd(w^T M(x) w) / sqrt(n)`` with ``w`` its eigenvector.
    """
    degree = int(degree)
    if degree < 1:
        raise BasisTooLarge(f"degree must be >= 1, got {degree}")
    exps = monomials_up_to(p.n, degree)
    E = np.asarray(exps, dtype=int)
    gram = stick_moments(p, (E[:, None, :] + E[None, :, :]).reshape(-1, p.n)).reshape(len(exps), len(exps))
    C, drift = orthonormalize(gram)
    if drift > DRIFT_TOL:
        raise GramBreakdown(f"orthogonality drift {drift:.3g} exceeds {DRIFT_TOL:g}")
    Cn = C[:, 1:]
    q = Cn.shape[1]

    def fn(x, w):
        a, ok = gem_coefficients(x)
        x, a = x[ok], a[ok]
        gb = np.einsum("smi,mu->sui", _stick_gradients(x, exps), Cn)
        M = np.einsum("sui,sij,svj->suv", gb, a, gb).reshape(-1, q * q)
        return M.sum(axis=0), M.T @ M, np.array([float(ok.sum())])

    s1, s2, count = quadrature.reduce_batches(p, quad, fn)
    n_ok = int(count[0])
    rejected = 1.0 - n_ok / int(quad.samples)
    if rejected > GEM_REJECT_LIMIT:
        raise QuadratureUnstable(f"{rejected:.2%} of GEM quadrature points hit a stick boundary")
    A = (s1 / n_ok).reshape(q, q)
    A = 0.5 * (A + A.T)
    vals, vecs = scipy.linalg.eigh(A, driver="ev")
    w = np.outer(vecs[:, 0], vecs[:, 0]).ravel()
    second = w @ (s2 / n_ok) @ w
    var = max(second - vals[0] ** 2, 0.0)
    se = math.sqrt(var / max(n_ok - 1, 1))
    return GemGapEstimate(float(vals[0]), se, n_ok, rejected, degree)

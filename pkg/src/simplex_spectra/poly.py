"""Sparse multivariate polynomials in x_1..x_n with float coefficients."""
import math
import re

import numpy as np

from . import params as _params
from .errors import DimensionMismatch, IndexOutOfRange

PRUNE_TOL = 1e-14


class MultiPoly:
    """Immutable sparse polynomial.

    ``terms`` maps exponent tuples of length ``n`` to coefficients.  Every
    arithmetic result drops coefficients with absolute value below
    ``PRUNE_TOL``.
    """

    __slots__ = ("n", "terms")

    def __init__(self, n, terms=None):
        if n < 1:
            raise DimensionMismatch("ambient dimension must be >= 1")
        clean = {}
        for k, c in (terms or {}).items():
            k = tuple(int(e) for e in k)
            if len(k) != n or min(k) < 0:
                raise DimensionMismatch(f"bad exponent {k} for n={n}")
            c = float(c)
            if abs(c) >= PRUNE_TOL:
                clean[k] = clean.get(k, 0.0) + c
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "terms", {k: c for k, c in clean.items() if abs(c) >= PRUNE_TOL})

    def __setattr__(self, name, value):
        raise AttributeError("MultiPoly is immutable")

    @classmethod
    def _raw(cls, n, terms):
        obj = object.__new__(cls)
        object.__setattr__(obj, "n", n)
        object.__setattr__(obj, "terms", {k: c for k, c in terms.items() if abs(c) >= PRUNE_TOL})
        return obj

    # construction helpers
    @classmethod
    def constant(cls, n, c=1.0):
        return cls(n, {(0,) * n: c})

    @classmethod
    def zero(cls, n):
        return cls(n)

    @classmethod
    def variable(cls, n, i):
        """The coordinate ``x_{i+1}`` (``i`` is 0-based)."""
        if not 0 <= i < n:
            raise IndexOutOfRange(f"coordinate index {i} outside 0..{n - 1}")
        k = [0] * n
        k[i] = 1
        return cls(n, {tuple(k): 1.0})

    @classmethod
    def monomial(cls, k, c=1.0):
        return cls(len(k), {tuple(k): c})

    # structure
    def degree(self):
        return max((sum(k) for k in self.terms), default=0)

    def is_zero(self):
        return not self.terms

    def coeff(self, k):
        return self.terms.get(tuple(k), 0.0)

    def __eq__(self, other):
        if isinstance(other, (int, float)):
            other = MultiPoly.constant(self.n, other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def almost_equal(self, other, tol=1e-12):
        if self.n != other.n:
            return False
        keys = set(self.terms) | set(other.terms)
        scale = max([1.0] + [abs(c) for c in self.terms.values()])
        return all(abs(self.coeff(k) - other.coeff(k)) <= tol * scale for k in keys)

    # arithmetic
    def _check(self, other):
        if isinstance(other, (int, float)):
            return MultiPoly.constant(self.n, other)
        if not isinstance(other, MultiPoly):
            raise TypeError(f"cannot combine MultiPoly with {type(other).__name__}")
        if other.n != self.n:
            raise DimensionMismatch(f"ambient dimensions differ: {self.n} vs {other.n}")
        return other

    def __add__(self, other):
        other = self._check(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0.0) + c
        return MultiPoly._raw(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly._raw(self.n, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def scale(self, c):
        c = float(c)
        return MultiPoly._raw(self.n, {k: c * v for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating)):
            return self.scale(other)
        other = self._check(other)
        out = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                out[k] = out.get(k, 0.0) + c1 * c2
        return MultiPoly._raw(self.n, out)

    __rmul__ = __mul__

    def __pow__(self, e):
        out = MultiPoly.constant(self.n)
        for _ in range(int(e)):
            out = out * self
        return out

    def partial(self, i):
        """Partial derivative in ``x_{i+1}`` (``i`` is 0-based)."""
        if not 0 <= i < self.n:
            raise IndexOutOfRange(f"coordinate index {i} outside 0..{self.n - 1}")
        out = {}
        for k, c in self.terms.items():
            if k[i]:
                kk = list(k)
                kk[i] -= 1
                kk = tuple(kk)
                out[kk] = out.get(kk, 0.0) + c * k[i]
        return MultiPoly._raw(self.n, out)

    def gradient(self):
        return [self.partial(i) for i in range(self.n)]

    # evaluation
    def __call__(self, x):
        return self.eval(x)

    def eval(self, x):
        """Evaluate at one point ``(n,)`` or a batch ``(m, n)``."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n:
            raise DimensionMismatch(f"point has {x.shape[-1]} coordinates, expected {self.n}")
        if not self.terms:
            out = np.zeros(x.shape[:-1])
        else:
            ks = np.array(list(self.terms), dtype=float)
            cs = np.array(list(self.terms.values()))
            out = (np.prod(x[..., None, :] ** ks, axis=-1) * cs).sum(axis=-1)
        return float(out) if out.ndim == 0 else out

    def eval_grad(self, x):
        """Values and gradients at a batch of points: shapes ``(m,)`` and ``(m, n)``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        vals = self.eval(x)
        grads = np.stack([self.partial(i).eval(x) for i in range(self.n)], axis=-1)
        return np.atleast_1d(vals), grads.reshape(x.shape[0], self.n)

    # text
    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for k in sorted(self.terms, key=lambda k: (sum(k), tuple(-e for e in k))):
            mono = " ".join(
                f"x{i + 1}" if e == 1 else f"x{i + 1}^{e}" for i, e in enumerate(k) if e
            )
            coef = repr(self.terms[k])
            parts.append(f"{coef} * {mono}" if mono else coef)
        return " + ".join(parts)

    def __repr__(self):
        return f"MultiPoly(n={self.n}, '{self}')"


_TERM = re.compile(r"^\s*([-+0-9.eEinfa]+)\s*(?:\*\s*(.*))?$")


def parse(text, n):
    """Inverse of ``str(MultiPoly)``: ``"coeff * x1^a x2^b + ..."``."""
    text = text.strip()
    if text == "0":
        return MultiPoly.zero(n)
    terms = {}
    for chunk in re.split(r"\s\+\s", text):
        m = _TERM.match(chunk)
        if not m:
            raise ValueError(f"cannot parse term {chunk!r}")
        k = [0] * n
        for factor in (m.group(2) or "").split():
            name, _, power = factor.partition("^")
            idx = int(name.lstrip("x")) - 1
            if not 0 <= idx < n:
                raise IndexOutOfRange(f"variable {name} outside x1..x{n}")
            k[idx] += int(power or 1)
        k = tuple(k)
        terms[k] = terms.get(k, 0.0) + float(m.group(1))
    return MultiPoly(n, terms)


def last_coordinate(n):
    """The polynomial ``1 - x_1 - ... - x_n``."""
    terms = {(0,) * n: 1.0}
    for i in range(n):
        k = [0] * n
        k[i] = 1
        terms[tuple(k)] = -1.0
    return MultiPoly(n, terms)


def integrate(p, f: MultiPoly):
    """Exact integral of ``f`` against the Dirichlet law ``p``."""
    if f.n != p.n:
        raise DimensionMismatch(f"polynomial lives in dimension {f.n}, parameters in {p.n}")
    return math.fsum(c * _params.moment(p, k) for k, c in f.terms.items())


def monomials_up_to(n, degree):
    """All exponent tuples with total degree <= ``degree``, graded then reverse-lex."""
    out = []
    for d in range(degree + 1):
        out.extend(_compositions(n, d))
    return out


def _compositions(n, d):
    if n == 1:
        return [(d,)]
    res = []
    for first in range(d, -1, -1):
        for rest in _compositions(n - 1, d - first):
            res.append((first,) + rest)
    return res

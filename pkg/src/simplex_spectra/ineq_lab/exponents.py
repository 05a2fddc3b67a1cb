"""Closed-form Nash exponents for the Dirichlet law."""
from dataclasses import dataclass
import math

from ..params import AlphaParams


def p_alpha(p: AlphaParams) -> float:
    """Exponent for which the multivariate Dirichlet form satisfies a Nash inequality."""
    return math.fsum(max(1.0, 2.0 * a) for a in p.head) + max(p.last - 1.0, 0.0)


def _max_leave_one_out(values):
    total = math.fsum(values)
    return max(total - v for v in values) if len(values) > 1 else 0.0


def p_tilde(p: AlphaParams) -> float:
    """Lower bound on any Nash exponent of the multivariate form."""
    first = _max_leave_one_out(list(p.alpha))
    second = p.last + _max_leave_one_out([max(1.0, a) for a in p.head])
    return max(first, second)


def p_prime(p: AlphaParams) -> float:
    """Lower bound on any Nash exponent of the Fleming-Viot form."""
    first = math.fsum(p.head)
    second = 0.5 * p.last + 0.5 * _max_leave_one_out([max(1.0, a) for a in p.head])
    return max(first, second)


def is_sharp(p: AlphaParams) -> bool:
    """Upper and lower exponents coincide when every head weight is <= 1/2 and the last is >= 1."""
    return max(p.head) <= 0.5 and p.last >= 1.0


@dataclass(frozen=True)
class ExponentSummary:
    p_alpha: float
    p_tilde: float
    p_prime: float
    sharp: bool
    p_critical: float = None


def exponent_summary(p: AlphaParams) -> ExponentSummary:
    sharp = is_sharp(p)
    pc = p.n + p.last - 1.0 if sharp else None
    return ExponentSummary(p_alpha(p), p_tilde(p), p_prime(p), sharp, pc)

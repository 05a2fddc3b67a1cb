"""Test-function families, Nash-type functionals and exponent fits."""
from ..quadrature import QuadratureSpec, SupportBox
from .exponents import ExponentSummary, exponent_summary, is_sharp, p_alpha, p_prime, p_tilde
from .families import (
    H_PRIME_MAX,
    FamilyKind,
    ScalingTheory,
    TestFamily,
    TestFunction,
    bump_index_sets,
    bump_profile,
    bump_profile_prime,
    build_bump_family,
    build_corner_all_family,
    build_corner_complement_family,
    build_family,
    build_polynomial_family,
    default_eps_grid,
    eps_limit,
    scaling_theory,
)
from .measure import (
    FunctionalTriple,
    RateCurve,
    SharpnessResult,
    beta_required,
    exponent_fit,
    functional_triple,
    functional_triples,
    matched_radii,
    nash_ratio,
    sharpness_scan,
)

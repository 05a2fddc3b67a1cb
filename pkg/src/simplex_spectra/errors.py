"""Exception hierarchy.

Two families matter to callers: :class:`ConfigError` (bad input, the CLI
maps it to exit code 2) and :class:`NumericalAlarm` (a computation refused to
return a number it cannot stand behind, exit code 3).
"""


class SimplexSpectraError(Exception):
    pass


class ConfigError(SimplexSpectraError, ValueError):
    pass


class NumericalAlarm(SimplexSpectraError, ArithmeticError):
    pass


class NonPositiveAlpha(ConfigError):
    pass


class DimensionMismatch(ConfigError):
    pass


class BadN(ConfigError):
    pass


class OutsideSimplex(ConfigError):
    pass


class IndexOutOfRange(ConfigError, IndexError):
    pass


class UnsupportedModel(ConfigError):
    pass


class BasisTooLarge(ConfigError):
    pass


class KTooLarge(ConfigError):
    pass


class EpsilonTooLarge(ConfigError):
    pass


class TooFewPoints(ConfigError):
    pass


class NonPositiveOrdinate(ConfigError):
    pass


class BelowThreshold(ConfigError):
    pass


class ROutOfRange(ConfigError):
    pass


class NoThreshold(ConfigError):
    """No finite s makes the Cheeger drift bound hold for this gamma."""


class ZeroL1Norm(ConfigError):
    pass


class BoundaryDivergence(NumericalAlarm):
    pass


class DenominatorUnderflow(NumericalAlarm):
    pass


class QuadratureUnstable(NumericalAlarm):
    pass


class GramBreakdown(NumericalAlarm):
    pass


class DegenerateSupport(NumericalAlarm):
    pass


class ZeroEnergy(NumericalAlarm):
    pass


class ClampExplosion(NumericalAlarm):
    pass


class InsufficientDecay(NumericalAlarm):
    pass

"""Exception types shared across the package."""


class PtdysonError(Exception):
    """Base class for all package errors."""


class NotInUnbrokenRegime(PtdysonError):
    """Static similarity transform requested outside its validity domain."""


class SingularConfiguration(PtdysonError):
    """Map coefficients left the valid chart (cos(theta_plus) or the
    2*cos(theta_plus) + alpha_plus*alpha_minus denominator vanished)."""


class RegimeMismatch(PtdysonError):
    """Integration constants tagged for a different PT regime than the params."""


class ThetaPlusDomain(PtdysonError):
    """|m * d(alpha_minus)/dt| > 2, so theta_plus recovery has no real arcsin."""


class AlphaMinusZero(PtdysonError):
    """alpha_minus = 0 makes the alpha_plus recovery formula singular."""


class LogDomain(PtdysonError):
    """The theta_minus recovery log has a non-positive (or complex) argument."""


class ExceptionalDenominator(PtdysonError):
    """m*Omega_minus^2 = 2*lambda: theta_minus recovery denominator vanishes."""


class StepFailure(PtdysonError):
    """Adaptive integration could not meet its accuracy/residual contract."""


class NonPositiveRho(PtdysonError):
    """Ermakov-Pinney solution left the rho > 0 half-line."""


class BoundaryContamination(PtdysonError):
    """Grid state no longer decays below tolerance at the domain boundary."""


class ConvergenceFailure(PtdysonError):
    """Matrix-exponential-times-vector application outside its trust range."""


class ConfigError(PtdysonError):
    """Scenario configuration violates the schema."""

"""Exception types shared across the package.

The CLI maps ConfigError to exit code 1 and NumericalError to exit code 2.
"""


class ConfigError(Exception):
    """Raised for invalid, inconsistent, or unknown configuration input."""


class NumericalError(Exception):
    """Raised when a computation leaves its valid numerical domain.

    Examples: a covariance matrix with a significantly negative eigenvalue,
    an ill-conditioned pilot covariance, or a nonpositive SINR denominator.
    """

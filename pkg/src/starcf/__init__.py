"""Cell-free massive MIMO downlink simulator with a dual-mode amplifying
reconfigurable surface, time-correlated fading, and phase noise.

Closed-form spectral efficiency evaluation plus an independent Monte Carlo
estimator for cross-validation, driven by one reproducible configuration.
"""

from .errors import ConfigError, NumericalError

__all__ = ["ConfigError", "NumericalError"]
__version__ = "0.1.0"

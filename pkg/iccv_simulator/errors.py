from typing import Optional


class ICCVError(Exception):
    """Base class for every error raised by iccv_simulator."""


class InvalidArgumentError(ICCVError, ValueError):
    pass


class FactorizationError(ICCVError, ValueError):
    """Raised when a matrix that must be positive definite is not."""

    def __init__(self, pivot: int, size: int):
        self.pivot = pivot
        self.size = size
        super().__init__(
            f"Matrix of size {size} is not positive definite: "
            f"factorization failed at pivot {pivot} (0-based)."
        )


class UnsupportedPriorError(ICCVError, ValueError):
    pass


class SingularPriorError(ICCVError, ValueError):
    pass


class UnsupportedModelError(ICCVError, ValueError):
    pass


class PreconditionError(ICCVError):
    pass


class SearchFailureError(ICCVError):
    def __init__(self, alpha: float, min_size: float, z_at_min: float, hi: float):
        self.alpha = alpha
        self.min_size = min_size
        self.z_at_min = z_at_min
        super().__init__(
            f"No critical value on the grid up to {hi:g} keeps size at or below {alpha:g}; "
            f"the smallest estimated size was {min_size:.6f} at z={z_at_min:g}. "
            f"Raise the grid upper bound."
        )


class NoThresholdError(ICCVError):
    pass


class InconsistentSummaryError(ICCVError, ValueError):
    pass


class InsufficientDataError(ICCVError, ValueError):
    pass


class ConfigError(ICCVError, ValueError):
    def __init__(self, message: str, key: Optional[str] = None):
        self.key = key
        super().__init__(message)

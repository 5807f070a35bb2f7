"""Exception hierarchy shared by every ToTMNet module"""

from typing import Optional


class ToTMNetError(Exception):
    """Base class for all ToTMNet errors"""


class InvalidLengthError(ToTMNetError, ValueError):
    """A transform or embedding length is not usable (empty, not a power of two, too short)"""


class DimensionError(ToTMNetError, ValueError):
    """Array shapes disagree"""


class ConfigurationError(ToTMNetError, ValueError):
    """A setting, variant or parameter set is inconsistent"""


class OutOfBandError(ToTMNetError, ValueError):
    """A reference frequency falls outside the analysis window"""


class CorrectnessError(ToTMNetError, AssertionError):
    """Two computations that must agree did not"""


class DivergenceError(ToTMNetError, RuntimeError):
    """Training produced a non-finite loss"""


class CheckpointMismatchError(ToTMNetError, ValueError):
    """A checkpoint does not match the expected format or model shapes"""

    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(message)
        self.path = path

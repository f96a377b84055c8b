"""Exception hierarchy shared by every module."""


class QmcspError(Exception):
    """Base class for package errors."""


class DimensionError(QmcspError, ValueError):
    """Objects with incompatible qubit counts or malformed shapes."""


class ResourceError(QmcspError):
    """A dimension cap or enumeration budget would be exceeded."""

    def __init__(self, message: str, count: int | None = None):
        super().__init__(message)
        self.count = count


class NotSynthesizable(QmcspError):
    """No circuit of size <= s_max reaches the requested precision."""

    def __init__(self, message: str, best_fidelity: float):
        super().__init__(message)
        self.best_fidelity = best_fidelity


class PromiseViolation(QmcspError):
    """An oracle answered Unpromised (or nothing passed) where a reduction needed a decision."""

    def __init__(self, message: str, query: dict | None = None):
        super().__init__(message)
        self.query = query or {}


class UnsupportedConfiguration(QmcspError, ValueError):
    """A documented but unsupported parameter combination."""

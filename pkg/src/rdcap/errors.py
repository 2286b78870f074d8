"""Exception types shared across the package."""


class RdcapError(Exception):
    """Base class for all package errors."""


class ConfigError(RdcapError):
    """Invalid or inconsistent configuration values."""


class DomainError(RdcapError):
    """Argument outside the mathematical domain of an operation."""


class RouteError(RdcapError):
    """Invalid routing request (e.g. source equals destination)."""


class DivergenceError(RdcapError):
    """A quantity diverges (zero success probability and similar)."""

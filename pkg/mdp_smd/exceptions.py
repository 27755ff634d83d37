"""
mdp_smd.exceptions
~~~~~~~~~~~~~~~~~~
Custom exceptions for the solver toolkit.
"""


class MdpSmdError(Exception):
    """Base class for every error raised by mdp_smd."""
    pass


class DomainError(MdpSmdError, ValueError):
    """Raised when an argument lies outside the operation's domain."""
    pass


class SingularMatrix(MdpSmdError):
    """Raised when a linear system is singular within pivot tolerance."""
    pass


class EmptyDistribution(MdpSmdError):
    """Raised when sampling from a distribution with zero total weight."""
    pass


class StepBoundViolation(MdpSmdError):
    """Raised when a simplex-side step has ‖η·g̃‖∞ > 1/2."""
    pass


class NonFiniteIterate(MdpSmdError):
    """Raised when an iterate or gradient becomes NaN or infinite."""
    pass


class NonUniqueStationary(MdpSmdError):
    """Raised when a chain has no unique stationary distribution."""
    pass


class NotMixing(MdpSmdError):
    """Raised when some policy's chain never reaches the mixing threshold."""
    pass


class OracleTooLarge(MdpSmdError):
    """Raised when an exact oracle is asked to enumerate beyond its limits."""
    pass


class ConfigError(MdpSmdError):
    """Raised on invalid configuration or missing solver inputs."""
    pass


class InstanceFormatError(ConfigError):
    """Raised when an instance / policy / game file fails validation."""
    pass


class InfeasibleInstance(MdpSmdError):
    """Raised when a constrained instance admits no feasible occupancy."""
    pass

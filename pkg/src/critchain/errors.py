"""Exception hierarchy shared by every module."""

from __future__ import annotations


class CritchainError(Exception):
    """Base class for all errors raised by the package."""


class RangeError(CritchainError, ValueError):
    """A parameter lies outside its admissible range."""


class UnstableRegime(CritchainError, ValueError):
    """The requested ground state or steady state does not exist."""


class HalfFillingError(CritchainError):
    """A discrete Fermi window does not hold exactly L/2 electrons."""


class TruncationError(CritchainError):
    """A truncated Fock-space result is not converged in the cutoff."""


class SingularLiouvillian(CritchainError):
    """The trace-constrained steady-state system is rank deficient."""


class StepError(CritchainError):
    """Finite-difference estimates at h and h/2 disagree."""


class GridError(CritchainError):
    """A quadrature grid misses a significant part of the probability mass."""


class StabilityError(CritchainError):
    """A covariance matrix lost positive definiteness during integration."""


class PurityPole(CritchainError, ZeroDivisionError):
    """The Gaussian QFI prefactor is evaluated at its pole."""


class ConventionError(CritchainError):
    """Oracle arbitration could not single out one QFI convention."""


class ConfigError(CritchainError):
    """A configuration file or command-line option is malformed."""

"""
Date: October 19th, 2026

This file contains the exceptions raised across twinbeam. Each error carries
the process exit status the command line driver reports for it.

"""


class TwinBeamError(Exception):
    """Base class for every error raised by twinbeam."""

    exit_code: int = 1
    """The exit status reported by the command line driver."""


class InvalidSpec(TwinBeamError, ValueError):
    """A run spec, probe configuration or argument is malformed."""

    exit_code = 2


class Infeasible(TwinBeamError):
    """The requested photon budget cannot be met by the probe scenario."""

    exit_code = 3


class NoRoot(TwinBeamError):
    """The seed amplitude solve could not bracket the photon budget."""

    exit_code = 3


class TruncationUnsafe(TwinBeamError):
    """Population leaked above the Fock cutoff of the oracle."""

    exit_code = 3


class ZeroDenominator(TwinBeamError, ZeroDivisionError):
    """An observable is undefined because a mean photon number vanishes."""

    exit_code = 3


class InsensitiveObservable(TwinBeamError):
    """The observable does not respond to the absorbance, so its error is infinite."""

    exit_code = 3


class DerivativeUnstable(TwinBeamError):
    """Finite differences at two step sizes disagree."""

    exit_code = 4


class ValidationFailed(TwinBeamError):
    """The symbolic moments and the Fock oracle disagree."""

    exit_code = 4


class PoorFit(TwinBeamError):
    """A log-log scaling fit is not straight enough to be trusted."""

    exit_code = 4

    def __init__(self, message: str, fit=None):
        super().__init__(message)
        self.fit = fit


class VarianceUnresolved(TwinBeamError):
    """An observable's variance came out negative, below what the arithmetic resolves."""

    exit_code = 4

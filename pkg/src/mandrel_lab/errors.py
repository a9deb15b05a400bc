"""Exception hierarchy shared across the laboratory.

The CLI maps these onto exit codes: precondition failures (including
under-resolved grids) exit 2, numerical failures exit 3, certificate
failures exit 4.
"""


class LabError(Exception):
    """Base class for laboratory errors."""

    exit_code = 3


class PreconditionError(LabError):
    """Invalid input, parameter out of range, or unsupported request."""

    exit_code = 2


class ResolutionError(PreconditionError):
    """Grid too coarse to resolve the requested construction."""


class NumericalError(LabError):
    """Divergence or loss of accuracy during a computation."""

    exit_code = 3


class CertificateError(LabError):
    """A certificate inequality that must hold has failed."""

    exit_code = 4

"""Error types shared across the package.

Every domain error carries a stable ``code`` string so the command line tool
can map failures onto exit codes and machine-readable reports without parsing
messages.
"""

from __future__ import annotations


class AdlError(Exception):
    """Base class for domain errors; ``code`` is a stable identifier."""

    code = "ADL_ERROR"

    def __init__(self, message: str = ""):
        super().__init__(message or self.__doc__)


class DegreeOutOfRange(AdlError):
    """A form degree left the valid range 0..n."""

    code = "DEGREE_OUT_OF_RANGE"


class DegreeMismatch(AdlError):
    """Operands live in different degrees or on different tori."""

    code = "DEGREE_MISMATCH"


class VariantMismatch(AdlError):
    """Operation is not defined for this theory variant."""

    code = "VARIANT_MISMATCH"


class NotImplementedInCalculus(AdlError):
    """Requested case is outside the implemented calculus."""

    code = "NOT_IMPLEMENTED"


class MasslessMode(AdlError):
    """Quadratic form has a zero eigenvalue on a retained mode."""

    code = "MASSLESS_MODE"


class MasslessSector(AdlError):
    """Smearing meets the zero-mode sector where the propagator is undefined."""

    code = "MASSLESS_SECTOR"


class TooLarge(AdlError):
    """Combinatorial size limit exceeded (polynomial degree above 24)."""

    code = "TOO_LARGE"


class QuadratureFail(AdlError):
    """Numerical quadrature did not reach the requested accuracy."""

    code = "QUADRATURE_FAIL"


class LiftRequired(AdlError):
    """Observable must be lifted to the free p-form theory first."""

    code = "E_NEEDS_LIFT"


class IOFail(AdlError):
    """Input/output failure (missing file, malformed document)."""

    code = "E_IO"

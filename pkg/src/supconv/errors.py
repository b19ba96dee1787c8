"""Exception hierarchy shared by all supconv modules."""


class SupconvError(Exception):
    """Base class for every error raised by the package."""


class DomainError(SupconvError, ValueError):
    """An argument lies outside the range where the formula is defined."""


class QuadratureFailure(SupconvError):
    """Adaptive quadrature did not reach the requested accuracy."""


class IndeterminateTail(SupconvError):
    """Neither convergence nor divergence of an improper integral could be certified."""


class RootBracketFailure(SupconvError):
    """No sign change was found for a monotone root problem below the overflow cap."""


class EllipticityError(SupconvError, ValueError):
    """A coefficient matrix field is not uniformly elliptic."""


class SingularOperator(SupconvError):
    """An assembled operator has a degenerate diagonal."""


class LinearSolveFailure(SupconvError):
    """A sparse linear solve did not meet its residual target."""


class CertificateNotSatisfied(SupconvError):
    """Fixed-point iteration requested on data that fails the smallness test."""


class InvariantBallViolation(SupconvError, RuntimeWarning):
    """A fixed-point iterate left the certified ball; issued as a warning, not raised."""

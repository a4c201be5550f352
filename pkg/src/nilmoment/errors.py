"""Exception hierarchy shared by every module."""


class NilmomentError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(NilmomentError, ValueError):
    pass


class JacobiViolation(NilmomentError):
    def __init__(self, residual, tol):
        super().__init__(f"bracket violates the Jacobi identity: residual {residual:.3e} > tol {tol:.1e}")
        self.residual = residual
        self.tol = tol


class NotNilpotent(NilmomentError):
    pass


class SingularMatrix(NilmomentError):
    pass


class ZeroVector(NilmomentError):
    pass


class NonOrthonormalBasis(NilmomentError):
    pass


class NotInW(NilmomentError):
    pass


class NotAnIdealSum(NilmomentError):
    def __init__(self, component, norm):
        super().__init__(f"not a sum of ideals: {component} has norm {norm:.3e}")
        self.component = component
        self.norm = norm


class NonCommutingDerivations(NilmomentError):
    pass


class NotThetaStable(NilmomentError):
    pass


class ParseError(NilmomentError):
    """Malformed input document. ``where`` names the offending field or line."""

    def __init__(self, message, where=None):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where

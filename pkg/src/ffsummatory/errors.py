"""Exception hierarchy.

Input problems derive from :class:`InputError` (CLI exit status 1); failed
mathematical self-checks derive from :class:`VerificationError` (exit status 2).
"""


class FFSummatoryError(Exception):
    """Base class for all errors raised by this package."""

    code = "Error"

    def to_json(self):
        return {"error": self.code, "message": str(self)}


class InputError(FFSummatoryError):
    code = "InputError"


class VerificationError(FFSummatoryError):
    code = "VerificationError"


# field arithmetic
class NonPrimeError(InputError):
    code = "NonPrime"


class FieldOverflowError(InputError):
    code = "Overflow"


class FieldMismatchError(InputError):
    code = "FieldMismatch"


class DivisionByZeroError(InputError, ZeroDivisionError):
    code = "DivisionByZero"


class EvenCharacteristicError(InputError):
    code = "EvenCharacteristic"


class FieldTooLargeError(InputError):
    code = "FieldTooLarge"


# curves and zeta functions
class CurveSpecError(InputError):
    code = "CurveSpec"


class SingularCurveError(InputError):
    code = "SingularCurve"


class PoleError(InputError):
    code = "PoleAt"

    def __init__(self, u):
        super().__init__(f"zeta function has a pole at u = {u}")
        self.u = u


class NonIntegralError(VerificationError):
    code = "NonIntegral"


class NoConvergenceError(VerificationError):
    code = "NoConvergence"

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class RHViolationError(VerificationError):
    code = "RHViolation"


# explicit formulas
class NonSimpleZerosError(InputError):
    code = "NonSimpleZeros"

    def __init__(self, multiplicities):
        super().__init__(f"zeta function has repeated zeros (multiplicities {list(multiplicities)})")
        self.multiplicities = tuple(multiplicities)


class ImaginaryResidueError(VerificationError):
    code = "ImaginaryResidue"


class NonConstantResidualError(VerificationError):
    code = "NonConstantResidual"


class OutOfRangeError(InputError):
    code = "OutOfRange"


# distributions and random matrices
class DomainTooLargeError(InputError):
    code = "DomainTooLarge"


class RepeatedAngleError(InputError):
    code = "RepeatedAngle"


class GenusTooLargeError(InputError):
    code = "GenusTooLarge"


class FamilyTooLargeError(InputError):
    code = "FamilyTooLarge"

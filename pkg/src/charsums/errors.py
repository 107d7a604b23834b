"""Exception hierarchy.

`ValidationError` subclasses signal bad input (CLI exit code 2), every other
`CharSumError` is a compute failure (exit code 3) and `OracleMismatch` is a
disagreement between two routes to the same quantity (exit code 4).
"""


class CharSumError(Exception):
    pass


class ValidationError(CharSumError, ValueError):
    pass


class CompositeModulus(ValidationError):
    pass


class ZeroArgument(ValidationError):
    pass


class PrincipalCharacter(ValidationError):
    pass


class ConstantPolynomial(ValidationError):
    pass


class AllCoefficientsZero(ValidationError):
    pass


class ZeroCoefficient(ValidationError):
    pass


class RegimeError(ValidationError):
    pass


class CeilingExceeded(ValidationError):
    pass


class OracleTooLarge(ValidationError):
    pass


class FactorizationFailure(CharSumError):
    pass


class OracleMismatch(CharSumError):
    pass

"""Exception hierarchy.

Errors split into two families so the command line can map them onto exit
codes: bad input (2) and mathematical obstructions (3).
"""


class TCSpaceError(Exception):
    exit_code = 1


class InputError(TCSpaceError, ValueError):
    exit_code = 2


class MathError(TCSpaceError, ArithmeticError):
    exit_code = 3


class ParseError(InputError):
    pass


class ValidationError(InputError):
    pass


class DuplicateAbscissa(InputError):
    pass


class ZeroVector(InputError):
    pass


class ZeroWeightVector(InputError):
    pass


class UnverifiedFit(MathError):
    pass


class FitUnstable(MathError):
    pass


class ZeroNorm(MathError):
    pass


class AlmostTrivial(MathError):
    pass


class AlmostTrivialImage(MathError):
    pass


class ZeroB0(MathError):
    pass


class UnreachablePoint(MathError):
    pass

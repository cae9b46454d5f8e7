"""Exception hierarchy.

Errors fall in three families that the command line maps to exit codes:
malformed input (2), mathematical failure of a requested property (1) and
cap overflow (3).
"""


class ToposError(Exception):
    """Base class for every error raised by the package.

    Keyword arguments are kept as ``details`` for machine-readable reports.
    """

    exit_code = 1

    def __init__(self, message: str = "", **details):
        super().__init__(message)
        self.details = details

    def to_json(self) -> dict:
        return {"error": type(self).__name__, "message": str(self),
                "exit_code": self.exit_code, "details": self.details}


class InputError(ToposError):
    """Input data violates a structural law (bad table, bad presheaf...)."""

    exit_code = 2


class MathError(ToposError):
    """A mathematical precondition of an operation does not hold."""

    exit_code = 1


class CapExceeded(ToposError):
    """An enumeration would exceed a configured size cap."""

    exit_code = 3


# groups
class NotLatinSquare(InputError):
    pass


class NotAssociative(InputError):
    pass


class NoIdentity(InputError):
    pass


class NoInverse(InputError):
    pass


class NotASubgroup(InputError):
    pass


class NotNormal(MathError):
    pass


class IncompatibleSystem(InputError):
    pass


# sites and presheaves
class DanglingName(InputError):
    pass


class BadComposition(InputError):
    pass


class BadNaturality(InputError):
    pass


class NotAPresheaf(BadNaturality):
    pass


class NotASubobject(InputError):
    pass


class CategoryMismatch(InputError):
    pass


class NotEquivalence(InputError):
    pass


class NotAFunctor(InputError):
    pass


# finiteness and Galois theory
class SiteNotConnected(MathError):
    pass


class NotDecidable(MathError):
    pass


class NotLocallyConstant(MathError):
    pass


class NotLocallyFinite(MathError):
    pass


class NotFinite(MathError):
    pass


class NotGalois(MathError):
    pass

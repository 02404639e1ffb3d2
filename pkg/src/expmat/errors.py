"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class ExpmatError(Exception):
    exit_code = 1
    kind = "domain"

    def to_json(self) -> dict:
        return {"error": self.kind, "message": str(self)}


class DomainError(ExpmatError):
    pass


class NotPrimeError(DomainError):
    kind = "not-prime"


class DivisionByZero(DomainError, ZeroDivisionError):
    kind = "division-by-zero"


class ShapeError(DomainError):
    kind = "shape"


class NotExponentialError(DomainError):
    kind = "not-exponential"


class NotUnipotentError(DomainError):
    kind = "not-unipotent-upper-triangular"


class InvariantError(DomainError):
    kind = "invariant-violation"


class NotSymmetricError(DomainError):
    kind = "not-symmetric"


class DependentError(DomainError):
    kind = "dependent-a"


class RankDeficientError(DomainError):
    kind = "rank-deficient"


class NotHeisenbergError(DomainError):
    kind = "not-heisenberg"


class NotDalethError(DomainError):
    kind = "not-daleth"


class MembershipError(DomainError):
    kind = "membership"


class MixedAlgebraError(DomainError):
    kind = "mixed-algebra"


class InvalidRepError(DomainError):
    kind = "invalid-rep"


class ResourceError(ExpmatError):
    """Input is well formed but exceeds a hard size gate."""
    exit_code = 3
    kind = "resource"


class BudgetExceeded(ResourceError):
    kind = "budget-exceeded"


class SchemaError(ExpmatError):
    exit_code = 2
    kind = "schema"

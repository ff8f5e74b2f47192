# errors.py
from typing import Optional


class ConePolarError(Exception):
    "Base class for every error raised by the library"
    pass


class ContractViolation(ConePolarError):
    "Raised on dimension mismatch or malformed vectors and matrices"
    pass


class ConeConstructionError(ContractViolation):
    "Raised when a cone cannot be built (zero ray, line inside the cone, singular pairing)"
    pass


class PreconditionError(ConePolarError):
    "Raised when an input class is outside the cone an operation requires"
    pass


class DomainError(PreconditionError):
    "Raised when a function is evaluated outside its domain"
    pass


class ModelIntegrityError(ConePolarError):
    "Raised when model data contradicts itself during a computation"
    pass


class InvalidFunctionError(ConePolarError):
    "Raised when a function is not usable for the polar transform"
    pass


class UnsupportedError(ConePolarError):
    "Raised when an operation is not available for the given model"
    pass


class ModelLoadError(ConePolarError):
    "Raised when a model file fails validation; location is a JSON path like profiles[1].cones.nef[2]"

    def __init__(self, message: str, location: Optional[str] = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class UsageError(ConePolarError):
    "Raised by the CLI when a flag value cannot be used"

    def __init__(self, message: str, flag: Optional[str] = None):
        self.flag = flag
        super().__init__(f"{flag}: {message}" if flag else message)

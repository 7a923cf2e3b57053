"""Exception types shared across the package."""


class LienardError(Exception):
    """Base class for all package errors."""


class InputError(LienardError, ValueError):
    """Malformed user input (bad shapes, lengths, names, file content)."""


class MissingParameterError(InputError, KeyError):
    """An assignment does not cover every parameter of a system."""

    def __str__(self):
        return Exception.__str__(self)


class UnknownParameterError(InputError):
    pass


class FreeParameterError(InputError):
    """A polynomial still carries symbolic parameters where none are allowed."""


class ShapeError(InputError):
    """A system does not have the structure an operation requires."""


class RegionTooCoarseError(LienardError):
    """Equilibrium isolation did not converge inside the requested region."""


class InvalidSectionError(InputError):
    """The transversal section is crossed by a zero of Q(x, 0)."""


class StepSizeUnderflow(LienardError):
    """The adaptive integrator could not keep the local error in bounds."""


class RotationCertificateError(LienardError):
    """A parameter expected to rotate the field has an indefinite determinant."""


class NotBracketed(LienardError):
    """Fold localization was asked for a bracket whose cycle counts do not differ by two."""


class BudgetExhausted(LienardError):
    """A search ran out of attempts before reaching its target."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ConfigError(InputError):
    """A system-description file could not be parsed."""

    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.line = line
        self.field = field

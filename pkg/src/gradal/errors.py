"""Exception hierarchy shared by every gradal module."""


class GradalError(Exception):
    """Base class for all errors raised by gradal."""


class UndeclaredNameError(GradalError):
    def __init__(self, name, where=""):
        self.name = name
        msg = f"undeclared name {name!r}"
        if where:
            msg += f" ({where})"
        super().__init__(msg)


class OpaqueCompositionError(GradalError):
    """Substitution would move the argument of an opaque coefficient symbol."""

    reason = "OPAQUE_COMPOSITION"


class MissingGeneratorError(GradalError):
    """A derivation has no image for a generator it is asked to act on."""


class NonPolynomialError(GradalError):
    """A coefficient symbol depends on a coordinate of positive weight."""


class UnboundCoordinateError(GradalError):
    pass


class ModelError(GradalError):
    """Structurally invalid chart, transition or model."""


class NameCollisionError(ModelError):
    pass


class InvariantViolation(GradalError):
    """An internal consistency check failed; the input model is not a graded bundle."""


class NonBijectiveError(GradalError):
    pass


class DslError(GradalError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        self.bare_message = message
        if line is not None:
            message = f"{line}:{column}: {message}"
        super().__init__(message)


class DslSyntaxError(DslError):
    def __init__(self, message, line, column, expected=()):
        self.expected = tuple(sorted(set(expected)))
        if self.expected:
            message += " (expected one of: " + ", ".join(self.expected) + ")"
        super().__init__(message, line, column)


class ResolutionError(DslError):
    def __init__(self, name, line, column, message=None):
        self.name = name
        super().__init__(message or f"undeclared identifier {name!r}", line, column)


class VersionError(DslError):
    pass

class InferenceError(Exception):
    """
    Base error: a machine-readable code plus a message for the user.
    """

    code = "INFERENCE"

    def __init__(self, message, code=None):
        super().__init__(message)
        if code is not None:
            self.code = code
        self.message = message

    def __str__(self):
        return f"[{self.code}] {self.message}"


class DomainError(InferenceError, ValueError):
    """An argument lies outside the domain of the operation."""

    code = "DOMAIN"


class UndefinedCorrelationError(InferenceError, ValueError):
    code = "UNDEFINED_CORRELATION"


class SizeError(InferenceError, ValueError):
    """An exhaustive enumeration was asked for an instance that is too large."""

    code = "SIZE"


class ConfigError(InferenceError):
    code = "CONFIG"

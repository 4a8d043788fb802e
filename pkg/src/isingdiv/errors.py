"""Exception types shared across the package."""


class InputError(ValueError):
    """Invalid argument or malformed model description."""


class ModelFormatError(InputError):
    """A JSON model/pair document does not follow the expected schema.

    ``key`` names the offending field (dotted path), when known.
    """

    def __init__(self, message, key=None):
        super().__init__(message if key is None else f"{key}: {message}")
        self.key = key


class CapacityError(RuntimeError):
    """The requested computation exceeds a configured size limit."""


class OracleError(RuntimeError):
    """An oracle output violates a guarantee the estimator relies on."""

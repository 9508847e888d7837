"""Exception types shared across the package."""


class LVPatchError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(LVPatchError):
    """A model/history/option parameter is out of its admissible range.

    The message always names the offending field.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class NotCooperativeError(LVPatchError):
    """An operation requiring a cooperative matrix/system got a non-cooperative one."""


class ReducibleMatrixError(LVPatchError):
    """An operation requiring an irreducible matrix got a reducible one."""


class NumericalFailure(LVPatchError):
    """The integrator lost positivity (or finiteness) beyond the retry budget."""


class ScenarioError(LVPatchError):
    """A scenario file failed to parse or validate; message carries the field path."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")

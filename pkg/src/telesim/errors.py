"""Exception types shared across the simulator."""


class TelesimError(Exception):
    """Base class for all simulator errors."""


class DegenerateGeometryError(TelesimError):
    """Raised when a geometric operation is undefined (e.g. coincident points)."""


class ScreenRangeError(TelesimError):
    """Raised when a pixel coordinate falls outside the image."""


class InsufficientDataError(TelesimError):
    """Raised when a classifier is asked to decide without enough samples."""


class ProtocolError(TelesimError):
    """Base class for wire-protocol failures."""


class EncodeError(ProtocolError):
    """Envelope cannot be serialized (non-finite number, invalid payload)."""


class ParseError(ProtocolError):
    """Incoming bytes are not a well-formed envelope."""


class ProtocolVersionError(ProtocolError):
    """Envelope is well-formed but uses an unknown channel or payload kind."""


class ScenarioError(TelesimError):
    """Scenario file violates the layout contract."""


class ReplayDivergenceError(TelesimError):
    """Replaying a log did not reproduce the recorded world state.

    Carries the first divergent tick when known (-1 for a final-hash-only
    mismatch).
    """

    def __init__(self, message: str, tick: int = -1):
        super().__init__(message)
        self.tick = tick

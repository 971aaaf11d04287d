"""Exceptions raised by the CFC-NOPA model."""


class CfcNopaError(Exception):
    """Base class for all model errors."""


class ThresholdReached(CfcNopaError):
    """The stand-alone NOPA sits on (or past) an oscillation pole."""


class SingularSystem(CfcNopaError):
    """A linear system assembled by one of the oracles is singular."""


class LoopUnstable(CfcNopaError):
    """The closed feedback loop has reached its modified threshold."""


class MismatchedContext(CfcNopaError):
    """Two variance reports were computed for incompatible systems."""


class EmptyResult(CfcNopaError):
    """Every point of a sweep was unstable."""

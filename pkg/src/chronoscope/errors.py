"""Exception hierarchy shared by all chronoscope modules."""


class ChronoscopeError(ValueError):
    """Base class; carries an optional pipeline stage for chain/CLI context."""

    stage: int | None = None


class WindowTooSmall(ChronoscopeError):
    pass


class AliasingRisk(ChronoscopeError):
    pass


class ZeroEnergy(ChronoscopeError):
    pass


class PhaseUnwrapFailure(ChronoscopeError):
    pass


class InvalidLens(ChronoscopeError):
    pass


class FocalDegeneracy(ChronoscopeError):
    pass


class ZeroInputGDD(ChronoscopeError):
    pass


class DegenerateMagnification(ChronoscopeError):
    pass


class InfeasibleBandwidth(ChronoscopeError):
    def __init__(self, message: str, min_feasible_magnification: float | None = None):
        super().__init__(message)
        self.min_feasible_magnification = min_feasible_magnification


class OutOfRangeWavelength(ChronoscopeError):
    pass


class NoPhaseMatching(ChronoscopeError):
    pass


class GridTooNarrow(ChronoscopeError):
    pass


class GridTooCoarse(ChronoscopeError):
    pass


class NonHermitianResult(ChronoscopeError):
    pass


class ConfigParseError(ChronoscopeError):
    pass

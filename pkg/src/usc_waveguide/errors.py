"""Exception hierarchy shared by all modules."""


class UscError(Exception):
    """Base class for every error raised by this package."""


# --- parameter / input validation -------------------------------------------

class ParameterError(UscError, ValueError):
    pass


class NonPositiveFrequency(ParameterError):
    pass


class NonPositiveRate(ParameterError):
    pass


class NegativeCoupling(ParameterError):
    pass


class NegativeDelay(ParameterError):
    pass


class NegativeCutoff(ParameterError):
    pass


class CutoffTooSmall(NegativeCutoff):
    pass


class ProbeOutsideBand(ParameterError):
    pass


class LatticePlacementError(ParameterError):
    """Wavepacket or emitters do not fit inside the chain."""


class ConfigError(UscError, ValueError):
    pass


# --- numerical failures -----------------------------------------------------

class NumericalError(UscError, ArithmeticError):
    pass


class NonHermitianInput(NumericalError):
    pass


class SingularSystem(NumericalError):
    def __init__(self, omega, cond):
        super().__init__(f"effective system singular at omega={omega!r} (cond={cond:.3g})")
        self.omega = omega
        self.cond = cond


class NotConverged(NumericalError):
    pass


class ZeroNorm(NumericalError):
    pass


class ResidualTooLarge(NumericalError):
    pass


class FitDiverged(NumericalError):
    pass


class EmptySpectrum(NumericalError):
    pass


# --- level analysis ---------------------------------------------------------

class LabelsNotFound(UscError, LookupError):
    pass


class NoSwapDetected(UscError, LookupError):
    pass

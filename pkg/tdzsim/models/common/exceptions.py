"""
Exceptions raised by the simulator.

Measurement-level failures (short, open, saturated or inconsistent counts) are turned into
in-band flags by the pipeline; they only surface as exceptions from the low-level operations.
"""


class TdzsimError(Exception):
    """ Base class for all simulator errors """
    pass


class ConfigurationError(TdzsimError):
    """ A spec or config value is invalid """
    pass


class CodeRangeError(TdzsimError, ValueError):
    """ A DAC code is outside the representable range """
    pass


class UndefinedTHDError(TdzsimError):
    """ THD requested for a waveform without a fundamental """
    pass


class ShortCircuitError(TdzsimError):
    """ The driver was asked to drive a zero impedance """
    pass


class OpenCircuitError(TdzsimError):
    """ No current was measured, so the impedance is unbounded """
    pass


class OutOfRangeError(TdzsimError):
    """ The comparator output saturated (no pulse or no gap) """

    def __init__(self, n1, n0):
        self.n1 = n1
        self.n0 = n0
        side = 'low' if n1 == 0 else 'high'
        super().__init__(f"Comparator saturated {side} (n1={n1}, n0={n0}); "
                         f"change the mirror ratio or the offset DAC codes.")


class InconsistentCountsError(TdzsimError):
    """ The counts cannot come from a sinusoid crossing the configured threshold """
    pass


class NumericalSingularityError(TdzsimError):
    """ The nodal system is singular, e.g. a floating line with no path to a driven node """

    def __init__(self, line, message=None):
        self.line = line
        super().__init__(message or f"Nodal system is singular: line {line} is isolated")

"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`PDCSimError`,
which lets the CLI map failures onto exit codes.
"""


class PDCSimError(Exception):
    """Base class for all simulation errors."""


class DomainError(PDCSimError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class GridTooCoarse(PDCSimError, ValueError):
    pass


class NotNormalizable(PDCSimError, ValueError):
    pass


class NotNormalized(PDCSimError, ValueError):
    pass


class CutoffTooSmall(PDCSimError, ValueError):
    """Photon-number cutoff leaves more than the allowed tail mass.

    ``required`` carries an estimate of a cutoff that would be sufficient.
    """

    def __init__(self, message, required):
        super().__init__(message)
        self.required = required


class ZeroGain(PDCSimError, ValueError):
    pass


class NegativeCorrected(PDCSimError, ValueError):
    pass


class WindowOverflow(PDCSimError, RuntimeError):
    pass


class CalibrationError(PDCSimError, RuntimeError):
    pass


class ConfigError(PDCSimError, ValueError):
    """Invalid run configuration (bad syntax, unknown key, wrong type)."""

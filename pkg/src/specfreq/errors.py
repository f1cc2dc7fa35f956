"""Exception types shared across the package."""


class SpecfreqError(Exception):
    """Base class for all errors raised by specfreq."""


class EmptyInput(SpecfreqError):
    """Input contains no usable rows."""


class RaggedInput(SpecfreqError):
    """Rows of a CSV body have inconsistent lengths."""


class NonNumericValue(SpecfreqError):
    """A cell could not be parsed as a number."""


class NonFiniteValue(SpecfreqError):
    """Data contains NaN or infinite entries."""


class InsufficientLength(SpecfreqError):
    """The series is too short for the requested operation."""


class InvalidParameter(SpecfreqError):
    """A parameter is outside its admissible range."""


class DimensionMismatch(SpecfreqError):
    """Array shapes are inconsistent with each other."""


class NonPositiveAutoSpectrum(SpecfreqError):
    """An auto-spectrum in a coherence denominator is not positive.

    The flat-top lag window does not guarantee a positive semi-definite
    estimate, so auto-spectra can dip to zero or below; dividing by them
    would produce an unstable ratio.
    """


class HypothesisBatchError(SpecfreqError):
    """A hypothesis in a multiple-testing batch failed; carries its id."""

    def __init__(self, hypothesis_id: int, message: str):
        super().__init__(f"hypothesis id={hypothesis_id}: {message}")
        self.hypothesis_id = hypothesis_id

"""Exception types shared across the pipeline."""


class PipelineError(Exception):
    """Base class for all pipeline errors."""


class EmptyObject(PipelineError):
    """An object ended up with no points (no diagram can be defined for it)."""


class ParseError(PipelineError):
    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class InconsistentLabel(PipelineError):
    """One object carries more than one class label."""


class BudgetExceeded(PipelineError):
    """Simplex enumeration hit the configured hard cap."""


class OutOfBox(PipelineError):
    """A coordinate lies outside the quantizer bounding box."""


class CorruptSymbol(PipelineError):
    """A cell index is invalid for the quantizer grid (post-channel damage)."""


class EmptyDensity(PipelineError):
    """No points were available to estimate a density from."""


class DecodeError(PipelineError):
    def __init__(self, message, bit_offset=None):
        if bit_offset is not None:
            message = f"bit {bit_offset}: {message}"
        super().__init__(message)
        self.bit_offset = bit_offset


class DecodeFailure(PipelineError):
    """Error-locator degree and root count disagree; block left uncorrected."""


class CapacityExceeded(PipelineError):
    """Requested error-correcting capability leaves no message bits."""


class TrainingDiverged(PipelineError):
    def __init__(self, message, step=None):
        if step is not None:
            message = f"step {step}: {message}"
        super().__init__(message)
        self.step = step


class ShapeError(PipelineError):
    """Dimension or cardinality mismatch between two compared objects."""

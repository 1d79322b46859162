"""Exception types shared across the package."""


class TessgofError(Exception):
    """Base class for all package-specific errors."""


class DegenerateInputError(TessgofError):
    """Generator configuration violates the general-position assumption."""


class InvariantViolationError(TessgofError):
    """A tessellation or complex failed a structural invariant check."""

    def __init__(self, check, message):
        self.check = check
        super().__init__(f"invariant '{check}' violated: {message}")


class ImportFormatError(TessgofError):
    """A tessellation file could not be parsed."""

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        loc = ""
        if line is not None:
            loc += f" (line {line}"
            loc += f", field {field})" if field is not None else ")"
        super().__init__(message + loc)


class PackingConvergenceError(TessgofError):
    """Force-biased rearrangement failed to remove all overlaps."""

    def __init__(self, iterations, residual_overlap):
        self.iterations = iterations
        self.residual_overlap = residual_overlap
        super().__init__(
            f"no overlap-free packing after {iterations} iterations "
            f"(worst residual overlap {residual_overlap:.3e})"
        )


class SeedReuseError(TessgofError):
    """Calibration and test phases were asked to share a seed stream."""


class ConfigError(TessgofError):
    """Experiment configuration is invalid."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"config field '{field}': {message}")

"""Exception types shared across the package."""


class PolsarError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(PolsarError, ValueError):
    """An argument is outside the mathematical domain of the operation."""


class DimensionMismatch(PolsarError, ValueError):
    """Operands do not share a compatible matrix dimension."""


class NotPositiveDefinite(PolsarError, ValueError):
    """A matrix required to be Hermitian positive-definite is not."""


class NotHermitian(PolsarError, ValueError):
    """A matrix exceeds the tolerated deviation from Hermitian symmetry."""


class EmptySample(PolsarError, ValueError):
    """A sample of observation matrices is empty."""


class NoConvergence(PolsarError, RuntimeError):
    """An iterative solver failed to locate a root."""


class RegionTooSmall(PolsarError, ValueError):
    """A region does not contain enough pixels for the requested draw."""


class GeometryMismatch(PolsarError, ValueError):
    """Two rasters or masks do not share the same grid geometry."""


class FormatError(PolsarError, ValueError):
    """Base class for file-format violations."""


class BadMagic(FormatError):
    """A binary file does not start with the expected magic/version."""


class TruncatedPayload(FormatError):
    """A binary file ends before the declared payload is complete."""


class NonHermitianPixel(FormatError):
    """A raster pixel matrix violates the Hermitian ingest tolerance."""

    def __init__(self, row: int, col: int, asymmetry: float):
        self.row = row
        self.col = col
        self.asymmetry = asymmetry
        super().__init__(
            f"pixel ({row}, {col}) asymmetry {asymmetry:.3e} exceeds the 1e-8 ingest bound"
        )

# ===========================================================================
# File: app/core/exceptions.py
# ===========================================================================
from typing import Optional

EXIT_OK = 0
EXIT_ROWS_FAILED = 2
EXIT_CONFIG_ERROR = 3


class TDGError(Exception):
    """Base class for every error raised by the solver pipeline."""
    exit_code: int = EXIT_ROWS_FAILED

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code

    def __str__(self) -> str:
        return f"{type(self).__name__}: {self.detail}"


# modal
class CutoffWavenumber(TDGError):
    pass


class SourceInsideDomain(TDGError):
    pass


# mesh
class DegenerateRequest(TDGError):
    pass


class BoxTouchesBoundary(TDGError):
    pass


class NonConformingMesh(TDGError):
    pass


class MeshFormatError(TDGError):
    pass


# basis / quadrature
class TooFewDirections(TDGError):
    pass


class FacetNotOnTruncation(TDGError):
    pass


# assembly
class NegativeGamma(TDGError):
    pass


class EmptyMesh(TDGError):
    pass


class ModeCountTooSmall(TDGError):
    pass


class DimensionMismatch(TDGError):
    pass


# solve / post-processing
class SingularSystem(TDGError):
    pass


class PointOutsideMesh(TDGError):
    pass


class ZeroReference(TDGError):
    pass


# experiments
class InsufficientData(TDGError):
    pass


class ConfigError(TDGError):
    exit_code = EXIT_CONFIG_ERROR

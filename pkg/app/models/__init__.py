# ===========================================================================
# File: app/models/__init__.py
# ===========================================================================
from .modal import ModalBasis, LongitudinalSpectrum, ModalField
from .mesh import Box, FacetClass, Mesh
from .basis import PlaneWaveSpace
from .quadrature import FacetBlocks, ModalMoments, SegmentRule, TriangleRule
from .system import FluxParameters, TDGSystem
from .solution import SolutionField, SolutionMetadata
from .experiment import ExperimentConfig, GammaSummary, RateSummary, ResultRow, RunSummary

# ===========================================================================
# File: app/models/system.py
# ===========================================================================
from pydantic import BaseModel, Field
from typing import Any
import numpy as np

from app.models.mesh import Mesh
from app.models.basis import PlaneWaveSpace


class FluxParameters(BaseModel):
    """Per-facet flux parameters.

    a, b and d1 follow 1/2 (1 + gamma (l_max / l_e - 1)); they are stored for
    every facet but only read on interior (a, b) and wall (d1) facets.
    d2 is 1/2 on every facet.
    """
    gamma: float = Field(..., ge=0)
    a: np.ndarray
    b: np.ndarray
    d1: np.ndarray
    d2: np.ndarray

    model_config = {"arbitrary_types_allowed": True, "frozen": True}


class TDGSystem(BaseModel):
    """Global linear system A z = b, dofs ordered element-major then direction."""
    matrix: Any  # scipy.sparse.csc_matrix
    rhs: np.ndarray
    mesh: Mesh
    space: PlaneWaveSpace
    params: FluxParameters
    M: int = Field(..., ge=1)

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def k(self) -> float:
        return self.space.k

# ===========================================================================
# File: app/models/solution.py
# ===========================================================================
from pydantic import BaseModel, Field
import numpy as np

from app.models.mesh import Mesh
from app.models.basis import PlaneWaveSpace


class SolutionMetadata(BaseModel):
    k: float
    n_p: int
    M: int
    gamma: float
    h: float


class SolutionField(BaseModel):
    coefficients: np.ndarray
    mesh: Mesh
    space: PlaneWaveSpace
    metadata: SolutionMetadata
    cond_indicator: float = Field(default=float("nan"))
    residual: float = Field(default=float("nan"))

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    def element_coefficients(self, element: int) -> np.ndarray:
        n_p = self.space.n_p
        return self.coefficients[element * n_p:(element + 1) * n_p]

# ===========================================================================
# File: app/models/basis.py
# ===========================================================================
from pydantic import BaseModel, Field
import numpy as np


class PlaneWaveSpace(BaseModel):
    """Plane (or evanescent) waves exp(i kappa_K d_j.(x - x0_K)) on every element."""
    k: float = Field(..., gt=0)
    n_p: int = Field(..., ge=3)
    directions: np.ndarray
    kappa: np.ndarray
    centroids: np.ndarray

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    @property
    def n_elements(self) -> int:
        return len(self.kappa)

    @property
    def dofs(self) -> int:
        return self.n_elements * self.n_p

    def dof(self, element: int, direction: int) -> int:
        return element * self.n_p + direction

    def element_dofs(self, element: int) -> np.ndarray:
        return np.arange(element * self.n_p, (element + 1) * self.n_p)

    def wave_vectors(self, element: int) -> np.ndarray:
        """kappa_K * d_j for all directions, shape (n_p, 2), complex."""
        return self.kappa[element] * self.directions

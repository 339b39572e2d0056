# ===========================================================================
# File: app/models/modal.py
# ===========================================================================
from pydantic import BaseModel, Field
from typing import Literal, Optional, Tuple
import numpy as np

from app.core.exceptions import SourceInsideDomain

WallSide = Literal[-1, 1]
TraceQuantity = Literal["value", "normal-derivative"]


class ModalBasis(BaseModel):
    """Neumann eigenpairs of the cross section (0, H).

    theta_j(y) = amplitudes[j] * cos(k_j * y), with k_j = j*pi/H.
    """
    H: float = Field(..., gt=0)
    count: int = Field(..., ge=1)
    k_j: np.ndarray
    amplitudes: np.ndarray

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    def theta(self, y: np.ndarray, count: Optional[int] = None) -> np.ndarray:
        """Values of theta_0..theta_{count-1} at the ordinates y, shape (len(y), count)."""
        J = self.count if count is None else count
        y = np.atleast_1d(np.asarray(y, dtype=float))
        return self.amplitudes[:J] * np.cos(np.outer(y, self.k_j[:J]))

    def theta_prime(self, y: np.ndarray, count: Optional[int] = None) -> np.ndarray:
        J = self.count if count is None else count
        y = np.atleast_1d(np.asarray(y, dtype=float))
        return -self.amplitudes[:J] * self.k_j[:J] * np.sin(np.outer(y, self.k_j[:J]))


class LongitudinalSpectrum(BaseModel):
    k: float = Field(..., gt=0)
    beta: np.ndarray
    n_pr: int

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    @property
    def count(self) -> int:
        return len(self.beta)

    @property
    def propagating(self) -> int:
        return self.n_pr + 1


class ModalField(BaseModel):
    """Superposition sum_j A_j exp(i s_j beta_j x1) theta_j(y).

    Covers the guided modes g_j^{+/-} and the truncated waveguide Green's
    function; used both as incident field and as exact reference.
    """
    basis: ModalBasis
    spectrum: LongitudinalSpectrum
    amplitudes: np.ndarray
    signs: np.ndarray
    source_x1: Optional[float] = None
    label: str = "modal"

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    @property
    def count(self) -> int:
        return len(self.amplitudes)

    def _check_points(self, x1: np.ndarray) -> None:
        if self.source_x1 is None or x1.size == 0:
            return
        side = self.signs[0]
        if np.any(side * (x1 - self.source_x1) <= 0):
            raise SourceInsideDomain(
                f"source abscissa y1={self.source_x1} lies within the evaluation range "
                f"[{x1.min()}, {x1.max()}]"
            )

    def _longitudinal(self, x1: np.ndarray) -> np.ndarray:
        J = self.count
        phase = 1j * self.signs * self.spectrum.beta[:J]
        return np.exp(np.outer(x1, phase))

    def value(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        self._check_points(points[:, 0])
        theta = self.basis.theta(points[:, 1], self.count)
        return (self._longitudinal(points[:, 0]) * theta) @ self.amplitudes

    def gradient(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        self._check_points(points[:, 0])
        J = self.count
        lon = self._longitudinal(points[:, 0])
        theta = self.basis.theta(points[:, 1], J)
        dtheta = self.basis.theta_prime(points[:, 1], J)
        dx = (lon * theta) @ (self.amplitudes * 1j * self.signs * self.spectrum.beta[:J])
        dy = (lon * dtheta) @ self.amplitudes
        return np.stack([dx, dy], axis=-1)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.value(points)

    def wall_coefficients(self, R: float, wall: WallSide) -> Tuple[np.ndarray, np.ndarray]:
        """Modal coefficients of the trace and of the outward normal derivative on x1 = wall*R."""
        J = self.count
        x1 = wall * R
        self._check_points(np.array([x1]))
        lon = np.exp(1j * self.signs * self.spectrum.beta[:J] * x1)
        value = self.amplitudes * lon
        normal = wall * 1j * self.signs * self.spectrum.beta[:J] * value
        return value, normal

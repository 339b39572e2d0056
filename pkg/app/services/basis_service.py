# ===========================================================================
# File: app/services/basis_service.py
# ===========================================================================
from typing import Tuple
import numpy as np

from app.core.config import settings, logger
from app.core.exceptions import DimensionMismatch, TooFewDirections
from app.models.basis import PlaneWaveSpace
from app.models.mesh import Mesh


class BasisService:
    def directions(self, n_p: int) -> np.ndarray:
        if n_p < 3:
            raise TooFewDirections(f"need at least 3 plane-wave directions, got {n_p}")
        alpha = 2.0 * np.pi * np.arange(n_p) / n_p
        return np.column_stack([np.cos(alpha), np.sin(alpha)])

    def build_space(self, mesh: Mesh, k: float, n_p: int) -> PlaneWaveSpace:
        # principal branch: Re(n) > 0, Im(n) >= 0 keeps kappa in the first quadrant
        kappa = k * np.sqrt(mesh.n.astype(complex))
        space = PlaneWaveSpace(
            k=k, n_p=n_p, directions=self.directions(n_p), kappa=kappa, centroids=mesh.centroids,
        )
        self.magnitude_bound(space, mesh)
        logger.debug(f"Plane-wave space: {space.n_elements} elements x {n_p} directions = {space.dofs} dofs")
        return space

    def eval_basis(
        self, space: PlaneWaveSpace, element: int, j: int, x: np.ndarray
    ) -> Tuple[complex, np.ndarray]:
        values, gradients = self.eval_element(space, element, np.atleast_2d(x))
        return complex(values[0, j]), gradients[0, j]

    def eval_element(
        self, space: PlaneWaveSpace, element: int, points: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Values (npts, n_p) and gradients (npts, n_p, 2) of all functions of one element."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return self.eval_points(space, np.full(len(points), element), points)

    def eval_points(
        self, space: PlaneWaveSpace, elements: np.ndarray, points: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Basis values and gradients at points, each paired with the element it is evaluated on."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        elements = np.asarray(elements, dtype=np.int64)
        if elements.shape != (len(points),):
            raise DimensionMismatch(f"{len(elements)} element indices for {len(points)} points")
        kappa = space.kappa[elements][:, None]
        projected = (points - space.centroids[elements]) @ space.directions.T
        values = np.exp(1j * kappa * projected)
        gradients = (1j * kappa * values)[:, :, None] * space.directions[None, :, :]
        return values, gradients

    def magnitude_bound(self, space: PlaneWaveSpace, mesh: Mesh) -> np.ndarray:
        """exp(Im(kappa_K) h_K), a bound for |phi| on K."""
        bound = np.exp(space.kappa.imag * mesh.diameters)
        worst = float(bound.max())
        if worst > settings.MAGNITUDE_WARN:
            logger.warning(
                f"Evanescent basis functions reach {worst:.3g} on an element; expect ill-conditioning"
            )
        return bound


basis_service = BasisService()

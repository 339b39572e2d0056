# ===========================================================================
# File: app/services/solver_service.py
# ===========================================================================
from typing import Callable, Tuple, Union
import numpy as np
import scipy.sparse.linalg as spla

from app.core.config import settings, logger
from app.core.exceptions import DimensionMismatch, PointOutsideMesh, SingularSystem, ZeroReference
from app.models.basis import PlaneWaveSpace
from app.models.mesh import Mesh
from app.models.solution import SolutionField, SolutionMetadata
from app.models.system import TDGSystem
from app.services.basis_service import basis_service
from app.services.mesh_service import mesh_service
from app.services.quadrature_service import quadrature_service

Reference = Callable[[np.ndarray], np.ndarray]


class SolverService:
    def solve(self, system: TDGSystem) -> SolutionField:
        A = system.matrix.tocsc()
        b = system.rhs
        try:
            lu = spla.splu(A)
        except RuntimeError as exc:
            raise SingularSystem(f"sparse LU factorization failed: {exc}") from exc

        pivots = np.abs(lu.U.diagonal())
        if pivots.size == 0 or pivots.min() == 0.0 or not np.all(np.isfinite(pivots)):
            raise SingularSystem("zero or non-finite pivot in the LU factorization")
        cond_indicator = float(pivots.max() / pivots.min())

        z = lu.solve(b)
        if not np.all(np.isfinite(z)):
            raise SingularSystem("solution contains non-finite values")

        denominator = spla.norm(A, "fro") * np.linalg.norm(z) + np.linalg.norm(b)
        residual = float(np.linalg.norm(A @ z - b) / denominator) if denominator > 0 else 0.0

        if cond_indicator > settings.COND_WARN:
            logger.warning(f"Condition indicator {cond_indicator:.3e} exceeds {settings.COND_WARN:.1e}")
        logger.info(f"Solved {system.size} unknowns: residual={residual:.3e}, cond~{cond_indicator:.3e}")

        metadata = SolutionMetadata(
            k=system.k, n_p=system.space.n_p, M=system.M, gamma=system.params.gamma, h=system.mesh.h,
        )
        return SolutionField(
            coefficients=z, mesh=system.mesh, space=system.space, metadata=metadata,
            cond_indicator=cond_indicator, residual=residual,
        )

    def _combine(
        self, field: SolutionField, elements: np.ndarray, points: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray]:
        values, gradients = basis_service.eval_points(field.space, elements, points)
        coefficients = field.coefficients.reshape(field.space.n_elements, field.space.n_p)[elements]
        u = np.sum(values * coefficients, axis=1)
        grad = np.einsum("ij,ijk->ik", coefficients, gradients)
        return u, grad

    def evaluate(
        self, field: SolutionField, points: np.ndarray, gradient: bool = False
    ) -> Union[np.ndarray, Tuple[np.ndarray, np.ndarray]]:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        elements = mesh_service.locate(field.mesh, points)
        outside = np.flatnonzero(elements < 0)
        if outside.size:
            raise PointOutsideMesh(f"{outside.size} points lie outside the mesh, first at {points[outside[0]]}")
        u, grad = self._combine(field, elements, points)
        return (u, grad) if gradient else u

    def _element_rules(self, mesh: Mesh, space: PlaneWaveSpace):
        """Quadrature points grouped by order: yields (elements, points, weights) with one row per element."""
        orders = np.array([
            quadrature_service.quad_nodes(kappa, h) for kappa, h in zip(space.kappa, mesh.diameters)
        ])
        corners = mesh.corners
        for order in np.unique(orders):
            elements = np.flatnonzero(orders == order)
            rules = [quadrature_service.triangle_rule(corners[e], int(order)) for e in elements]
            yield (
                elements,
                np.stack([r.nodes for r in rules]),
                np.stack([r.weights for r in rules]),
            )

    def relative_l2_error(self, field: SolutionField, reference: Reference) -> float:
        error_sq, norm_sq = 0.0, 0.0
        for elements, nodes, weights in self._element_rules(field.mesh, field.space):
            n_q = nodes.shape[1]
            flat = nodes.reshape(-1, 2)
            u_h, _ = self._combine(field, np.repeat(elements, n_q), flat)
            u = np.asarray(reference(flat), dtype=complex)
            w = weights.ravel()
            error_sq += float(np.sum(w * np.abs(u - u_h) ** 2))
            norm_sq += float(np.sum(w * np.abs(u) ** 2))
        norm = np.sqrt(norm_sq)
        if norm < 1e-300:
            raise ZeroReference("reference field has zero L2 norm")
        return float(np.sqrt(error_sq) / norm)

    def best_approximation_error(self, mesh: Mesh, space: PlaneWaveSpace, reference: Reference) -> float:
        """Relative L2 distance from the reference to V_h, by element-wise least squares."""
        if space.n_elements != mesh.n_triangles:
            raise DimensionMismatch(f"space has {space.n_elements} elements, mesh has {mesh.n_triangles}")
        error_sq, norm_sq = 0.0, 0.0
        for elements, nodes, weights in self._element_rules(mesh, space):
            for element, points, w in zip(elements, nodes, weights):
                phi, _ = basis_service.eval_element(space, element, points)
                u = np.asarray(reference(points), dtype=complex)
                sw = np.sqrt(w)
                coefficients, *_ = np.linalg.lstsq(sw[:, None] * phi, sw * u, rcond=None)
                error_sq += float(np.sum(w * np.abs(u - phi @ coefficients) ** 2))
                norm_sq += float(np.sum(w * np.abs(u) ** 2))
        norm = np.sqrt(norm_sq)
        if norm < 1e-300:
            raise ZeroReference("reference field has zero L2 norm")
        return float(np.sqrt(error_sq) / norm)

    def error_density(self, field: SolutionField, reference: Reference, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return np.abs(np.asarray(reference(points), dtype=complex) - self.evaluate(field, points))

    def as_reference(self, field: SolutionField) -> Reference:
        """Wrap a discrete solution so it can serve as the reference of another run."""
        return lambda points: self.evaluate(field, points)


solver_service = SolverService()

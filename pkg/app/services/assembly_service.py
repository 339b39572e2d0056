# ===========================================================================
# File: app/services/assembly_service.py
# ===========================================================================
from typing import Dict, List, Optional, Tuple
import numpy as np
import scipy.sparse as sp

from app.core.config import logger
from app.core.exceptions import (
    DimensionMismatch, EmptyMesh, ModeCountTooSmall, NegativeGamma,
)
from app.models.basis import PlaneWaveSpace
from app.models.mesh import FacetClass, Mesh
from app.models.modal import LongitudinalSpectrum, ModalBasis, ModalField
from app.models.quadrature import ModalMoments
from app.models.system import FluxParameters, TDGSystem
from app.services.modal_service import modal_service
from app.services.quadrature_service import quadrature_service

_WALLS = ((FacetClass.TRUNCATION_LEFT, -1), (FacetClass.TRUNCATION_RIGHT, 1))


class _Triplets:
    """COO accumulator; duplicate entries are summed on conversion."""

    def __init__(self, n_p: int):
        self.n_p = n_p
        self.rows: List[np.ndarray] = []
        self.cols: List[np.ndarray] = []
        self.data: List[np.ndarray] = []

    def add_block(self, test: int, trial: int, block: np.ndarray) -> None:
        local = np.arange(self.n_p)
        self.add_dense(test * self.n_p + local, trial * self.n_p + local, block)

    def add_dense(self, test_dofs: np.ndarray, trial_dofs: np.ndarray, block: np.ndarray) -> None:
        rows, cols = np.meshgrid(test_dofs, trial_dofs, indexing="ij")
        self.rows.append(rows.ravel())
        self.cols.append(cols.ravel())
        self.data.append(np.asarray(block, dtype=complex).ravel())

    def to_csc(self, size: int) -> sp.csc_matrix:
        if not self.data:
            return sp.csc_matrix((size, size), dtype=complex)
        matrix = sp.coo_matrix(
            (np.concatenate(self.data), (np.concatenate(self.rows), np.concatenate(self.cols))),
            shape=(size, size),
        )
        return matrix.tocsc()


class AssemblyService:
    def flux_parameters(self, mesh: Mesh, gamma: float) -> FluxParameters:
        if gamma < 0:
            raise NegativeGamma(f"gamma must be non-negative, got {gamma}")
        weight = 0.5 * (1.0 + gamma * (mesh.l_max / mesh.facet_lengths - 1.0))
        return FluxParameters(
            gamma=gamma, a=weight, b=weight.copy(), d1=weight.copy(),
            d2=np.full(mesh.n_facets, 0.5),
        )

    def _wall_moments(
        self, mesh: Mesh, space: PlaneWaveSpace, basis: ModalBasis, facet_class: FacetClass, count: int
    ) -> Tuple[np.ndarray, ModalMoments]:
        """Moments of every basis function of the elements touching one truncation wall."""
        per_element: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
        for facet in mesh.facets_of(facet_class):
            moments = quadrature_service.modal_moments(space, mesh, facet, basis, count)
            element = int(mesh.facet_elements[facet, 0])
            if element in per_element:
                value, normal = per_element[element]
                per_element[element] = (value + moments.value, normal + moments.normal)
            else:
                per_element[element] = (moments.value, moments.normal)
        elements = np.array(sorted(per_element), dtype=np.int64)
        dofs = (elements[:, None] * space.n_p + np.arange(space.n_p)[None, :]).ravel()
        value = np.vstack([per_element[e][0] for e in elements])
        normal = np.vstack([per_element[e][1] for e in elements])
        return dofs, ModalMoments(value=value, normal=normal)

    def assemble(
        self,
        mesh: Mesh,
        space: PlaneWaveSpace,
        basis: ModalBasis,
        spectrum: LongitudinalSpectrum,
        params: FluxParameters,
        M: int,
        incident: Optional[ModalField] = None,
    ) -> TDGSystem:
        if mesh.n_triangles == 0:
            raise EmptyMesh("cannot assemble on a mesh without triangles")
        if M < 1:
            raise ModeCountTooSmall(f"NtD truncation needs M >= 1, got {M}")
        if M > spectrum.count:
            raise DimensionMismatch(f"M={M} exceeds the {spectrum.count} available longitudinal wavenumbers")
        if space.n_elements != mesh.n_triangles:
            raise DimensionMismatch(f"space has {space.n_elements} elements, mesh has {mesh.n_triangles}")

        k = space.k
        n_p = space.n_p
        size = space.dofs
        triplets = _Triplets(n_p)
        rhs = np.zeros(size, dtype=complex)

        # absorbing elements: 2i k^2 Im(n) int w conj(v)
        for element in np.flatnonzero(mesh.n.imag > 0):
            mass = quadrature_service.triangle_pair_matrix(space, element, mesh.corners[element])
            triplets.add_block(element, element, 2j * k ** 2 * mesh.n[element].imag * mass)

        for facet in mesh.facets_of(FacetClass.INTERIOR):
            a, b = mesh.facet_endpoints(facet)
            normal = mesh.facet_normals[facet]
            plus, minus = mesh.facet_elements[facet]
            alpha, beta = params.a[facet], params.b[facet]
            for s_test, test in ((1.0, plus), (-1.0, minus)):
                for s_trial, trial in ((1.0, plus), (-1.0, minus)):
                    blk = quadrature_service.facet_pair_matrices(space, trial, test, a, b, normal)
                    block = s_test * (
                        -0.5 * blk.vn
                        + 1j * (beta / k) * s_trial * blk.nn
                        + alpha * 1j * k * s_trial * blk.vv
                        + 0.5 * blk.nv
                    )
                    triplets.add_block(test, trial, block)

        for facet in mesh.facets_of(FacetClass.WALL):
            a, b = mesh.facet_endpoints(facet)
            element = mesh.facet_elements[facet, 0]
            blk = quadrature_service.facet_pair_matrices(space, element, element, a, b, mesh.facet_normals[facet])
            triplets.add_block(element, element, -blk.vn + 1j * (params.d1[facet] / k) * blk.nn)

        # truncation facets, trace x trace part: int dw conj(v) + d2 i k int w conj(v)
        for facet_class, _ in _WALLS:
            for facet in mesh.facets_of(facet_class):
                a, b = mesh.facet_endpoints(facet)
                element = mesh.facet_elements[facet, 0]
                blk = quadrature_service.facet_pair_matrices(
                    space, element, element, a, b, mesh.facet_normals[facet]
                )
                triplets.add_block(element, element, blk.nv + params.d2[facet] * 1j * k * blk.vv)

        # truncation walls, NtD parts through modal moments
        nu = modal_service.ntd_symbol(spectrum, M)
        count = M if incident is None else max(M, incident.count)
        for facet_class, wall in _WALLS:
            facets = mesh.facets_of(facet_class)
            if facets.size == 0:
                continue
            d2ik = float(params.d2[facets].max()) * 1j * k
            dofs, moments = self._wall_moments(mesh, space, basis, facet_class, count)
            V, C = moments.value, moments.normal
            Vm, Cm = V[:, :M], C[:, :M]
            block = -np.conj(Cm) @ (Cm * nu).T + d2ik * (
                np.conj(Cm) @ (Cm * np.abs(nu) ** 2).T
                - np.conj(Vm) @ (Cm * nu).T
                - np.conj(Cm) @ (Vm * np.conj(nu)).T
            )
            triplets.add_dense(dofs, dofs, block)

            if incident is None:
                continue
            value, normal = incident.wall_coefficients(mesh.R, wall)
            U = np.zeros(count, dtype=complex)
            D = np.zeros(count, dtype=complex)
            U[:len(value)] = value
            D[:len(normal)] = normal
            nu_D = nu * D[:M]
            rhs[dofs] += np.conj(C) @ U - np.conj(Cm) @ nu_D + d2ik * (
                np.conj(Cm) @ (np.abs(nu) ** 2 * D[:M])
                - np.conj(Vm) @ nu_D
                - np.conj(Cm) @ (np.conj(nu) * U[:M])
                + np.conj(V) @ U
            )
            logger.debug(f"Wall x1={wall * mesh.R:+.4g}: {len(dofs)} coupled dofs, {count} modal moments")

        matrix = triplets.to_csc(size)
        logger.info(
            f"System assembled: {size} unknowns, {matrix.nnz} stored entries, M={M}, gamma={params.gamma}"
        )
        return TDGSystem(matrix=matrix, rhs=rhs, mesh=mesh, space=space, params=params, M=M)

    def quadratic_form(self, system: TDGSystem, z: np.ndarray) -> complex:
        z = np.asarray(z, dtype=complex)
        if z.shape != (system.size,):
            raise DimensionMismatch(f"vector of shape {z.shape} for a system of size {system.size}")
        return complex(np.vdot(z, system.matrix @ z))

    def mesh_norm(self, system: TDGSystem, z: np.ndarray) -> float:
        return float(np.sqrt(max(self.quadratic_form(system, z).imag, 0.0)))


assembly_service = AssemblyService()

# ===========================================================================
# File: app/tests/services/test_solver_service.py
# ===========================================================================
import pytest
import numpy as np
import scipy.sparse as sp

from app.core.config import logger
from app.core.exceptions import PointOutsideMesh, SingularSystem, ZeroReference
from app.models.solution import SolutionField, SolutionMetadata
from app.services.assembly_service import assembly_service
from app.services.basis_service import basis_service
from app.services.mesh_service import mesh_service
from app.services.modal_service import modal_service
from app.services.solver_service import solver_service


def _solve(mesh, basis, spectrum, incident, n_p, M=15, gamma=0.0):
    space = basis_service.build_space(mesh, spectrum.k, n_p)
    params = assembly_service.flux_parameters(mesh, gamma)
    system = assembly_service.assemble(mesh, space, basis, spectrum, params, M, incident)
    return system, solver_service.solve(system)


def _field(mesh, n_p, coefficients, k=8.0):
    space = basis_service.build_space(mesh, k, n_p)
    metadata = SolutionMetadata(k=k, n_p=n_p, M=1, gamma=0.0, h=mesh.h)
    return SolutionField(coefficients=np.asarray(coefficients, dtype=complex), mesh=mesh, space=space, metadata=metadata)


def test_solve_recovers_known_coefficients(small_mesh, basis_k8, spectrum_k8, rng):
    logger.info("Testing solve on A z = A z0")
    incident = modal_service.guided_mode(0, 1, basis_k8, spectrum_k8)
    system, _ = _solve(small_mesh, basis_k8, spectrum_k8, incident, n_p=3)
    z0 = rng.standard_normal(system.size) + 1j * rng.standard_normal(system.size)
    field = solver_service.solve(system.model_copy(update={"rhs": system.matrix @ z0}))
    assert np.linalg.norm(field.coefficients - z0) <= 1e-6 * np.linalg.norm(z0)
    assert field.residual < 1e-12
    assert field.cond_indicator >= 1.0


def test_exact_guided_mode_is_reproduced(small_mesh, basis_k8, spectrum_k8):
    logger.info("Testing that g_0^+ is recovered to machine precision with Np=4")
    incident = modal_service.guided_mode(0, 1, basis_k8, spectrum_k8)
    system, field = _solve(small_mesh, basis_k8, spectrum_k8, incident, n_p=4)
    assert field.residual < 1e-10
    assert solver_service.relative_l2_error(field, incident) < 1e-8
    assert field.metadata.n_p == 4 and field.metadata.M == 15


def test_singular_system_is_reported(two_triangle_mesh, basis_k8, spectrum_k8):
    logger.info("Testing SingularSystem on a zero matrix")
    system, _ = _solve(two_triangle_mesh, basis_k8, spectrum_k8, None, n_p=3)
    zero = system.model_copy(update={"matrix": sp.csc_matrix(system.matrix.shape, dtype=complex)})
    with pytest.raises(SingularSystem):
        solver_service.solve(zero)


def test_evaluate_field(small_mesh):
    logger.info("Testing point evaluation of a discrete field")
    coefficients = np.zeros(small_mesh.n_triangles * 3, dtype=complex)
    coefficients[5 * 3 + 1] = 2.0
    field = _field(small_mesh, 3, coefficients)
    centroid = small_mesh.centroids[5]
    assert solver_service.evaluate(field, centroid)[0] == pytest.approx(2.0)
    u, grad = solver_service.evaluate(field, centroid[None, :], gradient=True)
    assert np.allclose(grad[0], 2.0 * 8j * field.space.directions[1])
    others = np.delete(small_mesh.centroids, 5, axis=0)
    assert np.all(solver_service.evaluate(field, others) == 0)
    with pytest.raises(PointOutsideMesh):
        solver_service.evaluate(field, np.array([[3.0, 0.5]]))


def test_evaluate_is_linear(small_mesh, rng):
    logger.info("Testing linearity of evaluation in the coefficients")
    size = small_mesh.n_triangles * 3
    a = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    b = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    points = np.column_stack([rng.uniform(-1, 1, 50), rng.uniform(0, 1, 50)])
    combined = solver_service.evaluate(_field(small_mesh, 3, a + 2j * b), points)
    separate = solver_service.evaluate(_field(small_mesh, 3, a), points) + 2j * solver_service.evaluate(
        _field(small_mesh, 3, b), points
    )
    assert np.allclose(combined, separate)


def test_relative_error_against_itself_and_scaled(small_mesh, rng):
    logger.info("Testing relative_l2_error on trivial references")
    size = small_mesh.n_triangles * 3
    field = _field(small_mesh, 3, rng.standard_normal(size) + 1j * rng.standard_normal(size))
    reference = solver_service.as_reference(field)
    assert solver_service.relative_l2_error(field, reference) == pytest.approx(0.0, abs=1e-14)
    assert solver_service.relative_l2_error(field, lambda x: 2.0 * reference(x)) == pytest.approx(0.5, rel=1e-12)
    with pytest.raises(ZeroReference):
        solver_service.relative_l2_error(field, lambda x: np.zeros(len(x)))


def test_error_density(small_mesh):
    logger.info("Testing the pointwise error")
    field = _field(small_mesh, 3, np.zeros(small_mesh.n_triangles * 3))
    points = small_mesh.centroids[:4]
    assert np.allclose(solver_service.error_density(field, lambda x: np.full(len(x), 3 + 4j), points), 5.0)


def test_best_approximation_of_exact_mode(small_mesh, basis_k8, spectrum_k8):
    logger.info("Testing the best approximation error of a field in the discrete space")
    space = basis_service.build_space(small_mesh, 8.0, 4)
    mode = modal_service.guided_mode(0, 1, basis_k8, spectrum_k8)
    assert solver_service.best_approximation_error(small_mesh, space, mode) < 1e-10


def test_green_function_error_bounds(basis_k8, spectrum_k8):
    logger.info("Testing the discrete error against the best approximation error")
    R = 2 * np.pi / 8
    mesh = mesh_service.generate_uniform(R, 1.0, 0.2)
    green = modal_service.fundamental_solution((-1.5 * R, 0.3), 20, basis_k8, spectrum_k8, x_range=(-R, R))
    system, field = _solve(mesh, basis_k8, spectrum_k8, green, n_p=9)
    error = solver_service.relative_l2_error(field, green)
    best = solver_service.best_approximation_error(mesh, system.space, green)
    assert best <= error
    assert error < 5e-2

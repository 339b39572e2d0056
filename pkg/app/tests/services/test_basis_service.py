# ===========================================================================
# File: app/tests/services/test_basis_service.py
# ===========================================================================
import cmath
import pytest
import numpy as np

from app.core.config import logger
from app.core.exceptions import DimensionMismatch, TooFewDirections
from app.services.basis_service import basis_service


def test_directions_are_equispaced():
    logger.info("Testing plane-wave directions")
    d = basis_service.directions(4)
    assert np.allclose(d, [[1, 0], [0, 1], [-1, 0], [0, -1]], atol=1e-15)
    d7 = basis_service.directions(7)
    assert np.allclose(np.linalg.norm(d7, axis=1), 1.0)
    assert np.allclose(d7.sum(axis=0), 0.0, atol=1e-14)
    with pytest.raises(TooFewDirections):
        basis_service.directions(2)


def test_space_dimensions(small_mesh):
    logger.info("Testing global dof numbering")
    space = basis_service.build_space(small_mesh, 8.0, 5)
    assert space.dofs == small_mesh.n_triangles * 5
    assert space.dof(3, 2) == 17
    assert np.array_equal(space.element_dofs(2), np.arange(10, 15))
    assert np.allclose(space.kappa, 8.0)


def test_basis_is_one_at_centroid(two_triangle_mesh):
    logger.info("Testing phi = 1 and grad phi = i kappa d at the element centroid")
    space = basis_service.build_space(two_triangle_mesh, 8.0, 4)
    x0 = two_triangle_mesh.centroids[1]
    for j, d in enumerate(space.directions):
        value, grad = basis_service.eval_basis(space, 1, j, x0)
        assert value == pytest.approx(1.0)
        assert np.allclose(grad, 8j * d)


def test_basis_plane_wave_phase(two_triangle_mesh):
    logger.info("Testing the phase exp(i k d.(x - x0))")
    space = basis_service.build_space(two_triangle_mesh, 8.0, 4)
    x = two_triangle_mesh.centroids[0] + np.array([0.25, 0.1])
    value, _ = basis_service.eval_basis(space, 0, 0, x)
    assert value == pytest.approx(np.exp(2j), rel=1e-14)


def test_lossy_element_wavenumber(lossy_square_mesh):
    logger.info("Testing kappa = k sqrt(n) on an absorbing element")
    space = basis_service.build_space(lossy_square_mesh, 8.0, 5)
    kappa = 8.0 * cmath.sqrt(9 + 4j)
    assert space.kappa[0] == pytest.approx(kappa)
    assert space.kappa[1] == pytest.approx(8.0)
    x = lossy_square_mesh.centroids[0] + 0.1 * space.directions[0]
    value, _ = basis_service.eval_basis(space, 0, 0, x)
    assert value == pytest.approx(cmath.exp(1j * kappa * 0.1), rel=1e-14)
    bound = basis_service.magnitude_bound(space, lossy_square_mesh)
    assert bound[1] == pytest.approx(1.0)
    assert bound[0] > 1.0


@pytest.mark.parametrize("element", [0, 1])
def test_basis_solves_helmholtz(lossy_square_mesh, element):
    logger.info(f"Testing Laplace(phi) + k^2 n phi = 0 by finite differences on element {element}")
    space = basis_service.build_space(lossy_square_mesh, 8.0, 5)
    step = 1e-4
    x0 = lossy_square_mesh.centroids[element] + np.array([0.02, -0.03])
    stencil = x0 + step * np.array([[0, 0], [1, 0], [-1, 0], [0, 1], [0, -1]])
    values, _ = basis_service.eval_element(space, element, stencil)
    laplacian = (values[1:].sum(axis=0) - 4.0 * values[0]) / step ** 2
    k2n = 64.0 * lossy_square_mesh.n[element]
    assert np.all(np.abs(laplacian + k2n * values[0]) <= 1e-3 * np.abs(k2n * values[0]))


def test_gradient_matches_finite_differences(lossy_square_mesh):
    logger.info("Testing analytic gradients against central differences")
    space = basis_service.build_space(lossy_square_mesh, 8.0, 6)
    x0 = lossy_square_mesh.centroids[0]
    step = 1e-6
    _, grad = basis_service.eval_element(space, 0, x0)
    for axis in range(2):
        e = np.zeros(2)
        e[axis] = step
        plus, _ = basis_service.eval_element(space, 0, x0 + e)
        minus, _ = basis_service.eval_element(space, 0, x0 - e)
        fd = (plus[0] - minus[0]) / (2 * step)
        assert np.allclose(fd, grad[0, :, axis], rtol=1e-6)


def test_eval_points_dimension_check(small_mesh):
    logger.info("Testing mismatched element/point arrays")
    space = basis_service.build_space(small_mesh, 8.0, 3)
    with pytest.raises(DimensionMismatch):
        basis_service.eval_points(space, np.array([0, 1]), np.zeros((3, 2)))

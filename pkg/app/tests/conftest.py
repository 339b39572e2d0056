# ===========================================================================
# File: app/tests/conftest.py
# ===========================================================================
import pytest
import numpy as np

from app.core.config import settings, logger
from app.models.modal import LongitudinalSpectrum, ModalBasis
from app.models.mesh import Mesh
from app.services.mesh_service import mesh_service
from app.services.modal_service import modal_service

settings.LOG_LEVEL = "DEBUG"
logger.setLevel(settings.LOG_LEVEL)

logger.info("--- RUNNING TEST SUITE (conftest.py) ---")


@pytest.fixture(scope="session")
def modal_k8():
    """Modal data for H=1, k=8 with 25 modes (3 propagating)."""
    return modal_service.build_modal(1.0, 8.0, 25)


@pytest.fixture(scope="session")
def basis_k8(modal_k8) -> ModalBasis:
    return modal_k8[0]


@pytest.fixture(scope="session")
def spectrum_k8(modal_k8) -> LongitudinalSpectrum:
    return modal_k8[1]


@pytest.fixture(scope="session")
def two_triangle_mesh() -> Mesh:
    """(-1, 1) x (0, 1) split along one diagonal: one facet of every class."""
    return mesh_service.structured_rectangle(1.0, 1.0, 1, 1)


@pytest.fixture(scope="session")
def small_mesh() -> Mesh:
    return mesh_service.generate_uniform(1.0, 1.0, 0.5)


@pytest.fixture(scope="session")
def lossy_square_mesh() -> Mesh:
    """(-0.5, 0.5) x (0, 1) in two triangles, the first one absorbing (n = 9+4i)."""
    base = mesh_service.structured_rectangle(0.5, 1.0, 1, 1)
    n = np.array([9 + 4j, 1.0 + 0j])
    return mesh_service.build_mesh(base.vertices, base.triangles, n, base.R, base.H)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240917)

# ===========================================================================
# File: app/services/__init__.py
# ===========================================================================
from .modal_service import modal_service
from .mesh_service import mesh_service
from .basis_service import basis_service
from .quadrature_service import quadrature_service
from .assembly_service import assembly_service
from .solver_service import solver_service
from .experiment_service import experiment_service

# ===========================================================================
# File: app/storage/__init__.py
# ===========================================================================
from .config_file import load_config, parse_config_text
from .mesh_file import read_mesh, write_mesh
from .results import read_results_csv, write_results_csv, write_summary
from .dumps import read_matrix, write_error, write_field, write_matrix

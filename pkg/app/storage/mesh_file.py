# ===========================================================================
# File: app/storage/mesh_file.py
# ===========================================================================
from pathlib import Path
from typing import List, Optional, Union
import numpy as np

from app.core.config import settings, logger
from app.core.exceptions import MeshFormatError
from app.models.mesh import Mesh
from app.services.mesh_service import mesh_service
from app.utils.helpers import format_number


def write_mesh(mesh: Mesh, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines: List[str] = [f"vertices {len(mesh.vertices)}"]
    lines += [f"{format_number(x)} {format_number(y)}" for x, y in mesh.vertices]
    lines.append(f"triangles {mesh.n_triangles}")
    lines += [
        f"{i} {j} {k} {format_number(n.real)} {format_number(n.imag)}"
        for (i, j, k), n in zip(mesh.triangles, mesh.n)
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info(f"Mesh written to {path}: {len(mesh.vertices)} vertices, {mesh.n_triangles} triangles")
    return path


def _section(lines: List[str], start: int, name: str) -> int:
    if start >= len(lines):
        raise MeshFormatError(f"missing '{name}' section")
    parts = lines[start].split()
    if len(parts) != 2 or parts[0] != name or not parts[1].isdigit():
        raise MeshFormatError(f"expected '{name} <count>', got '{lines[start]}'")
    return int(parts[1])


def read_mesh(path: Union[str, Path], R: Optional[float] = None, H: Optional[float] = None) -> Mesh:
    """Read the text mesh format; R and H default to the bounding box of the vertices."""
    lines = [line.strip() for line in Path(path).read_text(encoding="utf-8").splitlines() if line.strip()]
    n_vertices = _section(lines, 0, "vertices")
    header = 1 + n_vertices
    n_triangles = _section(lines, header, "triangles")
    if len(lines) != header + 1 + n_triangles:
        raise MeshFormatError(f"expected {header + 1 + n_triangles} non-empty lines, found {len(lines)}")
    try:
        vertices = np.array([[float(v) for v in line.split()] for line in lines[1:header]])
        rows = [line.split() for line in lines[header + 1:]]
        triangles = np.array([[int(v) for v in row[:3]] for row in rows], dtype=np.int64)
        n = np.array([complex(float(row[3]), float(row[4])) for row in rows])
    except (ValueError, IndexError) as exc:
        raise MeshFormatError(f"malformed mesh line in {path}: {exc}") from exc
    if vertices.shape != (n_vertices, 2) or any(len(row) != 5 for row in rows):
        raise MeshFormatError("vertex lines need 2 values and triangle lines need 5")

    scale = float(np.abs(vertices).max())
    tol = settings.GEOMETRY_TOL * max(scale, 1.0)
    xmin, ymin = vertices.min(axis=0)
    xmax, ymax = vertices.max(axis=0)
    if R is None:
        if abs(xmin + xmax) > tol:
            raise MeshFormatError(f"mesh is not symmetric about x1 = 0 (x range [{xmin}, {xmax}])")
        R = float(xmax)
    if H is None:
        if abs(ymin) > tol:
            raise MeshFormatError(f"mesh cross section must start at 0, found {ymin}")
        H = float(ymax)
    return mesh_service.build_mesh(vertices, triangles, n, R, H)

# ===========================================================================
# File: app/storage/dumps.py
# ===========================================================================
from pathlib import Path
from typing import Union
import numpy as np
import scipy.sparse as sp

from app.core.config import settings, logger

PathLike = Union[str, Path]


def _float_fmt() -> str:
    return f"%.{settings.CSV_DIGITS}g"


def write_matrix(matrix: sp.spmatrix, path: PathLike) -> Path:
    """Coordinate dump: `# rows cols nnz` then one `row col re im` line per stored entry."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    coo = sp.coo_matrix(matrix)
    coo.sum_duplicates()
    order = np.lexsort((coo.col, coo.row))
    table = np.column_stack([coo.row[order], coo.col[order], coo.data.real[order], coo.data.imag[order]])
    rows, cols = coo.shape
    np.savetxt(
        path, table, fmt=["%d", "%d", _float_fmt(), _float_fmt()],
        header=f"{rows} {cols} {coo.nnz}", comments="# ",
    )
    logger.info(f"Matrix ({rows}x{cols}, {coo.nnz} entries) written to {path}")
    return path


def read_matrix(path: PathLike) -> sp.csc_matrix:
    with open(path, encoding="utf-8") as handle:
        rows, cols, _ = (int(v) for v in handle.readline().lstrip("#").split())
    table = np.loadtxt(path, comments="#", ndmin=2)
    if table.size == 0:
        return sp.csc_matrix((rows, cols), dtype=complex)
    data = table[:, 2] + 1j * table[:, 3]
    return sp.coo_matrix(
        (data, (table[:, 0].astype(np.int64), table[:, 1].astype(np.int64))), shape=(rows, cols)
    ).tocsc()


def write_field(points: np.ndarray, values: np.ndarray, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table = np.column_stack([points[:, 0], points[:, 1], values.real, values.imag])
    np.savetxt(path, table, fmt=_float_fmt(), header="x y re(u) im(u)", comments="# ")
    logger.info(f"Field samples ({len(points)} points) written to {path}")
    return path


def write_error(points: np.ndarray, errors: np.ndarray, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table = np.column_stack([points[:, 0], points[:, 1], errors])
    np.savetxt(path, table, fmt=_float_fmt(), header="x y abs_err", comments="# ")
    return path

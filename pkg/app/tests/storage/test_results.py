# ===========================================================================
# File: app/tests/storage/test_results.py
# ===========================================================================
import json
import numpy as np
import scipy.sparse as sp

from app.core.config import logger
from app.models.experiment import CSV_HEADER, ResultRow, RunSummary
from app.storage import read_matrix, read_results_csv, write_field, write_matrix, write_results_csv, write_summary


def _rows():
    return [
        ResultRow(
            experiment="custom", k=8.0, R=1.0, H=1.0, h=0.1, Np=7, M=15, gamma=0.0, dofs=42,
            rel_l2_error=1.25e-3, residual=3e-16, cond_indicator=12.5,
        ),
        ResultRow(experiment="custom", k=8.0, R=1.0, H=1.0, h=0.05, Np=7, M=15, gamma=0.0, status="SingularSystem"),
    ]


def test_results_csv_layout(tmp_path):
    logger.info("Testing the results.csv header, number format and line endings")
    path = write_results_csv(_rows(), tmp_path / "results.csv")
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode("utf-8").splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    first = dict(zip(CSV_HEADER, lines[1].split(",")))
    assert first["h"] == "0.10000000000000001"
    assert first["Np"] == "7"
    assert first["dofs"] == "42"
    assert first["status"] == "ok"
    second = dict(zip(CSV_HEADER, lines[2].split(",")))
    assert second["rel_l2_error"] == "nan"
    assert second["status"] == "SingularSystem"


def test_results_csv_reads_back(tmp_path):
    logger.info("Testing that result rows read back with full precision")
    path = write_results_csv(_rows(), tmp_path / "results.csv")
    rows = read_results_csv(path)
    assert rows[0] == _rows()[0]
    assert not rows[1].ok and np.isnan(rows[1].rel_l2_error)


def test_summary_json(tmp_path):
    logger.info("Testing summary.json")
    path = write_summary(RunSummary(experiment="custom", rows=2, failed=1), tmp_path / "summary.json")
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["rows"] == 2 and data["failed"] == 1 and data["rates"] == []


def test_matrix_dump(tmp_path):
    logger.info("Testing the coordinate matrix dump")
    matrix = sp.csc_matrix(np.array([[1 + 2j, 0], [0.5, -3j]]))
    path = write_matrix(matrix, tmp_path / "matrix.txt")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# 2 2 3"
    assert lines[1].split()[:2] == ["0", "0"]
    assert np.array_equal(read_matrix(path).toarray(), matrix.toarray())


def test_field_dump(tmp_path):
    logger.info("Testing the sampled field file")
    points = np.array([[0.0, 0.5], [0.25, 0.75]])
    path = write_field(points, np.array([1 + 1j, -2j]), tmp_path / "field.txt")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# x y re(u) im(u)"
    assert np.allclose(np.loadtxt(path), [[0, 0.5, 1, 1], [0.25, 0.75, 0, -2]])

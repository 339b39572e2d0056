# ===========================================================================
# File: app/tests/services/test_convergence.py
# ===========================================================================
import pytest
import numpy as np

from app.core.config import logger
from app.models.experiment import ExperimentConfig
from app.services.experiment_service import experiment_service

pytestmark = pytest.mark.slow


def test_p_convergence_for_green_function():
    logger.info("Testing that the error falls as plane-wave directions are added")
    config = ExperimentConfig(
        experiment="fundamental", k=8, h=[0.2], Np=[5, 7, 9, 11], M=[15], N_f=20, record_timing=False,
    )
    rows = experiment_service.run(config)
    assert all(row.ok for row in rows)
    errors = [row.rel_l2_error for row in rows]
    assert all(b < a for a, b in zip(errors, errors[1:]))
    assert errors[-1] < errors[0] / 10


def test_ntd_truncation_needs_propagating_modes():
    logger.info("Testing that dropping propagating modes from the NtD map spoils the solution")
    config = ExperimentConfig(
        experiment="ntd-sweep", k=8, R=1.0, h=[0.2], Np=[11], M=[1, 3, 15], N_f=20, record_timing=False,
    )
    rows = experiment_service.run(config)
    assert all(row.ok for row in rows)
    by_m = {row.M: row.rel_l2_error for row in rows}
    assert by_m[1] > 10 * by_m[15]


def test_h_convergence_summary():
    logger.info("Testing that the summary reports a positive h-rate")
    config = ExperimentConfig(
        experiment="fundamental", k=8, h=[0.4, 0.2, 0.1], Np=[7], M=[15], N_f=20, record_timing=False,
    )
    rows = experiment_service.run(config)
    summary = experiment_service.summarize(config, rows)
    assert len(summary.rates) == 1
    assert summary.rates[0].slope > 1.0
    assert np.isfinite(summary.rates[0].slope)
